// Copyright 2026 The tocrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "tocrs/errors.h"
#include "tocrs/schemes.h"

namespace tocrs {
namespace {

class AlwaysSelect : public Scheme {
 public:
  AlwaysSelect(int n, int m, double b) : Scheme(n, m, b, 1.0) {}
  std::string name() const override { return "always_select"; }
  std::optional<double> SelectionProbability(int, int, int) const override { return 1.0; }
  std::unique_ptr<Scheme> Clone() const override {
    return std::make_unique<AlwaysSelect>(n(), m(), b());
  }

 protected:
  bool DoOffer(int, int, int, Rng&) override { return true; }
};

// Uniform-matroid OCRS with per-type activation and a common constant c.
class UniformSlice : public SliceOcrs {
 public:
  UniformSlice(double b, int cap, std::vector<double> type_probs, Matrix activation)
      : b_(b), cap_(cap), type_probs_(std::move(type_probs)), activation_(std::move(activation)) {
    const int types = activation_.rows();
    const int length = activation_.cols();
    for (int d = 0; d < types; ++d) {
      double total = 0.0;
      for (int j = 0; j < length; ++j) total += activation_(d, j);
      if (total > cap_ + kFeasibilityTolerance) {
        throw PreconditionError("slice activation exceeds the cardinality cap");
      }
    }
    if (cap_ == 0) {
      c_ = 1.0;  // nothing can be active
      avail_.assign(types, std::vector<double>(length, 1.0));
      return;
    }
    double lo = 1.0 / (1.0 + b_);
    double hi = 1.0;
    if (Availabilities(hi, nullptr)) {
      lo = hi;
    } else {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (Availabilities(mid, nullptr)) lo = mid; else hi = mid;
      }
    }
    c_ = lo;
    if (!Availabilities(c_, &avail_)) {
      throw std::logic_error("uniform OCRS calibration produced an invalid constant");
    }
  }

  double b() const override { return b_; }
  double c() const override { return c_; }
  void Begin() override { count_ = 0; }
  bool Offer(int position, int type, Rng& rng) override {
    if (count_ >= cap_) return false;
    if (!Flip(rng, c_ / avail_[type][position])) return false;
    ++count_;
    return true;
  }
  std::unique_ptr<SliceOcrs> Clone() const override {
    auto copy = std::make_unique<UniformSlice>(*this);
    copy->count_ = 0;
    return copy;
  }

 private:
  // Forward pass over the count distribution for each type; returns false if
  // some availability drops below c.
  bool Availabilities(double c, std::vector<std::vector<double>>* out) const {
    const int types = activation_.rows();
    const int length = activation_.cols();
    if (out) out->assign(types, std::vector<double>(length, 1.0));
    for (int d = 0; d < types; ++d) {
      std::vector<double> count(cap_ + 1, 0.0);
      count[0] = 1.0;
      for (int j = 0; j < length; ++j) {
        const double avail = std::accumulate(count.begin(), count.end() - 1, 0.0);
        if (avail < c) return false;
        if (out) (*out)[d][j] = avail;
        const double p = b_ * activation_(d, j) * c / avail;
        for (int k = cap_ - 1; k >= 0; --k) {
          const double move = count[k] * p;
          count[k] -= move;
          count[k + 1] += move;
        }
      }
    }
    return true;
  }

  double b_;
  int cap_;
  std::vector<double> type_probs_;
  Matrix activation_;
  double c_ = 1.0;
  std::vector<std::vector<double>> avail_;
  int count_ = 0;
};

class SingleCopyColumn : public SliceOcrs {
 public:
  SingleCopyColumn(double b, const std::vector<double>& w) : b_(b), c_(1.0 / (1.0 + b)) {
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("column weights must lie in [0, 1]");
      avail_.push_back(1.0 - b_ * c_ * total);
      total += v;
    }
    if (total > 1.0 + kFeasibilityTolerance) {
      throw PreconditionError("column marginals exceed 1");
    }
  }

  double b() const override { return b_; }
  double c() const override { return c_; }
  void Begin() override { taken_ = false; }
  bool Offer(int position, int, Rng& rng) override {
    if (taken_) return false;
    if (!Flip(rng, c_ / avail_[position])) return false;
    taken_ = true;
    return true;
  }
  std::unique_ptr<SliceOcrs> Clone() const override {
    auto copy = std::make_unique<SingleCopyColumn>(*this);
    copy->taken_ = false;
    return copy;
  }

 private:
  double b_;
  double c_;
  std::vector<double> avail_;
  bool taken_ = false;
};

class Unconstrained : public SliceOcrs {
 public:
  explicit Unconstrained(double b) : b_(b) {}
  double b() const override { return b_; }
  double c() const override { return 1.0; }
  void Begin() override {}
  bool Offer(int, int, Rng&) override { return true; }
  std::unique_ptr<SliceOcrs> Clone() const override {
    return std::make_unique<Unconstrained>(*this);
  }

 private:
  double b_;
};

class ComposedVh : public Scheme {
 public:
  ComposedVh(std::vector<std::unique_ptr<SliceOcrs>> rows,
             std::vector<std::unique_ptr<SliceOcrs>> columns, double b, double c)
      : Scheme(static_cast<int>(rows.size()), static_cast<int>(columns.size()), b, c),
        rows_(std::move(rows)),
        columns_(std::move(columns)) {}

  std::string name() const override { return "vh"; }
  std::optional<double> SelectionProbability(int i, int j, int) const override {
    return rows_[i]->c() * columns_[j]->c();
  }
  std::unique_ptr<Scheme> Clone() const override {
    std::vector<std::unique_ptr<SliceOcrs>> rows, columns;
    for (const auto& r : rows_) rows.push_back(r->Clone());
    for (const auto& c : columns_) columns.push_back(c->Clone());
    return std::make_unique<ComposedVh>(std::move(rows), std::move(columns), b(),
                                        declared_c());
  }

 protected:
  void DoBegin(Rng&) override {
    for (auto& r : rows_) r->Begin();
    for (auto& c : columns_) c->Begin();
  }
  bool DoOffer(int i, int j, int d, Rng& rng) override {
    const bool by_row = rows_[i]->Offer(j, d, rng);
    const bool by_column = columns_[j]->Offer(i, 0, rng);
    return by_row && by_column;
  }

 private:
  std::vector<std::unique_ptr<SliceOcrs>> rows_;
  std::vector<std::unique_ptr<SliceOcrs>> columns_;
};

}  // namespace

int EstimatorSampleCount(double epsilon, double delta, long long elements) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw PreconditionError("estimation needs epsilon, delta in (0, 1)");
  }
  if (elements <= 0) throw PreconditionError("element count must be positive");
  return static_cast<int>(std::ceil(std::log(2.0 * static_cast<double>(elements) / delta) /
                                    (2.0 * epsilon * epsilon)));
}

EventEstimator::EventEstimator(double epsilon, double delta, long long elements)
    : epsilon_(epsilon), samples_(EstimatorSampleCount(epsilon, delta, elements)) {}

double EventEstimator::Estimate(const std::function<bool(Rng&)>& simulator, Rng& rng) const {
  int hits = 0;
  for (int t = 0; t < samples_; ++t) hits += simulator(rng) ? 1 : 0;
  return static_cast<double>(hits) / samples_;
}

const char* BranchName(Branch branch) {
  switch (branch) {
    case Branch::kNone: return "none";
    case Branch::kHeavy: return "heavy";
    case Branch::kLight: return "light";
  }
  return "none";
}

void Scheme::Begin(Rng& rng) {
  selected_.clear();
  branch_ = Branch::kNone;
  run_clamps_ = 0;
  DoBegin(rng);
}

bool Scheme::Offer(int i, int j, int d, bool active, Rng& rng) {
  if (i < 0 || i >= n_ || j < 0 || j >= m_) throw DimensionError("offer outside the grid");
  if (!active) return false;
  const bool take = DoOffer(i, j, d, rng);
  if (take) selected_.push_back({i, j});
  return take;
}

std::optional<double> Scheme::SelectionProbability(int, int, int) const { return std::nullopt; }

bool Scheme::FlipCounted(Rng& rng, double p, bool clamped) {
  const bool outcome = Flip(rng, p);
  if (clamped) ++run_clamps_;
  return outcome;
}

std::vector<Cell> RunScheme(Scheme& scheme, const ActiveSet& active, Rng& rng) {
  scheme.Begin(rng);
  for (int i = 0; i < active.n; ++i) {
    for (int j = 0; j < active.m; ++j) {
      scheme.Offer(i, j, active.row_types[i], active.active(i, j), rng);
    }
  }
  return scheme.selected();
}

std::unique_ptr<Scheme> AlwaysSelectScheme(int n, int m, double b) {
  return std::make_unique<AlwaysSelect>(n, m, b);
}

std::unique_ptr<SliceOcrs> KUniformRowOcrs(double b, int cap,
                                           const std::vector<double>& type_probs,
                                           const Matrix& activation) {
  if (!(b >= 0.0 && b <= 1.0)) throw PreconditionError("b must lie in [0, 1]");
  if (cap < 0) throw PreconditionError("cardinality cap must be nonnegative");
  if (static_cast<int>(type_probs.size()) != activation.rows()) {
    throw DimensionError("one activation row per type required");
  }
  return std::make_unique<UniformSlice>(b, cap, type_probs, activation);
}

std::unique_ptr<SliceOcrs> SingleCopyColumnOcrs(double b, const std::vector<double>& w) {
  if (!(b >= 0.0 && b <= 1.0)) throw PreconditionError("b must lie in [0, 1]");
  return std::make_unique<SingleCopyColumn>(b, w);
}

std::unique_ptr<SliceOcrs> UnconstrainedSliceOcrs(double b) {
  return std::make_unique<Unconstrained>(b);
}

std::unique_ptr<Scheme> ComposeVh(std::vector<std::unique_ptr<SliceOcrs>> rows,
                                  std::vector<std::unique_ptr<SliceOcrs>> columns) {
  if (rows.empty() || columns.empty()) throw PreconditionError("VH needs rows and columns");
  const double b = rows.front()->b();
  double c_row = 1.0;
  double c_col = 1.0;
  for (const auto& r : rows) {
    if (r->b() != b) throw PreconditionError("row and column OCRSs disagree on b");
    c_row = std::min(c_row, r->c());
  }
  for (const auto& c : columns) {
    if (c->b() != b) throw PreconditionError("row and column OCRSs disagree on b");
    c_col = std::min(c_col, c->c());
  }
  return std::make_unique<ComposedVh>(std::move(rows), std::move(columns), b, c_row * c_col);
}

VhSlices BuildVhSlices(double b, const VerticalHorizontal& constraint,
                       const TwoLevelProcess& process) {
  Validate(process);
  Validate(FeasibilityConstraint{constraint}, process.n, process.m);
  const Matrix w = process.Marginals();
  VhSlices slices;
  for (int i = 0; i < process.n; ++i) {
    slices.rows.push_back(KUniformRowOcrs(b, std::min(constraint.row_caps[i], process.m),
                                          process.row_probs[i], process.activation[i]));
  }
  for (int j = 0; j < process.m; ++j) {
    std::vector<double> column(process.n);
    for (int i = 0; i < process.n; ++i) column[i] = w(i, j);
    const int cap = std::min(constraint.col_caps[j], process.n);
    if (cap == 1 && process.n > 1) {
      slices.columns.push_back(SingleCopyColumnOcrs(b, column));
    } else {
      Matrix single(1, process.n);
      for (int i = 0; i < process.n; ++i) single(0, i) = column[i];
      slices.columns.push_back(KUniformRowOcrs(b, cap, {1.0}, single));
    }
  }
  return slices;
}

std::unique_ptr<Scheme> VhScheme(double b, const VerticalHorizontal& constraint,
                                 const TwoLevelProcess& process) {
  VhSlices slices = BuildVhSlices(b, constraint, process);
  return ComposeVh(std::move(slices.rows), std::move(slices.columns));
}

std::unique_ptr<Scheme> MakeScheme(const FeasibilityConstraint& constraint,
                                   const TwoLevelProcess& process, double b,
                                   const ProbabilityMode& mode) {
  const int n = process.n;
  const int m = process.m;
  if (std::holds_alternative<SingleCopyPerItem>(constraint)) {
    return VhScheme(b, {std::vector<int>(n, m), std::vector<int>(m, 1)}, process);
  }
  if (const auto* k = std::get_if<KUniformPerAgent>(&constraint)) {
    return VhScheme(b, {k->k, std::vector<int>(m, n)}, process);
  }
  if (const auto* vh = std::get_if<VerticalHorizontal>(&constraint)) {
    return VhScheme(b, *vh, process);
  }
  if (const auto* k = std::get_if<Knapsack>(&constraint)) {
    return KnapsackTocrs(b, *k, process, mode);
  }
  if (const auto* k = std::get_if<MultiChoiceKnapsack>(&constraint)) {
    return MultiChoiceKnapsackTocrs(b, *k, process, mode);
  }
  throw UnsupportedConstraintError("no scheme registered for " + VariantName(constraint));
}

}  // namespace tocrs
