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

// Heavy/light tOCRSs for knapsack and multi-choice knapsack.

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>

#include "tocrs/errors.h"
#include "tocrs/schemes.h"

namespace tocrs {
namespace {

using Table = std::vector<std::vector<std::vector<double>>>;  // [i][d][j]
using WeightDist = std::map<double, double>;  // light load below K/2 -> mass

Table MakeTable(const TwoLevelProcess& process, double fill) {
  Table t(process.n);
  for (int i = 0; i < process.n; ++i) {
    t[i].assign(process.row_types(i), std::vector<double>(process.m, fill));
  }
  return t;
}

void CheckStates(const WeightDist& dist) {
  if (static_cast<long long>(dist.size()) > kMaxDpStates) {
    throw TooLargeError("load distribution exceeds the exact-computation state cap");
  }
}

double Mass(const WeightDist& dist) {
  double total = 0.0;
  for (const auto& [w, p] : dist) total += p;
  return total;
}

// Clamps a normalized selection probability; values meaningfully above 1
// cannot arise from exact probabilities and signal a bug.
double Normalize(double p, bool estimated, bool* clamped) {
  *clamped = false;
  if (p <= 1.0) return p;
  if (!estimated && p > 1.0 + 1e-9) {
    throw std::logic_error("exact selection probability above 1");
  }
  *clamped = estimated;
  return 1.0;
}

struct HeavyLight {
  double half = 0.0;  // K/2
  std::vector<std::vector<char>> heavy;  // [i][j]
  Table avail;  // Pr[A_{i,j}(d)] on heavy cells

  HeavyLight(const TwoLevelProcess& process, const Matrix& weights, double capacity, double b)
      : half(capacity / 2.0), heavy(process.n, std::vector<char>(process.m, 0)) {
    const Matrix w = process.Marginals();
    avail = MakeTable(process, 1.0);
    const double rate = b / (1.0 + 4.0 * b);
    double before = 0.0;  // heavy marginal mass of earlier agents
    for (int i = 0; i < process.n; ++i) {
      for (int j = 0; j < process.m; ++j) heavy[i][j] = weights(i, j) > half;
      for (int d = 0; d < process.row_types(i); ++d) {
        double row = 0.0;
        for (int j = 0; j < process.m; ++j) {
          if (!heavy[i][j]) continue;
          avail[i][d][j] = 1.0 - rate * (before + row);
          row += process.activation[i](d, j);
        }
      }
      for (int j = 0; j < process.m; ++j) {
        if (heavy[i][j]) before += w(i, j);
      }
    }
  }
};

// Shared online state of the heavy branch.
bool OfferHeavy(const HeavyLight& hl, double b, int i, int j, int d, bool* taken, Rng& rng) {
  if (*taken || !hl.heavy[i][j]) return false;
  double p = 1.0 / ((1.0 + 4.0 * b) * hl.avail[i][d][j]);
  bool clamped = false;
  p = Normalize(p, false, &clamped);
  if (!Flip(rng, p)) return false;
  *taken = true;
  return true;
}

// ---------------------------------------------------------------------------
// Knapsack.

// Forward pass of the light branch. `rule(i, d, j, pB)` returns the selection
// probability for light cell (i, j) under row type d given the exact
// Pr[B_{i,j}(d)]; the exact probabilities are written to `pb`.
using LightRule = std::function<double(int, int, int, double)>;

void KnapsackLightPass(const TwoLevelProcess& process, const Matrix& weights,
                       const HeavyLight& hl, double b, const LightRule& rule, Table* pb) {
  *pb = MakeTable(process, 1.0);
  WeightDist start{{0.0, 1.0}};
  for (int i = 0; i < process.n; ++i) {
    WeightDist next;
    for (int d = 0; d < process.row_types(i); ++d) {
      WeightDist dist = start;
      for (int j = 0; j < process.m; ++j) {
        if (hl.heavy[i][j]) continue;
        const double p_b = Mass(dist);
        (*pb)[i][d][j] = p_b;
        const double s = rule(i, d, j, p_b);
        const double move = b * process.activation[i](d, j) * s;
        if (move <= 0.0) continue;
        const double k = weights(i, j);
        WeightDist updated;
        for (const auto& [w, mass] : dist) {
          updated[w] += mass * (1.0 - move);
          if (w + k < hl.half) updated[w + k] += mass * move;
        }
        dist = std::move(updated);
        CheckStates(dist);
      }
      const double pd = process.row_probs[i][d];
      for (const auto& [w, mass] : dist) next[w] += pd * mass;
    }
    start = std::move(next);
    CheckStates(start);
  }
}

class KnapsackScheme : public Scheme {
 public:
  KnapsackScheme(double b, const Knapsack& constraint, const TwoLevelProcess& process,
                 const ProbabilityMode& mode)
      : Scheme(process.n, process.m, b, DeclaredC(b, mode)),
        weights_(constraint.weights),
        hl_(process, constraint.weights, constraint.capacity, b) {
    const double norm = 1.0 + 4.0 * b;
    select_ = MakeTable(process, 0.0);
    clamped_.assign(process.n, {});
    for (int i = 0; i < process.n; ++i) {
      clamped_[i].assign(process.row_types(i), std::vector<char>(process.m, 0));
    }
    Table pb;
    if (!mode.estimated()) {
      KnapsackLightPass(process, weights_, hl_, b,
                        [&](int i, int d, int j, double p_b) {
                          bool clamped = false;
                          const double s = Normalize(1.0 / (norm * p_b), false, &clamped);
                          select_[i][d][j] = s;
                          return s;
                        },
                        &pb);
      exact_ = MakeTable(process, 1.0 / (2.0 * norm));
      return;
    }
    Estimate(process, mode);
    try {
      KnapsackLightPass(process, weights_, hl_, b,
                        [&](int i, int d, int j, double) { return select_[i][d][j]; }, &pb);
      Table exact = MakeTable(process, 1.0 / (2.0 * norm));
      for (int i = 0; i < process.n; ++i) {
        for (int d = 0; d < process.row_types(i); ++d) {
          for (int j = 0; j < process.m; ++j) {
            if (!hl_.heavy[i][j]) exact[i][d][j] = 0.5 * pb[i][d][j] * select_[i][d][j];
          }
        }
      }
      exact_ = std::move(exact);
    } catch (const TooLargeError&) {
      exact_.reset();
    }
  }

  std::string name() const override { return "knapsack"; }
  long long table_clamps() const override { return table_clamps_; }
  std::optional<double> SelectionProbability(int i, int j, int d) const override {
    if (!exact_) return std::nullopt;
    return (*exact_)[i][d][j];
  }
  std::unique_ptr<Scheme> Clone() const override {
    return std::make_unique<KnapsackScheme>(*this);
  }

 protected:
  void DoBegin(Rng& rng) override {
    set_branch(Flip(rng, 0.5) ? Branch::kHeavy : Branch::kLight);
    heavy_taken_ = false;
    load_ = 0.0;
  }

  bool DoOffer(int i, int j, int d, Rng& rng) override {
    if (branch() == Branch::kHeavy) return OfferHeavy(hl_, b(), i, j, d, &heavy_taken_, rng);
    if (hl_.heavy[i][j] || !(load_ < hl_.half)) return false;
    if (!FlipCounted(rng, select_[i][d][j], clamped_[i][d][j])) return false;
    load_ += weights_(i, j);
    return true;
  }

 private:
  static double DeclaredC(double b, const ProbabilityMode& mode) {
    const double c = 1.0 / (2.0 + 8.0 * b);
    return mode.estimated() ? c * (1.0 - mode.delta) / (1.0 + 10.0 * mode.epsilon) : c;
  }

  // Sequential estimation of Pr[B_{i,j}(d)] in arrival order; each estimate
  // replays the light branch with the already-estimated earlier coins.
  void Estimate(const TwoLevelProcess& process, const ProbabilityMode& mode) {
    const EventEstimator estimator(mode.epsilon, mode.delta,
                                   static_cast<long long>(process.n) * process.m);
    const double norm = 1.0 + 4.0 * b();
    std::uint64_t stream = 0;
    for (int i = 0; i < process.n; ++i) {
      for (int d = 0; d < process.row_types(i); ++d) {
        for (int j = 0; j < process.m; ++j) {
          if (hl_.heavy[i][j]) continue;
          auto simulate = [&](Rng& rng) {
            double load = 0.0;
            for (int r = 0; r <= i; ++r) {
              const int dr = r < i ? SampleIndex(rng, process.row_probs[r]) : d;
              const int end = r < i ? process.m : j;
              for (int col = 0; col < end; ++col) {
                if (hl_.heavy[r][col]) continue;
                if (!Flip(rng, b() * process.activation[r](dr, col))) continue;
                if (load < hl_.half && Flip(rng, select_[r][dr][col])) load += weights_(r, col);
              }
            }
            return load < hl_.half;
          };
          Rng rng = MakeRng(mode.seed, stream++);
          const double mean = estimator.Estimate(simulate, rng);
          bool clamped = false;
          select_[i][d][j] =
              Normalize(1.0 / (norm * estimator.UpperSurrogate(mean)), true, &clamped);
          clamped_[i][d][j] = clamped;
          table_clamps_ += clamped ? 1 : 0;
        }
      }
    }
  }

  Matrix weights_;
  HeavyLight hl_;
  Table select_;
  std::vector<std::vector<std::vector<char>>> clamped_;
  std::optional<Table> exact_;
  long long table_clamps_ = 0;
  bool heavy_taken_ = false;
  double load_ = 0.0;
};

// ---------------------------------------------------------------------------
// Multi-choice knapsack.

// Forward pass of the light branch over the load of earlier rows. `select`
// gives selection probabilities; fills the exact Pr[B_i] per row and the
// exact Pr[B_i and C_{i,j}(d)] per light cell.
void MultiChoiceLightPass(const TwoLevelProcess& process, const Matrix& weights,
                          const HeavyLight& hl, double b,
                          const std::function<double(int, int, int, double)>& rule,
                          std::vector<double>* p_b, Table* p_bc) {
  p_b->assign(process.n, 1.0);
  *p_bc = MakeTable(process, 1.0);
  WeightDist start{{0.0, 1.0}};
  for (int i = 0; i < process.n; ++i) {
    const double row_open = Mass(start);
    (*p_b)[i] = row_open;
    WeightDist next;
    for (int d = 0; d < process.row_types(i); ++d) {
      const double pd = process.row_probs[i][d];
      double open = 1.0;  // Pr[C_{i,j}(d) | B_i]
      std::vector<std::pair<double, double>> picks;  // (weight, probability)
      for (int j = 0; j < process.m; ++j) {
        if (hl.heavy[i][j]) continue;
        (*p_bc)[i][d][j] = row_open * open;
        const double s = rule(i, d, j, row_open * open);
        const double pick = open * b * process.activation[i](d, j) * s;
        if (pick > 0.0) picks.emplace_back(weights(i, j), pick);
        open -= pick;
      }
      for (const auto& [w, mass] : start) {
        next[w] += pd * mass * open;
        for (const auto& [k, pick] : picks) {
          if (w + k < hl.half) next[w + k] += pd * mass * pick;
        }
      }
    }
    start = std::move(next);
    CheckStates(start);
  }
}

class MultiChoiceScheme : public Scheme {
 public:
  MultiChoiceScheme(double b, const MultiChoiceKnapsack& constraint,
                    const TwoLevelProcess& process, const ProbabilityMode& mode)
      : Scheme(process.n, process.m, b, DeclaredC(b, mode)),
        weights_(constraint.weights),
        hl_(process, constraint.weights, constraint.capacity, b),
        heavy_prob_((1.0 + 4.0 * b) / (2.0 + 7.0 * b)) {
    const double norm = 1.0 + 3.0 * b;
    select_ = MakeTable(process, 0.0);
    clamped_.assign(process.n, {});
    for (int i = 0; i < process.n; ++i) {
      clamped_[i].assign(process.row_types(i), std::vector<char>(process.m, 0));
    }
    std::vector<double> p_b;
    Table p_bc;
    if (!mode.estimated()) {
      MultiChoiceLightPass(process, weights_, hl_, b,
                           [&](int i, int d, int j, double joint) {
                             bool clamped = false;
                             const double s = Normalize(1.0 / (norm * joint), false, &clamped);
                             select_[i][d][j] = s;
                             return s;
                           },
                           &p_b, &p_bc);
      exact_ = MakeTable(process, 1.0 / (2.0 + 7.0 * b));
      return;
    }
    Estimate(process, mode);
    try {
      MultiChoiceLightPass(process, weights_, hl_, b,
                           [&](int i, int d, int j, double) { return select_[i][d][j]; },
                           &p_b, &p_bc);
      Table exact = MakeTable(process, 1.0 / (2.0 + 7.0 * b));
      for (int i = 0; i < process.n; ++i) {
        for (int d = 0; d < process.row_types(i); ++d) {
          for (int j = 0; j < process.m; ++j) {
            if (!hl_.heavy[i][j]) {
              exact[i][d][j] = (1.0 - heavy_prob_) * p_bc[i][d][j] * select_[i][d][j];
            }
          }
        }
      }
      exact_ = std::move(exact);
    } catch (const TooLargeError&) {
      exact_.reset();
    }
  }

  std::string name() const override { return "multi_choice_knapsack"; }
  long long table_clamps() const override { return table_clamps_; }
  std::optional<double> SelectionProbability(int i, int j, int d) const override {
    if (!exact_) return std::nullopt;
    return (*exact_)[i][d][j];
  }
  std::unique_ptr<Scheme> Clone() const override {
    return std::make_unique<MultiChoiceScheme>(*this);
  }

 protected:
  void DoBegin(Rng& rng) override {
    set_branch(Flip(rng, heavy_prob_) ? Branch::kHeavy : Branch::kLight);
    heavy_taken_ = false;
    load_ = 0.0;
    last_row_ = -1;
  }

  bool DoOffer(int i, int j, int d, Rng& rng) override {
    if (branch() == Branch::kHeavy) return OfferHeavy(hl_, b(), i, j, d, &heavy_taken_, rng);
    if (hl_.heavy[i][j] || last_row_ == i || !(load_ < hl_.half)) return false;
    if (!FlipCounted(rng, select_[i][d][j], clamped_[i][d][j])) return false;
    load_ += weights_(i, j);
    last_row_ = i;
    return true;
  }

 private:
  static double DeclaredC(double b, const ProbabilityMode& mode) {
    const double c = 1.0 / (2.0 + 7.0 * b);
    return mode.estimated() ? c * (1.0 - mode.delta) / (1.0 + 8.0 * mode.epsilon) : c;
  }

  // Estimates Pr[B_i] row by row; the in-row correction is closed form.
  void Estimate(const TwoLevelProcess& process, const ProbabilityMode& mode) {
    const EventEstimator estimator(mode.epsilon, mode.delta,
                                   static_cast<long long>(process.n) * process.m);
    const double norm = 1.0 + 3.0 * b();
    for (int i = 0; i < process.n; ++i) {
      auto simulate = [&](Rng& rng) {
        double load = 0.0;
        for (int r = 0; r < i; ++r) {
          const int dr = SampleIndex(rng, process.row_probs[r]);
          for (int col = 0; col < process.m; ++col) {
            if (hl_.heavy[r][col]) continue;
            if (!Flip(rng, b() * process.activation[r](dr, col))) continue;
            if (load < hl_.half && Flip(rng, select_[r][dr][col])) {
              load += weights_(r, col);
              break;
            }
          }
        }
        return load < hl_.half;
      };
      Rng rng = MakeRng(mode.seed, static_cast<std::uint64_t>(i));
      const double mean = estimator.Estimate(simulate, rng);
      for (int d = 0; d < process.row_types(i); ++d) {
        double prefix = 0.0;
        for (int j = 0; j < process.m; ++j) {
          if (hl_.heavy[i][j]) continue;
          const double surrogate = estimator.UpperSurrogate(mean - b() / norm * prefix);
          bool clamped = true;
          select_[i][d][j] =
              surrogate > 0.0 ? Normalize(1.0 / (norm * surrogate), true, &clamped) : 1.0;
          clamped_[i][d][j] = clamped;
          table_clamps_ += clamped ? 1 : 0;
          prefix += process.activation[i](d, j);
        }
      }
    }
  }

  Matrix weights_;
  HeavyLight hl_;
  double heavy_prob_;
  Table select_;
  std::vector<std::vector<std::vector<char>>> clamped_;
  std::optional<Table> exact_;
  long long table_clamps_ = 0;
  bool heavy_taken_ = false;
  double load_ = 0.0;
  int last_row_ = -1;
};

void RequireFeasible(const TwoLevelProcess& process, const FeasibilityConstraint& constraint,
                     double b) {
  if (!(b >= 0.0 && b <= 1.0)) throw PreconditionError("b must lie in [0, 1]");
  Validate(process);
  const FeasibilityReport report = CheckProcessFeasibility(process, constraint);
  if (!report.feasible) {
    throw PreconditionError("process is not feasible for the constraint (violation " +
                            std::to_string(report.max_violation) + ")");
  }
}

}  // namespace

std::unique_ptr<Scheme> KnapsackTocrs(double b, const Knapsack& constraint,
                                      const TwoLevelProcess& process,
                                      const ProbabilityMode& mode) {
  RequireFeasible(process, constraint, b);
  return std::make_unique<KnapsackScheme>(b, constraint, process, mode);
}

std::unique_ptr<Scheme> MultiChoiceKnapsackTocrs(double b, const MultiChoiceKnapsack& constraint,
                                                 const TwoLevelProcess& process,
                                                 const ProbabilityMode& mode) {
  RequireFeasible(process, constraint, b);
  return std::make_unique<MultiChoiceScheme>(b, constraint, process, mode);
}

}  // namespace tocrs
