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

#include "tocrs/core.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void CheckWeights(const Matrix& weights, double capacity, int n, int m) {
  if (weights.rows() != n || weights.cols() != m) {
    throw DimensionError("knapsack weight table must be n x m");
  }
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw PreconditionError("knapsack capacity must be positive and finite");
  }
  for (double w : weights.data()) {
    if (!(w >= 0.0) || w > capacity) {
      throw PreconditionError("knapsack weights must lie in [0, capacity]");
    }
  }
}

std::string Idx(int a) { return "[" + std::to_string(a) + "]"; }
std::string Idx(int a, int b) { return Idx(a) + Idx(b); }

}  // namespace

std::string VariantName(const FeasibilityConstraint& constraint) {
  return std::visit(
      Overloaded{[](const SingleCopyPerItem&) { return std::string("single_copy_per_item"); },
                 [](const KUniformPerAgent&) { return std::string("k_uniform_per_agent"); },
                 [](const Knapsack&) { return std::string("knapsack"); },
                 [](const MultiChoiceKnapsack&) { return std::string("multi_choice_knapsack"); },
                 [](const VerticalHorizontal&) { return std::string("vh"); }},
      constraint);
}

Matrix TwoLevelProcess::Marginals() const {
  Matrix w(n, m);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < row_types(i); ++d) {
      const double p = row_probs[i][d];
      for (int j = 0; j < m; ++j) w(i, j) += p * activation[i](d, j);
    }
  }
  return w;
}

int ActiveSet::count() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double LinearInequality::Lhs(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [k, coef] : terms) s += coef * x[k];
  return s;
}

void Validate(const AgentTypeSpace& space, int m) {
  if (space.support.empty() || space.support.size() != space.probs.size()) {
    throw PreconditionError("type space needs one probability per support vector");
  }
  double total = 0.0;
  for (double p : space.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw PreconditionError("type probabilities must be nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("type probabilities must sum to 1");
  }
  for (const auto& v : space.support) {
    if (static_cast<int>(v.size()) != m) {
      throw DimensionError("valuation vector length differs from item count");
    }
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw PreconditionError("valuations must be finite and nonnegative");
      }
    }
  }
  std::set<std::vector<double>> distinct(space.support.begin(), space.support.end());
  if (distinct.size() != space.support.size()) {
    throw PreconditionError("support vectors must be distinct");
  }
}

void Validate(const FeasibilityConstraint& constraint, int n, int m) {
  std::visit(
      Overloaded{
          [](const SingleCopyPerItem&) {},
          [&](const KUniformPerAgent& c) {
            if (static_cast<int>(c.k.size()) != n) {
              throw DimensionError("k-uniform caps must have one entry per agent");
            }
            for (int k : c.k) {
              if (k < 0) throw PreconditionError("cardinality caps must be nonnegative");
            }
          },
          [&](const Knapsack& c) { CheckWeights(c.weights, c.capacity, n, m); },
          [&](const MultiChoiceKnapsack& c) { CheckWeights(c.weights, c.capacity, n, m); },
          [&](const VerticalHorizontal& c) {
            if (static_cast<int>(c.row_caps.size()) != n ||
                static_cast<int>(c.col_caps.size()) != m) {
              throw DimensionError("VH needs one row constraint per agent and one "
                                   "column constraint per item");
            }
            for (int k : c.row_caps) {
              if (k < 0) throw PreconditionError("cardinality caps must be nonnegative");
            }
            for (int k : c.col_caps) {
              if (k < 0) throw PreconditionError("cardinality caps must be nonnegative");
            }
          }},
      constraint);
}

void Validate(const AuctionInstance& instance) {
  if (instance.n <= 0 || instance.m <= 0) {
    throw PreconditionError("instance needs at least one agent and one item");
  }
  if (static_cast<int>(instance.type_spaces.size()) != instance.n) {
    throw DimensionError("one type space per agent required");
  }
  for (const auto& space : instance.type_spaces) Validate(space, instance.m);
  Validate(instance.constraint, instance.n, instance.m);
}

void Validate(const TwoLevelProcess& process) {
  if (static_cast<int>(process.row_probs.size()) != process.n ||
      static_cast<int>(process.activation.size()) != process.n) {
    throw DimensionError("process needs one row distribution per agent");
  }
  for (int i = 0; i < process.n; ++i) {
    const auto& probs = process.row_probs[i];
    const Matrix& x = process.activation[i];
    if (probs.empty() || x.rows() != static_cast<int>(probs.size()) || x.cols() != process.m) {
      throw DimensionError("activation table of agent " + std::to_string(i) +
                           " must be |D_i| x m");
    }
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw PreconditionError("row-type probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw PreconditionError("row-type probabilities must sum to 1");
    }
    for (double v : x.data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw PreconditionError("activation probabilities must lie in [0, 1]");
      }
    }
  }
  const Matrix w = process.Marginals();
  for (double v : w.data()) {
    if (v > 1.0 + 1e-12) throw PreconditionError("marginal weights must lie in [0, 1]");
  }
}

std::vector<LinearInequality> RowPolytope(const FeasibilityConstraint& constraint,
                                          int agent, int m) {
  std::vector<LinearInequality> out;
  auto cardinality = [&](const std::string& name, double cap) {
    LinearInequality ineq{name, {}, cap};
    for (int j = 0; j < m; ++j) ineq.terms.emplace_back(j, 1.0);
    out.push_back(std::move(ineq));
  };
  std::visit(Overloaded{
                 [](const SingleCopyPerItem&) {},
                 [&](const KUniformPerAgent& c) {
                   if (c.k[agent] < m) cardinality("k_uniform", c.k[agent]);
                 },
                 [&](const Knapsack& c) {
                   LinearInequality ineq{"knapsack_row", {}, c.capacity};
                   for (int j = 0; j < m; ++j) ineq.terms.emplace_back(j, c.weights(agent, j));
                   out.push_back(std::move(ineq));
                 },
                 [&](const MultiChoiceKnapsack&) { cardinality("unit_demand", 1.0); },
                 [&](const VerticalHorizontal& c) {
                   if (c.row_caps[agent] < m) cardinality("row_cap", c.row_caps[agent]);
                   for (int j = 0; j < m; ++j) {
                     if (c.col_caps[j] == 0) {
                       out.push_back({"col_cap_zero" + Idx(j), {{j, 1.0}}, 0.0});
                     }
                   }
                 }},
             constraint);
  return out;
}

std::vector<LinearInequality> MarginalPolytope(const FeasibilityConstraint& constraint,
                                               int n, int m) {
  std::vector<LinearInequality> out;
  auto row_sum = [&](const std::string& name, int i, double cap) {
    LinearInequality ineq{name + Idx(i), {}, cap};
    for (int j = 0; j < m; ++j) ineq.terms.emplace_back(i * m + j, 1.0);
    out.push_back(std::move(ineq));
  };
  auto col_sum = [&](const std::string& name, int j, double cap) {
    LinearInequality ineq{name + Idx(j), {}, cap};
    for (int i = 0; i < n; ++i) ineq.terms.emplace_back(i * m + j, 1.0);
    out.push_back(std::move(ineq));
  };
  auto knapsack = [&](const Matrix& weights, double capacity) {
    LinearInequality ineq{"knapsack", {}, capacity};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) ineq.terms.emplace_back(i * m + j, weights(i, j));
    }
    out.push_back(std::move(ineq));
  };
  std::visit(Overloaded{
                 [&](const SingleCopyPerItem&) {
                   for (int j = 0; j < m; ++j) col_sum("single_copy", j, 1.0);
                 },
                 [&](const KUniformPerAgent& c) {
                   for (int i = 0; i < n; ++i) {
                     if (c.k[i] < m) row_sum("k_uniform", i, c.k[i]);
                   }
                 },
                 [&](const Knapsack& c) { knapsack(c.weights, c.capacity); },
                 [&](const MultiChoiceKnapsack& c) {
                   knapsack(c.weights, c.capacity);
                   for (int i = 0; i < n; ++i) row_sum("unit_demand", i, 1.0);
                 },
                 [&](const VerticalHorizontal& c) {
                   for (int i = 0; i < n; ++i) {
                     if (c.row_caps[i] < m) row_sum("row_cap", i, c.row_caps[i]);
                   }
                   for (int j = 0; j < m; ++j) {
                     if (c.col_caps[j] < n) col_sum("col_cap", j, c.col_caps[j]);
                   }
                 }},
             constraint);
  return out;
}

ActiveSet SampleActiveSet(const TwoLevelProcess& process, double b, Rng& rng) {
  ActiveSet out;
  out.n = process.n;
  out.m = process.m;
  out.bits.assign(static_cast<size_t>(process.n) * process.m, 0);
  out.row_types.resize(process.n);
  for (int i = 0; i < process.n; ++i) {
    const int d = SampleIndex(rng, process.row_probs[i]);
    out.row_types[i] = d;
    for (int j = 0; j < process.m; ++j) {
      if (Flip(rng, b * process.activation[i](d, j))) {
        out.bits[static_cast<size_t>(i) * process.m + j] = 1;
      }
    }
  }
  return out;
}

bool IsFeasibleSet(const FeasibilityConstraint& constraint, int n, int m,
                   std::span<const Cell> selected) {
  std::set<Cell> cells;
  for (const Cell& c : selected) {
    if (c.agent < 0 || c.agent >= n || c.item < 0 || c.item >= m) {
      throw DimensionError("cell " + Idx(c.agent, c.item) + " outside the grid");
    }
    cells.insert(c);
  }
  std::vector<int> per_row(n, 0), per_col(m, 0);
  for (const Cell& c : cells) {
    ++per_row[c.agent];
    ++per_col[c.item];
  }
  auto weight_of = [&](const Matrix& weights) {
    double total = 0.0;
    for (const Cell& c : cells) total += weights(c.agent, c.item);
    return total;
  };
  return std::visit(
      Overloaded{
          [&](const SingleCopyPerItem&) {
            return std::all_of(per_col.begin(), per_col.end(), [](int k) { return k <= 1; });
          },
          [&](const KUniformPerAgent& c) {
            for (int i = 0; i < n; ++i) {
              if (per_row[i] > c.k[i]) return false;
            }
            return true;
          },
          [&](const Knapsack& c) {
            return weight_of(c.weights) <= c.capacity + kFeasibilityTolerance;
          },
          [&](const MultiChoiceKnapsack& c) {
            if (std::any_of(per_row.begin(), per_row.end(), [](int k) { return k > 1; })) {
              return false;
            }
            return weight_of(c.weights) <= c.capacity + kFeasibilityTolerance;
          },
          [&](const VerticalHorizontal& c) {
            for (int i = 0; i < n; ++i) {
              if (per_row[i] > c.row_caps[i]) return false;
            }
            for (int j = 0; j < m; ++j) {
              if (per_col[j] > c.col_caps[j]) return false;
            }
            return true;
          }},
      constraint);
}

FeasibilityReport CheckProcessFeasibility(const TwoLevelProcess& process,
                                          const FeasibilityConstraint& constraint,
                                          double tolerance) {
  Validate(constraint, process.n, process.m);
  FeasibilityReport report;
  auto record = [&](SlackEntry entry) {
    const double violation = entry.lhs - entry.rhs;
    report.max_violation = std::max(report.max_violation, violation);
    if (violation > tolerance) report.feasible = false;
    report.entries.push_back(std::move(entry));
  };

  double max_x = 0.0, min_x = 0.0;
  for (int i = 0; i < process.n; ++i) {
    const auto row_ineqs = RowPolytope(constraint, i, process.m);
    for (int d = 0; d < process.row_types(i); ++d) {
      const auto x = process.activation[i].row(d);
      for (double v : x) {
        max_x = std::max(max_x, v);
        min_x = std::min(min_x, v);
      }
      for (const auto& ineq : row_ineqs) {
        record({"row" + Idx(i, d) + ":" + ineq.name, ineq.Lhs(x), ineq.rhs});
      }
    }
  }
  record({"x<=1", max_x, 1.0});
  record({"x>=0", -min_x, 0.0});

  const Matrix w = process.Marginals();
  for (const auto& ineq : MarginalPolytope(constraint, process.n, process.m)) {
    record({"marginal:" + ineq.name, ineq.Lhs(w.data()), ineq.rhs});
  }
  double max_w = 0.0;
  for (double v : w.data()) max_w = std::max(max_w, v);
  record({"w<=1", max_w, 1.0});
  return report;
}

const Matrix* KnapsackWeights(const FeasibilityConstraint& constraint) {
  if (const auto* k = std::get_if<Knapsack>(&constraint)) return &k->weights;
  if (const auto* k = std::get_if<MultiChoiceKnapsack>(&constraint)) return &k->weights;
  return nullptr;
}

double KnapsackCapacity(const FeasibilityConstraint& constraint) {
  if (const auto* k = std::get_if<Knapsack>(&constraint)) return k->capacity;
  if (const auto* k = std::get_if<MultiChoiceKnapsack>(&constraint)) return k->capacity;
  return 0.0;
}

}  // namespace tocrs
