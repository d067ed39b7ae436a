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

#include "tocrs/lp.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

std::string Idx(int a) { return "[" + std::to_string(a) + "]"; }

InterimLayout MakeLayout(const std::vector<AgentTypeSpace>& spaces, int m) {
  InterimLayout layout;
  layout.m = m;
  for (const auto& s : spaces) layout.type_counts.push_back(s.size());
  return layout;
}

template <class PiObjective, class QObjective>
void AddPiAndQ(LPModel& model, const InterimLayout& layout, PiObjective pi_objective,
               QObjective q_objective) {
  const int n = static_cast<int>(layout.type_counts.size());
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < layout.type_counts[i]; ++t) {
      for (int j = 0; j < layout.m; ++j) {
        model.AddVariable("pi" + Idx(i) + Idx(t) + Idx(j), pi_objective(i, t, j), 0.0, 1.0);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < layout.type_counts[i]; ++t) {
      model.AddVariable("q" + Idx(i) + Idx(t), q_objective(i, t), -kInfinity, kInfinity);
    }
  }
}

// Adds sign * (sum_j coef_j pi[i][t][j]) to `terms`.
void AddDot(std::vector<std::pair<int, double>>& terms, const InterimLayout& layout, int i,
            int t, const std::vector<double>& coef, double sign) {
  for (int j = 0; j < layout.m; ++j) {
    if (coef[j] != 0.0) terms.emplace_back(layout.PiIndex(i, t, j), sign * coef[j]);
  }
}

std::vector<double> ClampedSolution(const LPModel& model, const LPSolution& solution,
                                    int num_pi) {
  if (solution.status != LPStatus::kOptimal ||
      static_cast<int>(solution.x.size()) != model.num_variables()) {
    throw PreconditionError("interim extraction requires an optimal solution of this model");
  }
  std::vector<double> x = solution.x;
  for (int k = 0; k < num_pi; ++k) {
    const double off = std::max(-x[k], x[k] - 1.0);
    if (off > kFeasibilityTolerance) throw ValidationError(model.names()[k], off);
    x[k] = std::clamp(x[k], 0.0, 1.0);
  }
  for (const LPRow& row : model.rows()) {
    double lhs = 0.0;
    for (const auto& [k, a] : row.terms) lhs += a * x[k];
    double residual = 0.0;
    switch (row.relation) {
      case Relation::kLessEqual: residual = lhs - row.rhs; break;
      case Relation::kGreaterEqual: residual = row.rhs - lhs; break;
      case Relation::kEqual: residual = std::abs(lhs - row.rhs); break;
    }
    if (residual > 1e-6) throw ValidationError(row.name, residual);
  }
  return x;
}

template <class Rule>
Rule Unpack(const InterimLayout& layout, const std::vector<double>& x) {
  Rule rule;
  const int n = static_cast<int>(layout.type_counts.size());
  for (int i = 0; i < n; ++i) {
    const int types = layout.type_counts[i];
    Matrix pi(types, layout.m);
    std::vector<double> q(types);
    for (int t = 0; t < types; ++t) {
      for (int j = 0; j < layout.m; ++j) pi(t, j) = x[layout.PiIndex(i, t, j)];
      q[t] = x[layout.QIndex(i, t)];
    }
    rule.pi.push_back(std::move(pi));
    rule.q.push_back(std::move(q));
  }
  return rule;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

int InterimLayout::PiIndex(int agent, int type, int item) const {
  int offset = 0;
  for (int i = 0; i < agent; ++i) offset += type_counts[i] * m;
  return offset + type * m + item;
}

int InterimLayout::QIndex(int agent, int type) const {
  int offset = num_pi();
  for (int i = 0; i < agent; ++i) offset += type_counts[i];
  return offset + type;
}

int InterimLayout::num_pi() const {
  return std::accumulate(type_counts.begin(), type_counts.end(), 0) * m;
}

int InterimLayout::num_variables() const {
  return num_pi() + std::accumulate(type_counts.begin(), type_counts.end(), 0);
}

InterimLayout LayoutFor(const AuctionInstance& instance) {
  return MakeLayout(instance.type_spaces, instance.m);
}

InterimLayout LayoutFor(const ProcurementInstance& instance) {
  return MakeLayout(instance.cost_spaces, instance.m);
}

void Validate(const ProcurementInstance& instance) {
  if (instance.n <= 0 || instance.m <= 0) {
    throw PreconditionError("procurement needs at least one seller and one service");
  }
  if (instance.values.rows() != instance.n || instance.values.cols() != instance.m) {
    throw DimensionError("buyer values must be n x m");
  }
  for (double v : instance.values.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw PreconditionError("buyer values must be finite and nonnegative");
    }
  }
  if (static_cast<int>(instance.cost_spaces.size()) != instance.n) {
    throw DimensionError("one cost distribution per seller required");
  }
  for (const auto& space : instance.cost_spaces) Validate(space, instance.m);
  if (!(instance.budget >= 0.0) || !std::isfinite(instance.budget)) {
    throw PreconditionError("budget must be finite and nonnegative");
  }
}

LPModel BuildLp1(const AuctionInstance& instance) {
  Validate(instance);
  const InterimLayout layout = LayoutFor(instance);
  LPModel model;
  AddPiAndQ(
      model, layout, [](int, int, int) { return 0.0; },
      [&](int i, int t) { return instance.type_spaces[i].probs[t]; });

  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.type_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      const auto& v = space.support[t];
      for (int r = 0; r < space.size(); ++r) {
        if (r == t) continue;
        std::vector<std::pair<int, double>> terms;
        AddDot(terms, layout, i, t, v, 1.0);
        terms.emplace_back(layout.QIndex(i, t), -1.0);
        AddDot(terms, layout, i, r, v, -1.0);
        terms.emplace_back(layout.QIndex(i, r), 1.0);
        model.AddRow("bic" + Idx(i) + Idx(t) + Idx(r), std::move(terms),
                     Relation::kGreaterEqual, 0.0);
      }
    }
    for (int t = 0; t < space.size(); ++t) {
      std::vector<std::pair<int, double>> terms;
      AddDot(terms, layout, i, t, space.support[t], 1.0);
      terms.emplace_back(layout.QIndex(i, t), -1.0);
      model.AddRow("ir" + Idx(i) + Idx(t), std::move(terms), Relation::kGreaterEqual, 0.0);
    }
  }

  for (int i = 0; i < instance.n; ++i) {
    const auto row_ineqs = RowPolytope(instance.constraint, i, instance.m);
    for (int t = 0; t < instance.type_spaces[i].size(); ++t) {
      for (const auto& ineq : row_ineqs) {
        std::vector<std::pair<int, double>> terms;
        for (const auto& [j, a] : ineq.terms) terms.emplace_back(layout.PiIndex(i, t, j), a);
        model.AddRow("row" + Idx(i) + Idx(t) + ":" + ineq.name, std::move(terms),
                     Relation::kLessEqual, ineq.rhs);
      }
    }
  }

  for (const auto& ineq : MarginalPolytope(instance.constraint, instance.n, instance.m)) {
    std::vector<std::pair<int, double>> terms;
    for (const auto& [k, a] : ineq.terms) {
      const int i = k / instance.m;
      const int j = k % instance.m;
      const AgentTypeSpace& space = instance.type_spaces[i];
      for (int t = 0; t < space.size(); ++t) {
        if (space.probs[t] * a != 0.0) {
          terms.emplace_back(layout.PiIndex(i, t, j), space.probs[t] * a);
        }
      }
    }
    model.AddRow("marginal:" + ineq.name, std::move(terms), Relation::kLessEqual, ineq.rhs);
  }
  return model;
}

LPModel BuildLp2(const ProcurementInstance& instance) {
  Validate(instance);
  const InterimLayout layout = LayoutFor(instance);
  LPModel model;
  AddPiAndQ(
      model, layout,
      [&](int i, int t, int j) { return instance.cost_spaces[i].probs[t] * instance.values(i, j); },
      [](int, int) { return 0.0; });

  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.cost_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      const auto& c = space.support[t];
      for (int r = 0; r < space.size(); ++r) {
        if (r == t) continue;
        std::vector<std::pair<int, double>> terms;
        terms.emplace_back(layout.QIndex(i, t), 1.0);
        AddDot(terms, layout, i, t, c, -1.0);
        terms.emplace_back(layout.QIndex(i, r), -1.0);
        AddDot(terms, layout, i, r, c, 1.0);
        model.AddRow("bic" + Idx(i) + Idx(t) + Idx(r), std::move(terms),
                     Relation::kGreaterEqual, 0.0);
      }
    }
    for (int t = 0; t < space.size(); ++t) {
      std::vector<std::pair<int, double>> terms;
      terms.emplace_back(layout.QIndex(i, t), 1.0);
      AddDot(terms, layout, i, t, space.support[t], -1.0);
      model.AddRow("ir" + Idx(i) + Idx(t), std::move(terms), Relation::kGreaterEqual, 0.0);
    }
  }
  std::vector<std::pair<int, double>> budget;
  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.cost_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      budget.emplace_back(layout.QIndex(i, t), space.probs[t]);
    }
  }
  model.AddRow("budget", std::move(budget), Relation::kLessEqual, instance.budget);
  for (int i = 0; i < instance.n; ++i) {
    for (int t = 0; t < instance.cost_spaces[i].size(); ++t) {
      model.AddRow("cap" + Idx(i) + Idx(t), {{layout.QIndex(i, t), 1.0}},
                   Relation::kLessEqual, instance.budget);
    }
  }

  return model;
}

InterimRule InterimFromLp1(const AuctionInstance& instance, const LPSolution& solution) {
  const InterimLayout layout = LayoutFor(instance);
  const LPModel model = BuildLp1(instance);
  const std::vector<double> x = ClampedSolution(model, solution, layout.num_pi());
  InterimRule rule = Unpack<InterimRule>(layout, x);
  rule.objective = model.Objective(x);
  const FeasibilityReport report =
      CheckProcessFeasibility(InducedProcess(instance, rule), instance.constraint, 1e-6);
  if (!report.feasible) throw ValidationError("process feasibility", report.max_violation);
  return rule;
}

ProcurementInterimRule InterimFromLp2(const ProcurementInstance& instance,
                                      const LPSolution& solution) {
  const InterimLayout layout = LayoutFor(instance);
  const LPModel model = BuildLp2(instance);
  const std::vector<double> x = ClampedSolution(model, solution, layout.num_pi());
  ProcurementInterimRule rule = Unpack<ProcurementInterimRule>(layout, x);
  rule.objective = model.Objective(x);
  return rule;
}

InterimRule SolveLp1(const AuctionInstance& instance) {
  const LPSolution solution = SolveLP(BuildLp1(instance));
  if (solution.status != LPStatus::kOptimal) {
    throw std::runtime_error(std::string("LP1 solve ended ") + LPStatusName(solution.status));
  }
  return InterimFromLp1(instance, solution);
}

ProcurementInterimRule SolveLp2(const ProcurementInstance& instance) {
  const LPSolution solution = SolveLP(BuildLp2(instance));
  if (solution.status != LPStatus::kOptimal) {
    throw std::runtime_error(std::string("LP2 solve ended ") + LPStatusName(solution.status));
  }
  return InterimFromLp2(instance, solution);
}

TwoLevelProcess InducedProcess(const AuctionInstance& instance, const InterimRule& rule) {
  TwoLevelProcess process;
  process.n = instance.n;
  process.m = instance.m;
  for (int i = 0; i < instance.n; ++i) {
    process.row_probs.push_back(instance.type_spaces[i].probs);
    process.activation.push_back(rule.pi[i]);
  }
  return process;
}

double MaxIncentiveViolation(const AuctionInstance& instance, const InterimRule& rule) {
  double worst = 0.0;
  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.type_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      const auto& v = space.support[t];
      const double truthful = Dot(v, rule.pi[i].row(t)) - rule.q[i][t];
      worst = std::max(worst, -truthful);
      for (int r = 0; r < space.size(); ++r) {
        worst = std::max(worst, Dot(v, rule.pi[i].row(r)) - rule.q[i][r] - truthful);
      }
    }
  }
  return worst;
}

double MaxIncentiveViolation(const ProcurementInstance& instance,
                             const ProcurementInterimRule& rule) {
  double worst = 0.0;
  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.cost_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      const auto& c = space.support[t];
      const double truthful = rule.q[i][t] - Dot(c, rule.pi[i].row(t));
      worst = std::max(worst, -truthful);
      for (int r = 0; r < space.size(); ++r) {
        worst = std::max(worst, rule.q[i][r] - Dot(c, rule.pi[i].row(r)) - truthful);
      }
    }
  }
  return worst;
}

double BruteForceOptimalRevenue(const AuctionInstance& instance, const OracleLimits& limits) {
  Validate(instance);
  const int n = instance.n;
  const int m = instance.m;
  if (n * m > limits.max_cells) throw TooLargeError("too many cells to enumerate allocations");
  long long profiles = 1;
  for (const auto& s : instance.type_spaces) {
    profiles *= s.size();
    if (profiles > limits.max_profiles) throw TooLargeError("too many type profiles");
  }

  std::vector<unsigned> feasible;
  for (unsigned mask = 0; mask < (1u << (n * m)); ++mask) {
    std::vector<Cell> cells;
    for (int k = 0; k < n * m; ++k) {
      if (mask >> k & 1u) cells.push_back({k / m, k % m});
    }
    if (IsFeasibleSet(instance.constraint, n, m, cells)) feasible.push_back(mask);
  }

  // Type profiles in mixed radix, agent 0 least significant.
  std::vector<std::vector<int>> profile_types(profiles, std::vector<int>(n));
  for (long long p = 0; p < profiles; ++p) {
    long long rest = p;
    for (int i = 0; i < n; ++i) {
      const int size = instance.type_spaces[i].size();
      profile_types[p][i] = static_cast<int>(rest % size);
      rest /= size;
    }
  }

  LPModel model;
  const InterimLayout layout = LayoutFor(instance);
  std::vector<int> q_index(layout.num_variables());
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < instance.type_spaces[i].size(); ++t) {
      q_index[layout.QIndex(i, t)] = model.AddVariable(
          "q" + Idx(i) + Idx(t), instance.type_spaces[i].probs[t], -kInfinity, kInfinity);
    }
  }

  // Row bookkeeping: (agent, true type, report) -> accumulated y-coefficients.
  std::map<std::tuple<int, int, int>, std::vector<std::pair<int, double>>> value_terms;
  for (long long p = 0; p < profiles; ++p) {
    std::vector<std::pair<int, double>> simplex_row;
    for (unsigned mask : feasible) {
      const int y = model.AddVariable("y" + Idx(static_cast<int>(p)) + Idx(static_cast<int>(mask)),
                                      0.0, 0.0, kInfinity);
      simplex_row.emplace_back(y, 1.0);
      for (int i = 0; i < n; ++i) {
        const AgentTypeSpace& space = instance.type_spaces[i];
        const int report = profile_types[p][i];
        double others = 1.0;
        for (int k = 0; k < n; ++k) {
          if (k != i) others *= instance.type_spaces[k].probs[profile_types[p][k]];
        }
        if (others == 0.0) continue;
        for (int t = 0; t < space.size(); ++t) {
          double value = 0.0;
          for (int j = 0; j < m; ++j) {
            if (mask >> (i * m + j) & 1u) value += space.support[t][j];
          }
          if (value != 0.0) value_terms[{i, t, report}].emplace_back(y, others * value);
        }
      }
    }
    model.AddRow("profile" + Idx(static_cast<int>(p)), std::move(simplex_row), Relation::kEqual,
                 1.0);
  }

  for (int i = 0; i < n; ++i) {
    const AgentTypeSpace& space = instance.type_spaces[i];
    for (int t = 0; t < space.size(); ++t) {
      const auto& truthful = value_terms[{i, t, t}];
      for (int r = 0; r < space.size(); ++r) {
        if (r == t) continue;
        std::vector<std::pair<int, double>> terms = truthful;
        terms.emplace_back(q_index[layout.QIndex(i, t)], -1.0);
        for (const auto& [k, a] : value_terms[{i, t, r}]) terms.emplace_back(k, -a);
        terms.emplace_back(q_index[layout.QIndex(i, r)], 1.0);
        model.AddRow("bic" + Idx(i) + Idx(t) + Idx(r), std::move(terms),
                     Relation::kGreaterEqual, 0.0);
      }
      std::vector<std::pair<int, double>> terms = truthful;
      terms.emplace_back(q_index[layout.QIndex(i, t)], -1.0);
      model.AddRow("ir" + Idx(i) + Idx(t), std::move(terms), Relation::kGreaterEqual, 0.0);
    }
  }

  const LPSolution solution = SolveLP(model);
  if (solution.status != LPStatus::kOptimal) {
    throw std::runtime_error(std::string("oracle LP ended ") + LPStatusName(solution.status));
  }
  return solution.objective;
}

}  // namespace tocrs
