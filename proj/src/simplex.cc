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

#include "tocrs/simplex.h"

#include <algorithm>
#include <cmath>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

using SparseColumn = std::vector<std::pair<int, double>>;

enum class ColumnKind { kStructural, kSlack, kArtificial };

// Equality-form program  min cost^T s  s.t.  A s = b, s >= 0, b >= 0.
struct StandardForm {
  int rows = 0;
  std::vector<SparseColumn> columns;
  std::vector<ColumnKind> kind;
  std::vector<double> cost;
  std::vector<double> b;
  std::vector<int> initial_basis;
  // x_k = offset[k] + sum over (column, sign) in terms[k].
  std::vector<double> offset;
  std::vector<std::vector<std::pair<int, double>>> terms;
};

StandardForm ToStandardForm(const LPModel& model) {
  StandardForm sf;
  const int n = model.num_variables();
  sf.offset.assign(n, 0.0);
  sf.terms.resize(n);

  struct PendingRow {
    std::vector<std::pair<int, double>> coef;  // over standard columns
    Relation relation;
    double rhs;
  };
  std::vector<PendingRow> pending;

  auto new_column = [&](ColumnKind kind, double cost) {
    sf.columns.emplace_back();
    sf.kind.push_back(kind);
    sf.cost.push_back(cost);
    return static_cast<int>(sf.columns.size()) - 1;
  };

  for (int k = 0; k < n; ++k) {
    const double lo = model.lower()[k];
    const double hi = model.upper()[k];
    const double c = model.objective()[k];
    if (std::isfinite(lo)) {
      const int s = new_column(ColumnKind::kStructural, -c);
      sf.offset[k] = lo;
      sf.terms[k].emplace_back(s, 1.0);
      if (std::isfinite(hi)) {
        pending.push_back({{{s, 1.0}}, Relation::kLessEqual, hi - lo});
      }
    } else if (std::isfinite(hi)) {
      const int s = new_column(ColumnKind::kStructural, c);
      sf.offset[k] = hi;
      sf.terms[k].emplace_back(s, -1.0);
    } else {
      const int plus = new_column(ColumnKind::kStructural, -c);
      const int minus = new_column(ColumnKind::kStructural, c);
      sf.terms[k].emplace_back(plus, 1.0);
      sf.terms[k].emplace_back(minus, -1.0);
    }
  }

  std::vector<PendingRow> all;
  all.reserve(model.rows().size() + pending.size());
  for (const LPRow& row : model.rows()) {
    PendingRow pr{{}, row.relation, row.rhs};
    for (const auto& [k, a] : row.terms) {
      if (a == 0.0) continue;
      pr.rhs -= a * sf.offset[k];
      for (const auto& [s, sign] : sf.terms[k]) pr.coef.emplace_back(s, a * sign);
    }
    all.push_back(std::move(pr));
  }
  for (auto& pr : pending) all.push_back(std::move(pr));

  sf.rows = static_cast<int>(all.size());
  sf.b.resize(sf.rows);
  sf.initial_basis.resize(sf.rows);
  for (int r = 0; r < sf.rows; ++r) {
    PendingRow& pr = all[r];
    bool negate = false;
    bool needs_artificial = false;
    double slack_sign = 0.0;
    switch (pr.relation) {
      case Relation::kLessEqual:
        if (pr.rhs >= 0.0) {
          slack_sign = 1.0;
        } else {
          negate = true;
          slack_sign = -1.0;
          needs_artificial = true;
        }
        break;
      case Relation::kGreaterEqual:
        if (pr.rhs <= 0.0) {
          negate = true;
          slack_sign = 1.0;
        } else {
          slack_sign = -1.0;
          needs_artificial = true;
        }
        break;
      case Relation::kEqual:
        negate = pr.rhs < 0.0;
        needs_artificial = true;
        break;
    }
    const double sign = negate ? -1.0 : 1.0;
    for (const auto& [s, a] : pr.coef) sf.columns[s].emplace_back(r, sign * a);
    sf.b[r] = sign * pr.rhs;
    if (slack_sign != 0.0) {
      const int s = new_column(ColumnKind::kSlack, 0.0);
      sf.columns[s].emplace_back(r, slack_sign);
      if (!needs_artificial) sf.initial_basis[r] = s;
    }
    if (needs_artificial) {
      const int a = new_column(ColumnKind::kArtificial, 0.0);
      sf.columns[a].emplace_back(r, 1.0);
      sf.initial_basis[r] = a;
    }
  }
  // Merge duplicate (row, column) entries produced by repeated variables.
  for (SparseColumn& col : sf.columns) {
    std::sort(col.begin(), col.end());
    SparseColumn merged;
    for (const auto& e : col) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
    col = std::move(merged);
  }
  return sf;
}

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const SimplexOptions& options)
      : sf_(sf),
        options_(options),
        m_(sf.rows),
        basis_(sf.initial_basis),
        in_basis_(sf.columns.size(), 0),
        binv_(static_cast<size_t>(m_) * m_, 0.0),
        xb_(sf.b) {
    for (int r = 0; r < m_; ++r) {
      binv_[Index(r, r)] = 1.0;
      in_basis_[basis_[r]] = 1;
    }
  }

  // Minimizes cost over columns whose `allowed` flag is set.
  LPStatus Run(const std::vector<double>& cost, const std::vector<char>& allowed) {
    std::vector<double> y(m_);
    std::vector<double> u(m_);
    while (true) {
      if (iterations_ >= options_.max_iterations) return LPStatus::kIterationLimit;

      std::fill(y.begin(), y.end(), 0.0);
      for (int r = 0; r < m_; ++r) {
        const double cb = cost[basis_[r]];
        if (cb == 0.0) continue;
        const double* row = &binv_[Index(r, 0)];
        for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
      }

      int entering = -1;
      double best = -options_.tolerance;
      const int num_cols = static_cast<int>(sf_.columns.size());
      for (int j = 0; j < num_cols; ++j) {
        if (in_basis_[j] || !allowed[j]) continue;
        double d = cost[j];
        for (const auto& [r, a] : sf_.columns[j]) d -= y[r] * a;
        if (d < best) {
          entering = j;
          if (bland_) break;
          best = d;
        }
      }
      if (entering < 0) return LPStatus::kOptimal;

      ComputeColumn(entering, u);
      int leave = -1;
      double theta = kInfinity;
      for (int r = 0; r < m_; ++r) {
        if (u[r] <= options_.tolerance) continue;
        const double ratio = std::max(xb_[r], 0.0) / u[r];
        if (leave < 0 || ratio < theta - 1e-12) {
          leave = r;
          theta = ratio;
        } else if (ratio <= theta + 1e-12 && basis_[r] < basis_[leave]) {
          leave = r;
          theta = std::min(theta, ratio);
        }
      }
      if (leave < 0) return LPStatus::kUnbounded;
      theta = std::max(xb_[leave], 0.0) / u[leave];

      if (theta <= options_.tolerance) {
        if (++degenerate_run_ >= options_.degenerate_switch) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }
      Pivot(leave, entering, u, theta);
    }
  }

  // Pivots basic artificial columns out of the basis where possible.
  void DriveOutArtificials() {
    std::vector<double> u(m_);
    const int num_cols = static_cast<int>(sf_.columns.size());
    for (int r = 0; r < m_; ++r) {
      if (sf_.kind[basis_[r]] != ColumnKind::kArtificial) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < num_cols; ++j) {
        if (in_basis_[j] || sf_.kind[j] == ColumnKind::kArtificial) continue;
        double v = 0.0;
        for (const auto& [k, a] : sf_.columns[j]) v += binv_[Index(r, k)] * a;
        if (std::abs(v) > best_abs) {
          best_abs = std::abs(v);
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at zero
      ComputeColumn(best, u);
      Pivot(r, best, u, xb_[r] / u[r]);
    }
  }

  void Refactor() {
    std::vector<double> a(static_cast<size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      for (const auto& [k, v] : sf_.columns[basis_[r]]) a[Index(k, r)] = v;
    }
    std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) inv[Index(r, r)] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      for (int r = col + 1; r < m_; ++r) {
        if (std::abs(a[Index(r, col)]) > std::abs(a[Index(piv, col)])) piv = r;
      }
      if (std::abs(a[Index(piv, col)]) < 1e-14) return;  // keep product-form inverse
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(a[Index(piv, k)], a[Index(col, k)]);
          std::swap(inv[Index(piv, k)], inv[Index(col, k)]);
        }
      }
      const double p = a[Index(col, col)];
      for (int k = 0; k < m_; ++k) {
        a[Index(col, k)] /= p;
        inv[Index(col, k)] /= p;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = a[Index(r, col)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          a[Index(r, k)] -= f * a[Index(col, k)];
          inv[Index(r, k)] -= f * inv[Index(col, k)];
        }
      }
    }
    binv_ = std::move(inv);
    for (int r = 0; r < m_; ++r) {
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += binv_[Index(r, k)] * sf_.b[k];
      xb_[r] = v;
    }
  }

  std::vector<double> Values() const {
    std::vector<double> s(sf_.columns.size(), 0.0);
    for (int r = 0; r < m_; ++r) s[basis_[r]] = xb_[r];
    return s;
  }

  int iterations() const { return iterations_; }
  bool bland() const { return bland_; }

 private:
  size_t Index(int r, int c) const { return static_cast<size_t>(r) * m_ + c; }

  void ComputeColumn(int j, std::vector<double>& u) const {
    std::fill(u.begin(), u.end(), 0.0);
    for (const auto& [k, a] : sf_.columns[j]) {
      for (int r = 0; r < m_; ++r) u[r] += binv_[Index(r, k)] * a;
    }
  }

  void Pivot(int leave, int entering, const std::vector<double>& u, double theta) {
    for (int r = 0; r < m_; ++r) {
      if (r != leave) xb_[r] -= theta * u[r];
    }
    xb_[leave] = theta;
    double* prow = &binv_[Index(leave, 0)];
    const double p = u[leave];
    for (int k = 0; k < m_; ++k) prow[k] /= p;
    for (int r = 0; r < m_; ++r) {
      if (r == leave || u[r] == 0.0) continue;
      double* row = &binv_[Index(r, 0)];
      const double f = u[r];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    in_basis_[basis_[leave]] = 0;
    in_basis_[entering] = 1;
    basis_[leave] = entering;
    if (++iterations_ % options_.refactor_period == 0) Refactor();
  }

  const StandardForm& sf_;
  SimplexOptions options_;
  int m_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  int iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
};

}  // namespace

int LPModel::AddVariable(std::string name, double objective, double lower, double upper) {
  if (!std::isfinite(objective)) throw PreconditionError("objective must be finite");
  if (lower > upper) throw PreconditionError("variable bounds cross for " + name);
  names_.push_back(std::move(name));
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return num_variables() - 1;
}

int LPModel::AddRow(std::string name, std::vector<std::pair<int, double>> terms,
                    Relation relation, double rhs) {
  if (!std::isfinite(rhs)) throw PreconditionError("row rhs must be finite: " + name);
  for (const auto& [k, a] : terms) {
    if (k < 0 || k >= num_variables()) throw DimensionError("row references unknown variable");
    if (!std::isfinite(a)) throw PreconditionError("row coefficient must be finite");
  }
  rows_.push_back({std::move(name), std::move(terms), relation, rhs});
  return num_rows() - 1;
}

int LPModel::FindRow(const std::string& name) const {
  for (int r = 0; r < num_rows(); ++r) {
    if (rows_[r].name == name) return r;
  }
  return -1;
}

double LPModel::MaxResidual(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int k = 0; k < num_variables(); ++k) {
    worst = std::max({worst, lower_[k] - x[k], x[k] - upper_[k]});
  }
  for (const LPRow& row : rows_) {
    double lhs = 0.0;
    for (const auto& [k, a] : row.terms) lhs += a * x[k];
    switch (row.relation) {
      case Relation::kLessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::kGreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::kEqual: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

double LPModel::Objective(const std::vector<double>& x) const {
  double v = 0.0;
  for (int k = 0; k < num_variables(); ++k) v += objective_[k] * x[k];
  return v;
}

const char* LPStatusName(LPStatus status) {
  switch (status) {
    case LPStatus::kOptimal: return "optimal";
    case LPStatus::kInfeasible: return "infeasible";
    case LPStatus::kUnbounded: return "unbounded";
    case LPStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

LPSolution SolveLP(const LPModel& model, const SimplexOptions& options) {
  const StandardForm sf = ToStandardForm(model);
  LPSolution solution;
  const int num_cols = static_cast<int>(sf.columns.size());

  RevisedSimplex simplex(sf, options);
  std::vector<double> phase1(num_cols, 0.0);
  bool any_artificial = false;
  for (int j = 0; j < num_cols; ++j) {
    if (sf.kind[j] == ColumnKind::kArtificial) {
      phase1[j] = 1.0;
      any_artificial = true;
    }
  }
  std::vector<char> allowed(num_cols, 1);
  if (any_artificial) {
    const LPStatus status = simplex.Run(phase1, allowed);
    solution.iterations = simplex.iterations();
    solution.used_bland = simplex.bland();
    if (status == LPStatus::kIterationLimit) {
      solution.status = status;
      return solution;
    }
    simplex.Refactor();
    const std::vector<double> s = simplex.Values();
    double infeasibility = 0.0;
    double scale = 1.0;
    for (double v : sf.b) scale = std::max(scale, std::abs(v));
    for (int j = 0; j < num_cols; ++j) {
      if (sf.kind[j] == ColumnKind::kArtificial) infeasibility += std::abs(s[j]);
    }
    if (infeasibility > 1e-8 * scale) {
      solution.status = LPStatus::kInfeasible;
      return solution;
    }
    simplex.DriveOutArtificials();
    for (int j = 0; j < num_cols; ++j) {
      if (sf.kind[j] == ColumnKind::kArtificial) allowed[j] = 0;
    }
  }
  std::vector<double> phase2 = sf.cost;
  for (int j = 0; j < num_cols; ++j) {
    if (sf.kind[j] == ColumnKind::kArtificial) phase2[j] = 0.0;
  }
  const LPStatus status = simplex.Run(phase2, allowed);
  solution.iterations = simplex.iterations();
  solution.used_bland = simplex.bland();
  solution.status = status;
  if (status != LPStatus::kOptimal) return solution;

  simplex.Refactor();
  std::vector<double> s = simplex.Values();
  for (double& v : s) {
    if (v < 0.0 && v > -options.tolerance) v = 0.0;
  }
  solution.x.assign(model.num_variables(), 0.0);
  for (int k = 0; k < model.num_variables(); ++k) {
    double v = sf.offset[k];
    for (const auto& [col, sign] : sf.terms[k]) v += sign * s[col];
    solution.x[k] = v;
  }
  solution.objective = model.Objective(solution.x);
  return solution;
}

}  // namespace tocrs
