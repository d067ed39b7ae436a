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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "tocrs/random.h"

namespace tocrs {
namespace {

// Best objective over all basic solutions of a small bounded model, found by
// solving every square subsystem of tight constraints.
std::optional<double> VertexOracle(const LPModel& model) {
  const int n = model.num_variables();
  std::vector<Eigen::VectorXd> a;
  std::vector<double> rhs;
  for (const auto& row : model.rows()) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (const auto& [j, c] : row.terms) v[j] += c;
    a.push_back(v);
    rhs.push_back(row.rhs);
  }
  for (int j = 0; j < n; ++j) {
    for (double bound : {model.lower()[j], model.upper()[j]}) {
      if (!std::isfinite(bound)) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v[j] = 1.0;
      a.push_back(v);
      rhs.push_back(bound);
    }
  }
  const int k = static_cast<int>(a.size());
  std::optional<double> best;
  std::vector<int> pick(n);
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == n) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd r(n);
      for (int s = 0; s < n; ++s) {
        m.row(s) = a[pick[s]].transpose();
        r[s] = rhs[pick[s]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      std::vector<double> xs(x.data(), x.data() + n);
      if (model.MaxResidual(xs) > 1e-7) return;
      const double obj = model.Objective(xs);
      if (!best || obj > *best) best = obj;
      return;
    }
    for (int s = start; s < k; ++s) {
      pick[depth] = s;
      self(self, s + 1, depth + 1);
    }
  };
  visit(visit, 0, 0);
  return best;
}

TEST(SolveLP, SingleBound) {
  LPModel model;
  const int x = model.AddVariable("x", 1.0);
  model.AddRow("cap", {{x, 1.0}}, Relation::kLessEqual, 1.0);
  const auto sol = SolveLP(model);
  ASSERT_EQ(sol.status, LPStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
}

TEST(SolveLP, Infeasible) {
  LPModel model;
  const int x = model.AddVariable("x", 1.0);
  model.AddRow("lo", {{x, 1.0}}, Relation::kGreaterEqual, 2.0);
  model.AddRow("hi", {{x, 1.0}}, Relation::kLessEqual, 1.0);
  EXPECT_EQ(SolveLP(model).status, LPStatus::kInfeasible);
}

TEST(SolveLP, Unbounded) {
  LPModel model;
  const int x = model.AddVariable("x", 1.0);
  const int y = model.AddVariable("y", 0.0);
  model.AddRow("diff", {{x, 1.0}, {y, -1.0}}, Relation::kLessEqual, 1.0);
  EXPECT_EQ(SolveLP(model).status, LPStatus::kUnbounded);
}

TEST(SolveLP, RedundantEqualities) {
  LPModel model;
  const int x = model.AddVariable("x", 1.0, 0.0, 1.0);
  const int y = model.AddVariable("y", 2.0, 0.0, 1.0);
  const int z = model.AddVariable("z", -1.0, 0.0, 1.0);
  model.AddRow("e1", {{x, 1.0}, {y, 1.0}, {z, 1.0}}, Relation::kEqual, 1.0);
  model.AddRow("e2", {{x, 2.0}, {y, 2.0}, {z, 2.0}}, Relation::kEqual, 2.0);
  model.AddRow("e3", {{x, 1.0}, {y, 1.0}, {z, 1.0}}, Relation::kEqual, 1.0);
  model.AddRow("d1", {{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 1.0);
  model.AddRow("d2", {{y, 1.0}, {z, 1.0}}, Relation::kLessEqual, 1.0);
  const auto sol = SolveLP(model);
  ASSERT_EQ(sol.status, LPStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-9);
  EXPECT_LE(model.MaxResidual(sol.x), 1e-9);
}

TEST(SolveLP, MatchesVertexEnumeration) {
  Rng rng = MakeRng(99, 0);
  int bland = 0;
  for (int trial = 0; trial < 150; ++trial) {
    LPModel model;
    const int n = 2 + static_cast<int>(rng() % 4);
    for (int j = 0; j < n; ++j) {
      model.AddVariable("x" + std::to_string(j), std::round(Uniform01(rng) * 6 - 2), 0.0, 3.0);
    }
    const int rows = 1 + static_cast<int>(rng() % 5);
    for (int r = 0; r < rows; ++r) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j) {
        const double c = std::round(Uniform01(rng) * 4 - 1);
        if (c != 0.0) terms.emplace_back(j, c);
      }
      const auto rel = r % 4 == 3 ? Relation::kGreaterEqual : Relation::kLessEqual;
      const double rhs = rel == Relation::kGreaterEqual ? 0.0 : std::round(Uniform01(rng) * 3);
      model.AddRow("r" + std::to_string(r), terms, rel, rhs);
      if (trial % 3 == 0) model.AddRow("dup" + std::to_string(r), terms, rel, rhs);
    }
    const auto oracle = VertexOracle(model);
    const auto sol = SolveLP(model);
    bland += sol.used_bland;
    if (!oracle) {
      EXPECT_EQ(sol.status, LPStatus::kInfeasible) << trial;
      continue;
    }
    ASSERT_EQ(sol.status, LPStatus::kOptimal) << trial;
    EXPECT_NEAR(sol.objective, *oracle, 1e-7) << trial;
    EXPECT_LE(model.MaxResidual(sol.x), 1e-7) << trial;
  }
  RecordProperty("bland_switches", bland);
}

TEST(SolveLP, Deterministic) {
  LPModel model;
  for (int j = 0; j < 6; ++j) model.AddVariable("x" + std::to_string(j), 1.0, 0.0, 1.0);
  model.AddRow("sum", {{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}}, Relation::kLessEqual, 2.5);
  model.AddRow("pair", {{0, 1}, {5, 1}}, Relation::kLessEqual, 1.0);
  const auto a = SolveLP(model);
  const auto b = SolveLP(model);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_NEAR(a.objective, 2.5, 1e-12);
}

}  // namespace
}  // namespace tocrs
