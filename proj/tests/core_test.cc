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

#include <gtest/gtest.h>

#include <vector>

#include "tocrs/errors.h"
#include "tocrs/harness.h"
#include "test_util.h"

namespace tocrs {
namespace {

using testing::MakeMatrix;
using testing::Sigma;
using testing::SingleTypeProcess;

TEST(IsFeasibleSet, KnapsackOverCapacity) {
  Knapsack k{MakeMatrix({{6, 6}}), 10.0};
  std::vector<Cell> cells = {{0, 0}, {0, 1}};
  EXPECT_FALSE(IsFeasibleSet(k, 1, 2, cells));
  cells.pop_back();
  EXPECT_TRUE(IsFeasibleSet(k, 1, 2, cells));
}

TEST(IsFeasibleSet, EmptySetAlwaysFeasible) {
  const std::vector<FeasibilityConstraint> all = {
      SingleCopyPerItem{}, KUniformPerAgent{{1, 1}},
      Knapsack{MakeMatrix({{1, 1}, {1, 1}}), 1.0},
      MultiChoiceKnapsack{MakeMatrix({{1, 1}, {1, 1}}), 1.0},
      VerticalHorizontal{{1, 1}, {1, 1}}};
  for (const auto& c : all) EXPECT_TRUE(IsFeasibleSet(c, 2, 2, {})) << VariantName(c);
}

TEST(IsFeasibleSet, MultiChoiceOnePerRow) {
  MultiChoiceKnapsack mc{MakeMatrix({{1, 1}}), 10.0};
  const std::vector<Cell> cells = {{0, 0}, {0, 1}};
  EXPECT_FALSE(IsFeasibleSet(mc, 1, 2, cells));
}

TEST(IsFeasibleSet, VhCaps) {
  VerticalHorizontal vh{{2, 1}, {1, 1, 1}};
  std::vector<Cell> cells = {{0, 0}, {0, 1}};
  EXPECT_TRUE(IsFeasibleSet(vh, 2, 3, cells));
  cells.push_back({1, 1});
  EXPECT_FALSE(IsFeasibleSet(vh, 2, 3, cells));
  EXPECT_THROW(IsFeasibleSet(vh, 2, 3, std::vector<Cell>{{2, 0}}), DimensionError);
}

TEST(IsFeasibleSet, DownwardClosed) {
  Rng rng = MakeRng(7, 0);
  const char* variants[] = {"single_copy_per_item", "k_uniform_per_agent", "knapsack",
                            "multi_choice_knapsack", "vh"};
  int checked = 0;
  for (int trial = 0; checked < 1000 && trial < 100000; ++trial) {
    AuctionParams params;
    params.n = 3;
    params.m = 3;
    params.variant = variants[trial % 5];
    params.k = 2;
    params.col_cap = 2;
    params.weight_lo = 0.05;
    params.weight_hi = 0.6;
    const auto constraint = GenerateConstraint(params, rng);
    std::vector<Cell> cells;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (Flip(rng, 0.35)) cells.push_back({i, j});
      }
    }
    if (cells.empty() || !IsFeasibleSet(constraint, 3, 3, cells)) continue;
    ++checked;
    for (size_t drop = 0; drop < cells.size(); ++drop) {
      auto subset = cells;
      subset.erase(subset.begin() + static_cast<long>(drop));
      ASSERT_TRUE(IsFeasibleSet(constraint, 3, 3, subset)) << params.variant;
    }
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Validate, RejectsBadShapes) {
  AgentTypeSpace space{{{1.0, 2.0}}, {1.0}};
  EXPECT_NO_THROW(Validate(space, 2));
  EXPECT_THROW(Validate(space, 3), DimensionError);
  space.probs = {0.5};
  EXPECT_THROW(Validate(space, 2), PreconditionError);
  EXPECT_THROW(Validate(Knapsack{MakeMatrix({{1, 2}}), 1.0}, 1, 2), PreconditionError);
  EXPECT_THROW(Validate(KUniformPerAgent{{1}}, 2, 2), DimensionError);
}

TEST(CheckProcessFeasibility, KnapsackBoundary) {
  const auto p = SingleTypeProcess({{1.0}});
  const auto report = CheckProcessFeasibility(p, Knapsack{MakeMatrix({{1}}), 1.0});
  EXPECT_TRUE(report.feasible);
  double min_slack = 1e9;
  for (const auto& e : report.entries) {
    if (e.name.rfind("marginal:", 0) == 0) min_slack = std::min(min_slack, e.slack());
  }
  EXPECT_NEAR(min_slack, 0.0, 1e-12);
}

TEST(CheckProcessFeasibility, KnapsackViolation) {
  const auto p = SingleTypeProcess({{0.6}, {0.6}});
  const auto report = CheckProcessFeasibility(p, Knapsack{MakeMatrix({{1}, {1}}), 1.0});
  EXPECT_FALSE(report.feasible);
  EXPECT_NEAR(report.max_violation, 0.2, 1e-12);
}

TEST(CheckProcessFeasibility, RowTypesAreCheckedSeparately) {
  TwoLevelProcess p;
  p.n = 1;
  p.m = 2;
  p.row_probs = {{0.5, 0.5}};
  p.activation = {MakeMatrix({{1.0, 1.0}, {0.0, 0.0}})};
  // Marginals are 1/2 each, but type 0 violates the row cap.
  const auto report = CheckProcessFeasibility(p, KUniformPerAgent{{1}});
  EXPECT_FALSE(report.feasible);
  EXPECT_NEAR(report.max_violation, 1.0, 1e-12);
}

TEST(SampleActiveSet, ZeroActivation) {
  const auto p = SingleTypeProcess({{0, 0}, {0, 0}});
  Rng rng = MakeRng(1, 0);
  for (int t = 0; t < 1000; ++t) EXPECT_EQ(SampleActiveSet(p, 1.0, rng).count(), 0);
}

TEST(SampleActiveSet, DeterministicActivation) {
  const auto p = SingleTypeProcess({{1.0}});
  Rng rng = MakeRng(2, 0);
  for (int t = 0; t < 1000; ++t) EXPECT_TRUE(SampleActiveSet(p, 1.0, rng).active(0, 0));
}

TEST(SampleActiveSet, RateMatchesBernoulliLaw) {
  const auto p = SingleTypeProcess({{0.5}});
  Rng rng = MakeRng(3, 0);
  const int trials = 100000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += SampleActiveSet(p, 1.0, rng).active(0, 0);
  EXPECT_NEAR(hits / double(trials), 0.5, 0.01);
}

TEST(SampleActiveSet, BScalingAndRowIndependence) {
  TwoLevelProcess p;
  p.n = 2;
  p.m = 2;
  p.row_probs = {{0.3, 0.7}, {0.5, 0.5}};
  p.activation = {MakeMatrix({{0.9, 0.1}, {0.2, 0.6}}), MakeMatrix({{0.4, 0.8}, {1.0, 0.0}})};
  const double b = 0.6;
  const Matrix w = p.Marginals();
  Rng rng = MakeRng(4, 0);
  const int trials = 100000;
  std::vector<long long> hits(4, 0);
  long long both = 0;
  for (int t = 0; t < trials; ++t) {
    const auto s = SampleActiveSet(p, b, rng);
    for (int k = 0; k < 4; ++k) hits[k] += s.bits[k];
    both += s.active(0, 0) && s.active(1, 1);
  }
  for (int k = 0; k < 4; ++k) {
    const double expected = b * w.data()[k];
    EXPECT_NEAR(hits[k] / double(trials), expected, 3 * Sigma(expected, trials)) << k;
  }
  const double p00 = hits[0] / double(trials);
  const double p11 = hits[3] / double(trials);
  const double cov = both / double(trials) - p00 * p11;
  const double sd = std::sqrt(p00 * (1 - p00) * p11 * (1 - p11) / trials);
  EXPECT_LT(std::abs(cov), 3 * sd + 1e-12);
}

TEST(Polytopes, MarginalRowsForSingleCopy) {
  const auto rows = MarginalPolytope(SingleCopyPerItem{}, 2, 3);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.terms.size(), 2u);
    EXPECT_DOUBLE_EQ(r.rhs, 1.0);
  }
  EXPECT_TRUE(RowPolytope(SingleCopyPerItem{}, 0, 3).empty());
}

}  // namespace
}  // namespace tocrs
