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

#include "tocrs/harness.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <vector>

namespace tocrs {
namespace {

TEST(Generators, DeterministicForFixedSeed) {
  AuctionParams params;
  params.n = 3;
  params.m = 4;
  params.types = 3;
  Rng a = MakeRng(5, 0);
  Rng b = MakeRng(5, 0);
  EXPECT_EQ(ToJson(GenerateAuction(params, a)), ToJson(GenerateAuction(params, b)));
  Rng c = MakeRng(6, 0);
  Rng d = MakeRng(6, 0);
  EXPECT_EQ(ToJson(GenerateProcurement(ProcurementParams{}, c)),
            ToJson(GenerateProcurement(ProcurementParams{}, d)));
}

TEST(Generators, SingleCellInstance) {
  AuctionParams params;
  params.n = 1;
  params.m = 1;
  params.types = 1;
  Rng rng = MakeRng(7, 0);
  const auto inst = GenerateAuction(params, rng);
  ASSERT_EQ(inst.type_spaces.size(), 1u);
  EXPECT_EQ(inst.type_spaces[0].size(), 1);
  EXPECT_EQ(inst.type_spaces[0].probs[0], 1.0);
  EXPECT_NO_THROW(Validate(inst));
}

TEST(Generators, KnapsackLp1AlwaysSolves) {
  Rng rng = MakeRng(8, 0);
  for (int t = 0; t < 200; ++t) {
    AuctionParams params;
    params.n = 1 + t % 4;
    params.m = 1 + t % 3;
    params.types = 1 + t % 3;
    const auto inst = GenerateAuction(params, rng);
    const auto solution = SolveLP(BuildLp1(inst));
    ASSERT_EQ(solution.status, LPStatus::kOptimal) << t;
  }
}

TEST(Generators, FeasibleProcesses) {
  Rng rng = MakeRng(9, 0);
  const char* variants[] = {"single_copy_per_item", "k_uniform_per_agent", "knapsack",
                            "multi_choice_knapsack", "vh"};
  for (int t = 0; t < 50; ++t) {
    AuctionParams params;
    params.n = 4;
    params.m = 3;
    params.variant = variants[t % 5];
    const auto constraint = GenerateConstraint(params, rng);
    const auto process = GenerateFeasibleProcess(constraint, 4, 3, 3, rng);
    EXPECT_TRUE(CheckProcessFeasibility(process, constraint).feasible) << params.variant;
  }
}

TEST(Verify, AlwaysSelectRatesAreOne) {
  Rng rng = MakeRng(10, 0);
  const KUniformPerAgent constraint{{3, 3}};
  const auto process = GenerateFeasibleProcess(constraint, 2, 3, 2, rng);
  const auto scheme = AlwaysSelectScheme(2, 3, 1.0);
  const auto report = VerifySelectability(*scheme, process, constraint, 20000, 11);
  EXPECT_DOUBLE_EQ(report.min_rate, 1.0);
  EXPECT_TRUE(report.pass);
}

TEST(Verify, StochasticKnapsackMidRegime) {
  Rng rng = MakeRng(12, 0);
  StochasticKnapsackParams params;
  params.k_star = 0.5;
  const StochasticKnapsackOcrs ocrs(GenerateStochasticKnapsack(params, rng));
  EXPECT_NEAR(ocrs.declared_c(), 1.0 / 3.0, 1e-12);
  const auto report = VerifyStochasticKnapsack(ocrs, 100000, 13);
  EXPECT_TRUE(report.pass) << report.min_rate;
  EXPECT_EQ(report.overfilled, 0);
}

TEST(Verify, ReproducibleStatistics) {
  Rng rng = MakeRng(14, 0);
  AuctionParams params;
  params.n = 3;
  params.m = 3;
  const auto constraint = GenerateConstraint(params, rng);
  const auto process = GenerateFeasibleProcess(constraint, 3, 3, 2, rng);
  const auto scheme = MakeScheme(constraint, process, 1.0);
  const auto a = VerifySelectability(*scheme, process, constraint, 5000, 15);
  const auto b = VerifySelectability(*scheme, process, constraint, 5000, 15);
  for (size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].active, b.cells[k].active);
    EXPECT_EQ(a.cells[k].selected, b.cells[k].selected);
  }
}

TEST(ParallelTrials, IndependentOfWorkerCount) {
  auto run = [] {
    return ParallelTrials(
        10007, std::vector<double>{},
        [](std::vector<double>& acc, long long t) {
          Rng rng = MakeRng(16, static_cast<std::uint64_t>(t));
          acc.push_back(Uniform01(rng));
        },
        [](std::vector<double>& into, const std::vector<double>& from) {
          into.insert(into.end(), from.begin(), from.end());
        });
  };
  setenv("TOCRS_WORKERS", "1", 1);
  const auto one = run();
  setenv("TOCRS_WORKERS", "7", 1);
  const auto seven = run();
  unsetenv("TOCRS_WORKERS");
  ASSERT_EQ(one.size(), 10007u);
  EXPECT_EQ(one, seven);
}

TEST(EndToEnd, RevenueIdentityOnTinyKnapsack) {
  Rng rng = MakeRng(17, 0);
  AuctionParams params;
  params.n = 2;
  params.m = 2;
  auto inst = GenerateAuction(params, rng);
  auto rule = SolveLp1(inst);
  const double opt = BruteForceOptimalRevenue(inst);
  const Mechanism mech(std::move(inst), std::move(rule), MechanismConfig{});
  const auto report = VerifyEndToEnd(mech, 50000, 18, opt);
  EXPECT_TRUE(report.identity_pass);
  EXPECT_EQ(report.feasibility_violations, 0);
  EXPECT_TRUE(report.pass) << report.ratio_to_opt;
}

}  // namespace
}  // namespace tocrs
