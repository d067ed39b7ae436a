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

#include "tocrs/schemes.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tocrs/errors.h"
#include "tocrs/harness.h"
#include "test_util.h"

namespace tocrs {
namespace {

using testing::MakeMatrix;
using testing::Sigma;
using testing::SingleTypeProcess;

struct KnapsackCase {
  Knapsack constraint;
  TwoLevelProcess process;
};

KnapsackCase RandomKnapsack(int n, int m, int types, std::uint64_t seed) {
  Rng rng = MakeRng(seed, 0);
  AuctionParams params;
  params.n = n;
  params.m = m;
  params.variant = "knapsack";
  const auto constraint = GenerateConstraint(params, rng);
  return {std::get<Knapsack>(constraint), GenerateFeasibleProcess(constraint, n, m, types, rng)};
}

TEST(Estimator, SampleCount) {
  EXPECT_EQ(EstimatorSampleCount(0.1, 0.01, 4), 335);
  EXPECT_EQ(EventEstimator(0.1, 0.01, 4).samples(), 335);
  EXPECT_THROW(EstimatorSampleCount(0.0, 0.01, 4), PreconditionError);
}

TEST(Estimator, CertainEvent) {
  EventEstimator est(0.1, 0.01, 4);
  Rng rng = MakeRng(1, 0);
  EXPECT_EQ(est.Estimate([](Rng&) { return true; }, rng), 1.0);
  EXPECT_EQ(est.Estimate([](Rng&) { return false; }, rng), 0.0);
}

TEST(AlwaysSelect, SelectsEveryActiveElement) {
  const auto p = SingleTypeProcess({{0.5, 0.3}, {0.9, 0.1}});
  auto scheme = AlwaysSelectScheme(2, 2, 1.0);
  const auto report =
      VerifySelectability(*scheme, p, KUniformPerAgent{{2, 2}}, 20000, 2, {4.0, 100});
  for (const auto& cell : report.cells) EXPECT_EQ(cell.selected, cell.active);
  EXPECT_DOUBLE_EQ(report.min_rate, 1.0);
}

TEST(ComposeVh, UnconstrainedSidesSelectEverything) {
  std::vector<std::unique_ptr<SliceOcrs>> rows, cols;
  for (int i = 0; i < 2; ++i) rows.push_back(UnconstrainedSliceOcrs(1.0));
  for (int j = 0; j < 3; ++j) cols.push_back(UnconstrainedSliceOcrs(1.0));
  auto scheme = ComposeVh(std::move(rows), std::move(cols));
  EXPECT_DOUBLE_EQ(scheme->declared_c(), 1.0);
  const auto p = SingleTypeProcess({{0.5, 0.5, 0.5}, {0.2, 0.7, 1.0}});
  const auto report =
      VerifySelectability(*scheme, p, VerticalHorizontal{{3, 3}, {2, 2, 2}}, 20000, 3);
  for (const auto& cell : report.cells) EXPECT_EQ(cell.selected, cell.active);
}

TEST(VhScheme, AlwaysFeasibleAndSelectable) {
  Rng rng = MakeRng(4, 0);
  const VerticalHorizontal vh{{2, 1, 2}, {1, 2, 1}};
  const auto process = GenerateFeasibleProcess(vh, 3, 3, 2, rng);
  auto scheme = VhScheme(1.0, vh, process);
  const auto report = VerifySelectability(*scheme, process, vh, 100000, 5);
  EXPECT_EQ(report.feasibility_violations, 0);
  EXPECT_EQ(report.failing_cells, 0);
  EXPECT_TRUE(report.pass);
}

// Pr[element i selected | active] for the single-copy column rule, by exhaustive
// enumeration of activation patterns and selection coins with the closed-form
// availabilities a_i = 1 - b c sum_{i' < i} w_{i'}.
std::vector<double> ColumnOracle(double b, const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  const double c = 1.0 / (1.0 + b);
  std::vector<double> avail(n);
  double prefix = 0.0;
  for (int i = 0; i < n; ++i) {
    avail[i] = 1.0 - b * c * prefix;
    prefix += w[i];
  }
  std::vector<double> selected(n, 0.0);
  for (int mask = 0; mask < (1 << n); ++mask) {
    double pr = 1.0;
    for (int i = 0; i < n; ++i) pr *= (mask >> i & 1) ? b * w[i] : 1.0 - b * w[i];
    double free = 1.0;  // probability nothing is taken yet along this pattern
    for (int i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      const double take = free * c / avail[i];
      selected[i] += pr * take;
      free -= take;
    }
  }
  for (int i = 0; i < n; ++i) selected[i] /= b * w[i];
  return selected;
}

TEST(SingleCopyColumn, ClosedFormMatchesEnumeration) {
  for (double b : {1.0, 0.5, 0.2}) {
    for (const auto& w : std::vector<std::vector<double>>{
             {0.25, 0.25, 0.25, 0.25}, {0.7, 0.3}, {0.1, 0.5, 0.2}, {1.0}}) {
      for (double rate : ColumnOracle(b, w)) EXPECT_NEAR(rate, 1.0 / (1.0 + b), 1e-12);
    }
  }
}

TEST(SingleCopyColumn, MonteCarloRate) {
  const std::vector<double> w = {0.3, 0.2, 0.4, 0.1};
  for (double b : {1.0, 0.5}) {
    auto slice = SingleCopyColumnOcrs(b, w);
    EXPECT_DOUBLE_EQ(slice->c(), 1.0 / (1.0 + b));
    Rng rng = MakeRng(6, 0);
    std::vector<long long> active(4, 0), chosen(4, 0);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
      slice->Begin();
      for (int i = 0; i < 4; ++i) {
        if (!Flip(rng, b * w[i])) continue;
        ++active[i];
        chosen[i] += slice->Offer(i, 0, rng);
      }
    }
    for (int i = 0; i < 4; ++i) {
      const double c = 1.0 / (1.0 + b);
      EXPECT_NEAR(chosen[i] / double(active[i]), c, 4 * Sigma(c, active[i])) << b << " " << i;
    }
  }
}

TEST(SingleCopyColumn, RejectsOverfullColumn) {
  EXPECT_THROW(SingleCopyColumnOcrs(1.0, {0.6, 0.6}), PreconditionError);
}

TEST(KUniformRow, UnconstrainedWhenCapIsWidth) {
  auto slice = KUniformRowOcrs(1.0, 3, {1.0}, MakeMatrix({{0.9, 0.8, 0.7}}));
  EXPECT_DOUBLE_EQ(slice->c(), 1.0);
}

TEST(KUniformRow, SingleCapRate) {
  for (double b : {1.0, 0.5}) {
    const std::vector<double> types = {0.4, 0.6};
    const Matrix x = MakeMatrix({{0.2, 0.3, 0.1, 0.1, 0.2, 0.1}, {0.5, 0.0, 0.2, 0.1, 0.1, 0.1}});
    auto slice = KUniformRowOcrs(b, 1, types, x);
    EXPECT_GE(slice->c(), 1.0 / (1.0 + b) - 1e-12);
    Rng rng = MakeRng(7, 0);
    const int trials = 200000;
    std::vector<long long> active(12, 0), chosen(12, 0);
    for (int t = 0; t < trials; ++t) {
      const int d = SampleIndex(rng, types);
      slice->Begin();
      int taken = 0;
      for (int j = 0; j < 6; ++j) {
        if (!Flip(rng, b * x(d, j))) continue;
        ++active[d * 6 + j];
        const bool take = slice->Offer(j, d, rng);
        chosen[d * 6 + j] += take;
        taken += take;
      }
      ASSERT_LE(taken, 1);
    }
    for (int k = 0; k < 12; ++k) {
      if (active[k] < 2000) continue;
      const double c = slice->c();
      EXPECT_NEAR(chosen[k] / double(active[k]), c, 4 * Sigma(c, active[k])) << b << " " << k;
    }
  }
}

TEST(KnapsackTocrs, DeclaredConstants) {
  const auto p = SingleTypeProcess({{0.5}});
  const Knapsack k{MakeMatrix({{0.3}}), 1.0};
  EXPECT_DOUBLE_EQ(KnapsackTocrs(1.0, k, p)->declared_c(), 0.1);
  EXPECT_DOUBLE_EQ(KnapsackTocrs(0.5, k, p)->declared_c(), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(MultiChoiceKnapsackTocrs(1.0, MultiChoiceKnapsack{k.weights, 1.0}, p)
                       ->declared_c(),
                   1.0 / 9.0);
}

TEST(KnapsackTocrs, SingleHeavyElement) {
  const auto p = SingleTypeProcess({{1.0}});
  const Knapsack k{MakeMatrix({{0.8}}), 1.0};
  for (double b : {1.0, 0.5}) {
    auto scheme = KnapsackTocrs(b, k, p);
    const auto report = VerifySelectability(*scheme, p, k, 100000, 8);
    const double expected = 1.0 / (2.0 * (1.0 + 4.0 * b));
    const auto& cell = report.cell(0, 0);
    EXPECT_NEAR(cell.rate(), expected, 4 * Sigma(expected, cell.active));
  }
}

TEST(KnapsackTocrs, HeavyAvailabilityClosedForm) {
  // Every element heavy; along the heavy branch the chance that nothing was
  // taken before element i is 1 - (b / (1 + 4b)) * sum of earlier marginals.
  const auto p = SingleTypeProcess({{0.3, 0.2}, {0.25, 0.1}, {0.15, 0.0}});
  const Knapsack k{MakeMatrix({{0.6, 0.7}, {0.9, 0.55}, {0.8, 1.0}}), 1.0};
  const double b = 1.0;
  auto scheme = KnapsackTocrs(b, k, p);
  Rng rng = MakeRng(9, 0);
  std::vector<long long> reach(6, 0);
  long long heavy = 0;
  for (int t = 0; t < 200000; ++t) {
    const auto active = SampleActiveSet(p, b, rng);
    scheme->Begin(rng);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (scheme->branch() == Branch::kHeavy && scheme->selected().empty()) ++reach[i * 2 + j];
        scheme->Offer(i, j, 0, active.active(i, j), rng);
      }
    }
    heavy += scheme->branch() == Branch::kHeavy;
  }
  EXPECT_NEAR(heavy / 200000.0, 0.5, 4 * Sigma(0.5, 200000));
  const Matrix w = p.Marginals();
  double prefix = 0.0;
  for (int k2 = 0; k2 < 6; ++k2) {
    const double a = 1.0 - b / (1.0 + 4.0 * b) * prefix;
    EXPECT_NEAR(reach[k2] / double(heavy), a, 4 * Sigma(a, heavy)) << k2;
    prefix += w.data()[k2];
  }
}

TEST(KnapsackTocrs, SelectableOnRandomProcesses) {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const auto kc = RandomKnapsack(4, 4, 2, seed);
    auto scheme = KnapsackTocrs(1.0, kc.constraint, kc.process);
    const auto report = VerifySelectability(*scheme, kc.process, kc.constraint, 100000, seed);
    EXPECT_EQ(report.feasibility_violations, 0);
    EXPECT_EQ(report.partition_violations, 0);
    EXPECT_EQ(report.run_clamps, 0);
    EXPECT_EQ(report.table_clamps, 0);
    EXPECT_LE(report.max_weight, kc.constraint.capacity * (1 + 1e-12));
    EXPECT_TRUE(report.pass) << seed << " min " << report.min_rate;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(*scheme->SelectionProbability(i, j, 0), 0.1, 1e-12);
      }
    }
  }
}

TEST(KnapsackTocrs, Irrevocable) {
  const auto kc = RandomKnapsack(3, 3, 2, 20);
  auto scheme = KnapsackTocrs(1.0, kc.constraint, kc.process);
  Rng rng = MakeRng(20, 1);
  for (int t = 0; t < 5000; ++t) {
    const auto active = SampleActiveSet(kc.process, 1.0, rng);
    scheme->Begin(rng);
    std::vector<Cell> before;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        scheme->Offer(i, j, active.row_types[i], active.active(i, j), rng);
        const auto& now = scheme->selected();
        ASSERT_GE(now.size(), before.size());
        ASSERT_TRUE(std::equal(before.begin(), before.end(), now.begin()));
        before = now;
      }
    }
  }
}

TEST(KnapsackTocrs, EstimatedModeWithinEpsilon) {
  const auto kc = RandomKnapsack(3, 3, 2, 21);
  const double eps = 0.05;
  const double delta = 0.01;
  int good = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto scheme = KnapsackTocrs(1.0, kc.constraint, kc.process,
                                ProbabilityMode::Estimated(eps, delta, rep));
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      for (int d = 0; d < kc.process.row_types(i); ++d) {
        for (int j = 0; j < 3; ++j) {
          const auto p = scheme->SelectionProbability(i, j, d);
          ASSERT_TRUE(p.has_value());
          ok = ok && *p >= scheme->declared_c() - 1e-12 && *p <= 0.1 + 1e-12;
        }
      }
    }
    good += ok;
  }
  EXPECT_GE(good, 99);
}

TEST(KnapsackTocrs, OracleAndEstimateAgree) {
  const auto kc = RandomKnapsack(3, 3, 2, 22);
  const double eps = 0.05;
  auto oracle = KnapsackTocrs(1.0, kc.constraint, kc.process);
  auto estimated = KnapsackTocrs(1.0, kc.constraint, kc.process,
                                 ProbabilityMode::Estimated(eps, 0.01, 5));
  const auto a = VerifySelectability(*oracle, kc.process, kc.constraint, 100000, 23);
  const auto b = VerifySelectability(*estimated, kc.process, kc.constraint, 100000, 23);
  for (size_t k = 0; k < a.cells.size(); ++k) {
    if (a.cells[k].active < 2000) continue;
    const double sd = std::hypot(Sigma(a.cells[k].rate(), a.cells[k].active),
                                 Sigma(b.cells[k].rate(), b.cells[k].active));
    EXPECT_LE(std::abs(a.cells[k].rate() - b.cells[k].rate()), eps + 4 * sd) << k;
  }
}

TEST(KnapsackTocrs, TooManyLightStates) {
  const int m = 26;
  Matrix w(1, m);
  std::vector<double> x(m);
  Rng rng = MakeRng(24, 0);
  for (int j = 0; j < m; ++j) {
    w(0, j) = 0.001 + 0.018 * Uniform01(rng);
    x[j] = 0.03;
  }
  const auto p = SingleTypeProcess({x});
  EXPECT_THROW(KnapsackTocrs(1.0, Knapsack{w, 1.0}, p), TooLargeError);
}

TEST(KnapsackTocrs, RejectsInfeasibleProcess) {
  const auto p = SingleTypeProcess({{0.6}, {0.6}});
  EXPECT_THROW(KnapsackTocrs(1.0, Knapsack{MakeMatrix({{1}, {1}}), 1.0}, p), PreconditionError);
}

TEST(MultiChoiceTocrs, SelectableWithBranchFrequency) {
  Rng rng = MakeRng(25, 0);
  AuctionParams params;
  params.n = 4;
  params.m = 3;
  params.variant = "multi_choice_knapsack";
  const auto constraint = GenerateConstraint(params, rng);
  const auto process = GenerateFeasibleProcess(constraint, 4, 3, 2, rng);
  const auto& mc = std::get<MultiChoiceKnapsack>(constraint);
  auto scheme = MultiChoiceKnapsackTocrs(1.0, mc, process);
  const long long trials = 100000;
  const auto report = VerifySelectability(*scheme, process, constraint, trials, 26);
  EXPECT_EQ(report.feasibility_violations, 0);
  EXPECT_EQ(report.partition_violations, 0);
  EXPECT_TRUE(report.pass) << report.min_rate;
  EXPECT_NEAR(report.heavy_runs / double(trials), 5.0 / 9.0, 4 * Sigma(5.0 / 9.0, trials));
}

TEST(StochasticKnapsack, DeclaredConstants) {
  const StochasticKnapsackInstance low{{{0.0, 0.2}}, {{0.5, 0.5}}, 1.0};
  const StochasticKnapsackOcrs a(low);
  EXPECT_NEAR(a.declared_c(), 4.0 / 9.0, 1e-12);
  EXPECT_EQ(a.regime(), StochasticKnapsackOcrs::Regime::kGamma);
  const StochasticKnapsackInstance high{{{0.0, 0.9}}, {{0.5, 0.5}}, 1.0};
  const StochasticKnapsackOcrs b(high);
  EXPECT_NEAR(b.declared_c(), 1.0 / 6.0, 1e-12);
  EXPECT_EQ(b.regime(), StochasticKnapsackOcrs::Regime::kSixth);
}

TEST(StochasticKnapsack, DeterministicWeightsExactAndSampled) {
  Rng rng = MakeRng(27, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    StochasticKnapsackInstance inst;
    inst.capacity = 1.0;
    double load = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.1 + 0.8 * Uniform01(rng);
      const double p = std::min(1.0, (1.0 - load) / w) * Uniform01(rng);
      load += p * w;
      inst.weights.push_back({0.0, w});
      inst.probs.push_back({1.0 - p, p});
    }
    const StochasticKnapsackOcrs ocrs(inst);
    EXPECT_GE(ocrs.declared_c(), 1.0 / 6.0 - 1e-12);
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < 2; ++s) {
        const auto exact = ocrs.SelectionProbability(i, s);
        ASSERT_TRUE(exact.has_value());
        EXPECT_GE(*exact, ocrs.declared_c() - 1e-9) << trial << " " << i << " " << s;
      }
    }
    const auto report = VerifyStochasticKnapsack(ocrs, 20000, 28 + trial);
    EXPECT_EQ(report.overfilled, 0);
    EXPECT_TRUE(report.pass) << trial;
  }
}

TEST(StochasticKnapsack, GeneratedInstancesNeverOverfill) {
  for (double k_star : {0.2, 0.5, 0.9}) {
    Rng rng = MakeRng(29, 0);
    StochasticKnapsackParams params;
    params.k_star = k_star;
    const auto inst = GenerateStochasticKnapsack(params, rng);
    EXPECT_NEAR(inst.k_star(), k_star, 1e-12);
    const StochasticKnapsackOcrs ocrs(inst);
    const auto report = VerifyStochasticKnapsack(ocrs, 100000, 30);
    EXPECT_EQ(report.overfilled, 0);
    EXPECT_LE(report.max_load, inst.capacity * (1 + 1e-12));
    EXPECT_TRUE(report.pass) << k_star << " min " << report.min_rate;
  }
}

TEST(StochasticKnapsack, RejectsInadmissibleLoad) {
  const StochasticKnapsackInstance heavy{{{0.8}, {0.8}}, {{1.0}, {1.0}}, 1.0};
  EXPECT_THROW(StochasticKnapsackOcrs{heavy}, PreconditionError);
}

}  // namespace
}  // namespace tocrs
