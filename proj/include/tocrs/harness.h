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

#ifndef TOCRS_HARNESS_H_
#define TOCRS_HARNESS_H_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tocrs/core.h"
#include "tocrs/instance_io.h"
#include "tocrs/lp.h"
#include "tocrs/mechanism.h"
#include "tocrs/random.h"
#include "tocrs/schemes.h"

namespace tocrs {

// Worker threads for trial fan-out; TOCRS_WORKERS overrides the hardware
// default.
int WorkerCount();

// Runs body(state, trial) for every trial. Trials are cut into a fixed
// number of chunks that are merged in chunk order, so results do not depend
// on the worker count.
template <typename State, typename Body, typename Merge>
State ParallelTrials(long long trials, const State& init, Body body, Merge merge) {
  constexpr long long kChunks = 64;
  const long long chunks = std::max(1LL, std::min(kChunks, trials));
  std::vector<State> parts(chunks, init);
  std::atomic<long long> next{0};
  auto work = [&] {
    for (long long k = next++; k < chunks; k = next++) {
      const long long begin = trials * k / chunks;
      const long long end = trials * (k + 1) / chunks;
      for (long long t = begin; t < end; ++t) body(parts[k], t);
    }
  };
  const int workers = static_cast<int>(std::min<long long>(WorkerCount(), chunks));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& thread : pool) thread.join();
  State total = init;
  for (auto& part : parts) merge(total, part);
  return total;
}

// One-sided binomial margin under success probability p.
double BinomialSigma(double p, long long samples);

// ---------------------------------------------------------------------------
// Generators. Sampled families are a project convention.

struct AuctionParams {
  int n = 2;
  int m = 2;
  int types = 2;
  std::string variant = "knapsack";
  double value_lo = 0.0;
  double value_hi = 1.0;
  int value_grid = 0;  // when positive, values are multiples of 1/value_grid
  double weight_lo = 0.1;
  double weight_hi = 1.0;  // as a fraction of the capacity
  double capacity = 1.0;
  int k = 1;  // row cap for k-uniform and VH
  int col_cap = 1;
};

AuctionInstance GenerateAuction(const AuctionParams& params, Rng& rng);
FeasibilityConstraint GenerateConstraint(const AuctionParams& params, Rng& rng);

struct ProcurementParams {
  int n = 3;
  int m = 2;
  int types = 2;
  double value_lo = 0.5;
  double value_hi = 2.0;
  double cost_lo = 0.0;
  double cost_hi = 1.0;
  double budget = 1.0;
};

ProcurementInstance GenerateProcurement(const ProcurementParams& params, Rng& rng);

// Random process scaled onto the constraint's polytopes: each row type is
// scaled to its row polytope, then the whole process to the marginal one.
TwoLevelProcess GenerateFeasibleProcess(const FeasibilityConstraint& constraint, int n, int m,
                                        int types, Rng& rng, double activation_lo = 0.2);
void FitProcess(const FeasibilityConstraint& constraint, TwoLevelProcess* process);

struct StochasticKnapsackParams {
  int n = 8;
  int support = 3;  // includes a zero weight
  double k_star = 0.5;
  double capacity = 1.0;
  double load = 1.0;  // expected total weight as a fraction of capacity
};

StochasticKnapsackInstance GenerateStochasticKnapsack(const StochasticKnapsackParams& params,
                                                      Rng& rng);

// ---------------------------------------------------------------------------
// Verification.

struct RateCount {
  long long active = 0;
  long long selected = 0;
  double rate() const { return active ? static_cast<double>(selected) / active : 0.0; }
};

struct VerifyOptions {
  double sigmas = 4.0;
  long long min_samples = 2000;
};

struct SelectabilityReport {
  std::string scheme;
  double declared_c = 0.0;
  long long trials = 0;
  int n = 0;
  int m = 0;
  std::vector<RateCount> cells;  // [i * m + j]
  std::vector<std::vector<RateCount>> typed;  // [i][d * m + j]
  double min_rate = 1.0;  // over cells with enough samples
  int checked_cells = 0;
  int failing_cells = 0;
  long long feasibility_violations = 0;
  long long partition_violations = 0;  // knapsack schemes only
  long long heavy_runs = 0;
  long long run_clamps = 0;
  long long table_clamps = 0;
  double max_weight = 0.0;  // knapsack schemes only
  bool pass = false;

  const RateCount& cell(int i, int j) const { return cells[static_cast<size_t>(i) * m + j]; }
};

SelectabilityReport VerifySelectability(const Scheme& scheme, const TwoLevelProcess& process,
                                        const FeasibilityConstraint& constraint,
                                        long long trials, std::uint64_t seed,
                                        const VerifyOptions& options = {});

struct StochasticKnapsackReport {
  double declared_c = 0.0;
  std::string regime;
  long long trials = 0;
  std::vector<std::vector<RateCount>> rates;  // [element][support index]
  double min_rate = 1.0;
  int checked = 0;
  int failing = 0;
  long long overfilled = 0;
  double max_load = 0.0;
  bool pass = false;
};

StochasticKnapsackReport VerifyStochasticKnapsack(const StochasticKnapsackOcrs& ocrs,
                                                  long long trials, std::uint64_t seed,
                                                  const VerifyOptions& options = {});

// Draws one truthful report per agent from the priors.
std::vector<int> SampleReports(const std::vector<AgentTypeSpace>& spaces, Rng& rng);

struct EndToEndReport {
  double lp_objective = 0.0;
  double expected_revenue = 0.0;  // b (c - eps) LP objective
  double mean_revenue = 0.0;
  double revenue_stderr = 0.0;
  std::optional<double> oracle_opt;
  double ratio_to_opt = std::numeric_limits<double>::quiet_NaN();
  double guaranteed_ratio = std::numeric_limits<double>::quiet_NaN();  // b (c - eps) LP / OPT
  long long trials = 0;
  long long feasibility_violations = 0;
  long long keep_flips = 0;
  long long pstar_tosses = 0;
  bool identity_pass = false;
  bool pass = false;
};

EndToEndReport VerifyEndToEnd(const Mechanism& mechanism, long long trials, std::uint64_t seed,
                              std::optional<double> oracle_opt = std::nullopt,
                              bool batch = false, const VerifyOptions& options = {});

struct AllocationAudit {
  int agent = 0;
  int report = 0;
  std::vector<RateCount> items;  // allocation counts over all trials
  std::vector<double> expected;  // b (c - eps) pi
  double max_z = 0.0;
  bool pass = false;
};

AllocationAudit AuditAllocation(const Mechanism& mechanism, int agent, int report,
                                long long trials, std::uint64_t seed, bool batch = false,
                                const VerifyOptions& options = {});

struct BicEntry {
  int agent = 0;
  int true_type = 0;
  int report = 0;
  double empirical = 0.0;
  double analytic = 0.0;
  double stderr_ = 0.0;
};

struct BicReport {
  std::vector<BicEntry> entries;
  long long identity_failures = 0;
  long long incentive_failures = 0;
  double max_identity_z = 0.0;
  bool pass = false;
};

BicReport AuditBic(const Mechanism& mechanism, long long trials_per_report, std::uint64_t seed,
                   const VerifyOptions& options = {});

struct ProcurementReport {
  double lp_objective = 0.0;
  double c = 0.0;
  double expected_value = 0.0;  // (c - eps) LP objective
  double mean_value = 0.0;
  double value_stderr = 0.0;
  double mean_payment = 0.0;
  double max_payment = 0.0;
  long long budget_violations = 0;
  long long trials = 0;
  double ratio = 0.0;  // mean value / LP objective
  bool pass = false;
};

ProcurementReport VerifyProcurement(const ProcurementMechanism& mechanism, long long trials,
                                    std::uint64_t seed,
                                    const VerifyOptions& options = {});

struct DivisionReport {
  double p0 = 0.0;
  double p1 = 0.0;
  double delta = 0.0;
  long long samples = 0;
  double bias = 0.0;
  double bias_stderr = 0.0;
  double mean_tosses = 0.0;
  double toss_bound = 0.0;  // with the measured doubling constant
  double mean_rounds = 0.0;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 0.0;
  bool pass = false;
};

DivisionReport BenchDivision(double p0, double p1, double delta, long long samples,
                             std::uint64_t seed, const VerifyOptions& options = {});

// ---------------------------------------------------------------------------
// Reports.

struct ExperimentResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;

  bool operator==(const ExperimentResult&) const = default;
};

Json ResultsToJson(const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> ResultsFromJson(const Json& doc);
std::string ResultsToCsv(const std::vector<ExperimentResult>& results);
// Writes json or csv; returns 0 iff every result passed.
int EmitReport(const std::vector<ExperimentResult>& results, const std::string& format,
               std::ostream& out);
std::string FormatResultLine(const ExperimentResult& result);

// ---------------------------------------------------------------------------
// Acceptance experiments.

inline constexpr int kAcceptanceCriteria = 10;

struct AcceptanceOptions {
  std::uint64_t seed = 20261015;
  double trial_scale = 1.0;  // multiplies every trial count
};

ExperimentResult RunAcceptance(int criterion, const AcceptanceOptions& options = {});

}  // namespace tocrs

#endif  // TOCRS_HARNESS_H_
