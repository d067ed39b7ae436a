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

#ifndef TOCRS_MECHANISM_H_
#define TOCRS_MECHANISM_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tocrs/bernoulli.h"
#include "tocrs/core.h"
#include "tocrs/lp.h"
#include "tocrs/random.h"
#include "tocrs/schemes.h"

namespace tocrs {

// How the (c - eps) / p* keep coin is flipped.
enum class KeepMode {
  kKnownProbability,  // p* read from the scheme's exact selection probability
  kExactBernoulli,    // division factory over a simulated p*-coin; needs eps > 0
  kEstimated,         // p* replaced by a Monte Carlo estimate, computed once
};

const char* KeepModeName(KeepMode mode);
KeepMode ParseKeepMode(const std::string& name);

struct MechanismConfig {
  double b = 1.0;
  double epsilon = 0.0;
  KeepMode keep = KeepMode::kKnownProbability;
  ProbabilityMode scheme_mode;  // also seeds keep-probability estimation
};

enum class TraceKind { kReport, kPayment, kActivation, kSelection, kKeepFlip, kAllocation };

const char* TraceKindName(TraceKind kind);

struct TraceEvent {
  TraceKind kind = TraceKind::kReport;
  int agent = 0;
  int item = -1;
  double value = 0.0;  // report index, payment, weight, or keep outcome
  Branch branch = Branch::kNone;
  long long tosses = 0;  // p*-coin tosses consumed by a keep flip

  bool operator==(const TraceEvent&) const = default;
};

struct RunTrace {
  std::vector<TraceEvent> events;
  long long pstar_tosses = 0;
  long long keep_flips = 0;
  double total_weight = 0.0;  // knapsack weight of the allocation, when defined

  bool operator==(const RunTrace&) const = default;
};

struct MechanismOutcome {
  std::vector<Cell> allocation;
  std::vector<double> payments;  // one per agent that reported
  double revenue = 0.0;
  RunTrace trace;
};

class Mechanism {
 public:
  // Builds the scheme for the instance's constraint over the induced process.
  Mechanism(AuctionInstance instance, InterimRule rule, const MechanismConfig& config);
  Mechanism(AuctionInstance instance, InterimRule rule, const MechanismConfig& config,
            std::unique_ptr<Scheme> scheme);

  const AuctionInstance& instance() const { return instance_; }
  const InterimRule& rule() const { return rule_; }
  const TwoLevelProcess& process() const { return process_; }
  const Scheme& scheme() const { return *scheme_; }
  const MechanismConfig& config() const { return config_; }
  double c() const { return scheme_->declared_c(); }
  double payment_factor() const { return config_.b * (c() - config_.epsilon); }

  // Sequential framework; agents report in index order and `reports` may be
  // a prefix of the agents.
  MechanismOutcome RunSequential(std::span<const int> reports, Rng& rng) const;
  // Batch framework: all reports first, then one scheme pass over R.
  MechanismOutcome RunBatch(std::span<const int> reports, Rng& rng) const;

  // Coin of bias Pr[(i, j) selected | report r, R_{i,j} = 1]; each sample
  // simulates the other agents from their priors.
  CoinPtr PStarCoin(int i, int j, int r) const;
  double KnownPStar(int i, int j, int r) const;
  CoinPtr KeepCoin(int i, int j, int r) const;

 private:
  void Initialize();
  bool FlipKeep(int i, int j, int r, Rng& rng, RunTrace* trace) const;
  double ItemWeight(int i, int j) const;

  AuctionInstance instance_;
  InterimRule rule_;
  MechanismConfig config_;
  TwoLevelProcess process_;
  std::unique_ptr<Scheme> scheme_;
  std::vector<std::vector<std::vector<double>>> estimated_pstar_;  // [i][r][j]
};

struct ProcurementConfig {
  double epsilon = 0.0;
  KeepMode keep = KeepMode::kKnownProbability;
  ProbabilityMode ocrs_mode;
};

struct ProcurementOutcome {
  std::vector<double> payments;  // one per seller that reported
  std::vector<Cell> procured;
  double total_payment = 0.0;
  double buyer_value = 0.0;
  RunTrace trace;
};

// Stochastic knapsack instance whose element i takes weight q_i(r) with the
// prior probability of cost report r; capacity is the budget.
StochasticKnapsackInstance PaymentKnapsack(const ProcurementInstance& instance,
                                           const ProcurementInterimRule& rule);

class ProcurementMechanism {
 public:
  ProcurementMechanism(ProcurementInstance instance, ProcurementInterimRule rule,
                       const ProcurementConfig& config);

  const ProcurementInstance& instance() const { return instance_; }
  const ProcurementInterimRule& rule() const { return rule_; }
  const ProcurementConfig& config() const { return config_; }
  const StochasticKnapsackOcrs& ocrs() const { return ocrs_; }
  double c() const { return ocrs_.declared_c(); }
  // Payment actually made on selection (the OCRS weight).
  double payment(int i, int r) const { return ocrs_.instance().weights[i][r]; }

  ProcurementOutcome Run(std::span<const int> reports, Rng& rng) const;

  CoinPtr PStarCoin(int i, int r) const;
  double KnownPStar(int i, int r) const;
  CoinPtr KeepCoin(int i, int r) const;

 private:
  ProcurementInstance instance_;
  ProcurementInterimRule rule_;
  ProcurementConfig config_;
  StochasticKnapsackOcrs ocrs_;
  std::vector<std::vector<double>> estimated_pstar_;  // [i][r]
};

}  // namespace tocrs

#endif  // TOCRS_MECHANISM_H_
