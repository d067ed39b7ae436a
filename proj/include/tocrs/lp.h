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

// Interim relaxations for revenue-optimal auctions and value-optimal
// procurement, plus an exact ex-post optimum for tiny auction instances.

#ifndef TOCRS_LP_H_
#define TOCRS_LP_H_

#include <vector>

#include "tocrs/core.h"
#include "tocrs/simplex.h"

namespace tocrs {

// Interim allocation pi[i](t, j) and payment q[i][t] for agent i, type t.
struct InterimRule {
  std::vector<Matrix> pi;
  std::vector<std::vector<double>> q;
  double objective = 0.0;
};

struct ProcurementInstance {
  int n = 0;  // sellers
  int m = 0;  // services
  Matrix values;  // buyer value v_{i,j}
  std::vector<AgentTypeSpace> cost_spaces;  // support entries are cost vectors
  double budget = 0.0;
};

void Validate(const ProcurementInstance& instance);

struct ProcurementInterimRule {
  std::vector<Matrix> pi;
  std::vector<std::vector<double>> q;  // payment to seller
  double objective = 0.0;
};

// Variable layout shared by both relaxations: every pi entry of agent 0 type 0,
// then agent 0 type 1, ..., followed by every q entry in the same order.
struct InterimLayout {
  std::vector<int> type_counts;
  int m = 0;

  int PiIndex(int agent, int type, int item) const;
  int QIndex(int agent, int type) const;
  int num_pi() const;
  int num_variables() const;
};

InterimLayout LayoutFor(const AuctionInstance& instance);
InterimLayout LayoutFor(const ProcurementInstance& instance);

LPModel BuildLp1(const AuctionInstance& instance);
LPModel BuildLp2(const ProcurementInstance& instance);

// Extraction with re-validation; throws ValidationError when a bound is off
// by more than 1e-9 or any row by more than 1e-6.
InterimRule InterimFromLp1(const AuctionInstance& instance, const LPSolution& solution);
ProcurementInterimRule InterimFromLp2(const ProcurementInstance& instance,
                                      const LPSolution& solution);

// Builds, solves and extracts; throws std::runtime_error on a non-optimal status.
InterimRule SolveLp1(const AuctionInstance& instance);
ProcurementInterimRule SolveLp2(const ProcurementInstance& instance);

// The process whose row types are the agents' types and whose activation
// table is the interim allocation.
TwoLevelProcess InducedProcess(const AuctionInstance& instance, const InterimRule& rule);

// Largest BIC / IR violation of an auction interim rule (positive = violated).
double MaxIncentiveViolation(const AuctionInstance& instance, const InterimRule& rule);
double MaxIncentiveViolation(const ProcurementInstance& instance,
                             const ProcurementInterimRule& rule);

struct OracleLimits {
  int max_profiles = 64;
  int max_cells = 12;
};

// Optimal expected revenue over all BIC-IR mechanisms, by solving the ex-post
// LP over distributions on explicitly enumerated feasible allocations per type
// profile. Throws TooLargeError beyond the limits.
double BruteForceOptimalRevenue(const AuctionInstance& instance,
                                const OracleLimits& limits = {});

}  // namespace tocrs

#endif  // TOCRS_LP_H_
