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

#ifndef TOCRS_INSTANCE_IO_H_
#define TOCRS_INSTANCE_IO_H_

#include <string>

#include "json.hpp"
#include "tocrs/core.h"
#include "tocrs/lp.h"
#include "tocrs/schemes.h"

namespace tocrs {

using Json = nlohmann::json;

// Every document carries a "kind" tag: auction, procurement,
// stochastic_knapsack, process, interim or procurement_interim.
std::string DocumentKind(const Json& doc);

Json ToJson(const Matrix& matrix);
Matrix MatrixFromJson(const Json& doc);

Json ToJson(const FeasibilityConstraint& constraint);
FeasibilityConstraint ConstraintFromJson(const Json& doc);

Json ToJson(const AuctionInstance& instance);
AuctionInstance AuctionFromJson(const Json& doc);

Json ToJson(const ProcurementInstance& instance);
ProcurementInstance ProcurementFromJson(const Json& doc);

Json ToJson(const StochasticKnapsackInstance& instance);
StochasticKnapsackInstance StochasticKnapsackFromJson(const Json& doc);

Json ToJson(const TwoLevelProcess& process);
TwoLevelProcess ProcessFromJson(const Json& doc);

Json ToJson(const InterimRule& rule);
InterimRule InterimFromJson(const Json& doc);

Json ToJson(const ProcurementInterimRule& rule);
ProcurementInterimRule ProcurementInterimFromJson(const Json& doc);

Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& doc);

}  // namespace tocrs

#endif  // TOCRS_INSTANCE_IO_H_
