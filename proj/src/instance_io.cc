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

#include "tocrs/instance_io.h"

#include <fstream>
#include <stdexcept>
#include <utility>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

void ExpectKind(const Json& doc, const char* kind) {
  if (!doc.is_object()) throw PreconditionError(std::string("expected a ") + kind + " object");
  if (doc.contains("kind") && doc.at("kind").get<std::string>() != kind) {
    throw PreconditionError("expected kind '" + std::string(kind) + "', found '" +
                            doc.at("kind").get<std::string>() + "'");
  }
}

Json SpacesToJson(const std::vector<AgentTypeSpace>& spaces) {
  Json out = Json::array();
  for (const AgentTypeSpace& space : spaces) {
    out.push_back({{"support", space.support}, {"probs", space.probs}});
  }
  return out;
}

std::vector<AgentTypeSpace> SpacesFromJson(const Json& doc) {
  std::vector<AgentTypeSpace> spaces;
  for (const Json& entry : doc) {
    AgentTypeSpace space;
    space.support = entry.at("support").get<std::vector<std::vector<double>>>();
    space.probs = entry.at("probs").get<std::vector<double>>();
    spaces.push_back(std::move(space));
  }
  return spaces;
}

Json MatricesToJson(const std::vector<Matrix>& matrices) {
  Json out = Json::array();
  for (const Matrix& matrix : matrices) out.push_back(ToJson(matrix));
  return out;
}

std::vector<Matrix> MatricesFromJson(const Json& doc) {
  std::vector<Matrix> out;
  for (const Json& entry : doc) out.push_back(MatrixFromJson(entry));
  return out;
}

}  // namespace

std::string DocumentKind(const Json& doc) {
  if (!doc.is_object() || !doc.contains("kind")) throw PreconditionError("document has no kind");
  return doc.at("kind").get<std::string>();
}

Json ToJson(const Matrix& matrix) {
  Json rows = Json::array();
  for (int r = 0; r < matrix.rows(); ++r) {
    rows.push_back(std::vector<double>(matrix.row(r).begin(), matrix.row(r).end()));
  }
  return rows;
}

Matrix MatrixFromJson(const Json& doc) {
  const auto rows = doc.get<std::vector<std::vector<double>>>();
  const int cols = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  Matrix matrix(static_cast<int>(rows.size()), cols);
  for (int r = 0; r < matrix.rows(); ++r) {
    if (static_cast<int>(rows[r].size()) != cols) throw DimensionError("ragged matrix");
    for (int c = 0; c < cols; ++c) matrix(r, c) = rows[r][c];
  }
  return matrix;
}

Json ToJson(const FeasibilityConstraint& constraint) {
  Json params = Json::object();
  if (const auto* k = std::get_if<KUniformPerAgent>(&constraint)) {
    params["k"] = k->k;
  } else if (const auto* ks = std::get_if<Knapsack>(&constraint)) {
    params["weights"] = ToJson(ks->weights);
    params["capacity"] = ks->capacity;
  } else if (const auto* mc = std::get_if<MultiChoiceKnapsack>(&constraint)) {
    params["weights"] = ToJson(mc->weights);
    params["capacity"] = mc->capacity;
  } else if (const auto* vh = std::get_if<VerticalHorizontal>(&constraint)) {
    params["row_caps"] = vh->row_caps;
    params["col_caps"] = vh->col_caps;
  }
  return {{"variant", VariantName(constraint)}, {"params", params}};
}

FeasibilityConstraint ConstraintFromJson(const Json& doc) {
  const std::string variant = doc.at("variant").get<std::string>();
  const Json params = doc.value("params", Json::object());
  if (variant == "single_copy_per_item") return SingleCopyPerItem{};
  if (variant == "k_uniform_per_agent") {
    return KUniformPerAgent{params.at("k").get<std::vector<int>>()};
  }
  if (variant == "knapsack") {
    return Knapsack{MatrixFromJson(params.at("weights")), params.at("capacity").get<double>()};
  }
  if (variant == "multi_choice_knapsack") {
    return MultiChoiceKnapsack{MatrixFromJson(params.at("weights")),
                               params.at("capacity").get<double>()};
  }
  if (variant == "vh") {
    return VerticalHorizontal{params.at("row_caps").get<std::vector<int>>(),
                              params.at("col_caps").get<std::vector<int>>()};
  }
  throw UnsupportedConstraintError("unknown constraint variant '" + variant + "'");
}

Json ToJson(const AuctionInstance& instance) {
  return {{"kind", "auction"},
          {"n", instance.n},
          {"m", instance.m},
          {"agents", SpacesToJson(instance.type_spaces)},
          {"constraint", ToJson(instance.constraint)}};
}

AuctionInstance AuctionFromJson(const Json& doc) {
  ExpectKind(doc, "auction");
  AuctionInstance instance;
  instance.n = doc.at("n").get<int>();
  instance.m = doc.at("m").get<int>();
  instance.type_spaces = SpacesFromJson(doc.at("agents"));
  instance.constraint = ConstraintFromJson(doc.at("constraint"));
  Validate(instance);
  return instance;
}

Json ToJson(const ProcurementInstance& instance) {
  return {{"kind", "procurement"},
          {"n", instance.n},
          {"m", instance.m},
          {"values", ToJson(instance.values)},
          {"sellers", SpacesToJson(instance.cost_spaces)},
          {"budget", instance.budget}};
}

ProcurementInstance ProcurementFromJson(const Json& doc) {
  ExpectKind(doc, "procurement");
  ProcurementInstance instance;
  instance.n = doc.at("n").get<int>();
  instance.m = doc.at("m").get<int>();
  instance.values = MatrixFromJson(doc.at("values"));
  instance.cost_spaces = SpacesFromJson(doc.at("sellers"));
  instance.budget = doc.at("budget").get<double>();
  Validate(instance);
  return instance;
}

Json ToJson(const StochasticKnapsackInstance& instance) {
  Json elements = Json::array();
  for (int i = 0; i < instance.size(); ++i) {
    elements.push_back({{"weights", instance.weights[i]}, {"probs", instance.probs[i]}});
  }
  return {{"kind", "stochastic_knapsack"},
          {"capacity", instance.capacity},
          {"elements", elements}};
}

StochasticKnapsackInstance StochasticKnapsackFromJson(const Json& doc) {
  ExpectKind(doc, "stochastic_knapsack");
  StochasticKnapsackInstance instance;
  instance.capacity = doc.at("capacity").get<double>();
  for (const Json& element : doc.at("elements")) {
    instance.weights.push_back(element.at("weights").get<std::vector<double>>());
    instance.probs.push_back(element.at("probs").get<std::vector<double>>());
  }
  Validate(instance);
  return instance;
}

Json ToJson(const TwoLevelProcess& process) {
  Json rows = Json::array();
  for (int i = 0; i < process.n; ++i) {
    rows.push_back({{"probs", process.row_probs[i]}, {"activation", ToJson(process.activation[i])}});
  }
  return {{"kind", "process"}, {"n", process.n}, {"m", process.m}, {"rows", rows}};
}

TwoLevelProcess ProcessFromJson(const Json& doc) {
  ExpectKind(doc, "process");
  TwoLevelProcess process;
  process.n = doc.at("n").get<int>();
  process.m = doc.at("m").get<int>();
  for (const Json& row : doc.at("rows")) {
    process.row_probs.push_back(row.at("probs").get<std::vector<double>>());
    process.activation.push_back(MatrixFromJson(row.at("activation")));
  }
  Validate(process);
  return process;
}

Json ToJson(const InterimRule& rule) {
  return {{"kind", "interim"},
          {"objective", rule.objective},
          {"pi", MatricesToJson(rule.pi)},
          {"q", rule.q}};
}

InterimRule InterimFromJson(const Json& doc) {
  ExpectKind(doc, "interim");
  InterimRule rule;
  rule.objective = doc.at("objective").get<double>();
  rule.pi = MatricesFromJson(doc.at("pi"));
  rule.q = doc.at("q").get<std::vector<std::vector<double>>>();
  if (rule.pi.size() != rule.q.size()) throw DimensionError("pi and q disagree in agent count");
  return rule;
}

Json ToJson(const ProcurementInterimRule& rule) {
  return {{"kind", "procurement_interim"},
          {"objective", rule.objective},
          {"pi", MatricesToJson(rule.pi)},
          {"q", rule.q}};
}

ProcurementInterimRule ProcurementInterimFromJson(const Json& doc) {
  ExpectKind(doc, "procurement_interim");
  ProcurementInterimRule rule;
  rule.objective = doc.at("objective").get<double>();
  rule.pi = MatricesFromJson(doc.at("pi"));
  rule.q = doc.at("q").get<std::vector<std::vector<double>>>();
  if (rule.pi.size() != rule.q.size()) throw DimensionError("pi and q disagree in seller count");
  return rule;
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

void WriteJsonFile(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace tocrs
