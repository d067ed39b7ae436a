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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "tocrs/harness.h"

namespace tocrs {
namespace {

template <typename T, typename Parse>
void ExpectRoundTrip(const T& value, Parse parse, const std::string& kind) {
  const Json doc = ToJson(value);
  EXPECT_EQ(DocumentKind(doc), kind);
  const Json reparsed = Json::parse(doc.dump(2));
  EXPECT_EQ(ToJson(parse(reparsed)), doc);
}

TEST(InstanceIo, AuctionRoundTripForEveryVariant) {
  const char* variants[] = {"single_copy_per_item", "k_uniform_per_agent", "knapsack",
                            "multi_choice_knapsack", "vh"};
  Rng rng = MakeRng(1, 0);
  for (const char* variant : variants) {
    AuctionParams params;
    params.n = 3;
    params.m = 2;
    params.types = 3;
    params.variant = variant;
    params.k = 2;
    const auto inst = GenerateAuction(params, rng);
    ExpectRoundTrip(inst, AuctionFromJson, "auction");
    const Json doc = ToJson(inst);
    EXPECT_EQ(doc["constraint"]["variant"], variant);
    const auto back = AuctionFromJson(doc);
    // Full precision survives the text form.
    EXPECT_EQ(back.type_spaces[1].support[2], inst.type_spaces[1].support[2]);
    EXPECT_EQ(back.type_spaces[2].probs, inst.type_spaces[2].probs);
  }
}

TEST(InstanceIo, RulesProcessesAndProcurement) {
  Rng rng = MakeRng(2, 0);
  AuctionParams params;
  const auto inst = GenerateAuction(params, rng);
  const auto rule = SolveLp1(inst);
  ExpectRoundTrip(rule, InterimFromJson, "interim");
  ExpectRoundTrip(InducedProcess(inst, rule), ProcessFromJson, "process");

  const auto proc = GenerateProcurement(ProcurementParams{}, rng);
  ExpectRoundTrip(proc, ProcurementFromJson, "procurement");
  ExpectRoundTrip(SolveLp2(proc), ProcurementInterimFromJson, "procurement_interim");

  const auto sk = GenerateStochasticKnapsack(StochasticKnapsackParams{}, rng);
  ExpectRoundTrip(sk, StochasticKnapsackFromJson, "stochastic_knapsack");
}

TEST(InstanceIo, RejectsWrongKindAndBadShapes) {
  Rng rng = MakeRng(3, 0);
  const Json proc = ToJson(GenerateProcurement(ProcurementParams{}, rng));
  EXPECT_ANY_THROW(AuctionFromJson(proc));
  Json broken = ToJson(GenerateAuction(AuctionParams{}, rng));
  broken["agents"][0]["probs"] = Json::array({0.5});
  EXPECT_ANY_THROW(AuctionFromJson(broken));
}

TEST(InstanceIo, FileRoundTrip) {
  Rng rng = MakeRng(4, 0);
  const auto inst = GenerateAuction(AuctionParams{}, rng);
  const auto path = std::filesystem::temp_directory_path() / "tocrs_io_test.json";
  WriteJsonFile(path.string(), ToJson(inst));
  EXPECT_EQ(ReadJsonFile(path.string()), ToJson(inst));
  std::filesystem::remove(path);
  EXPECT_ANY_THROW(ReadJsonFile(path.string()));
}

TEST(Report, EmptyCsvHasHeaderOnly) {
  EXPECT_EQ(ResultsToCsv({}), "id,title,pass,metric,value\n");
  std::ostringstream out;
  EXPECT_EQ(EmitReport({}, "csv", out), 0);
}

TEST(Report, FailingSuiteGivesNonzeroExit) {
  std::vector<ExperimentResult> results = {{"a", "ok", true, {{"x", 1.0}}, ""},
                                           {"b", "bad", false, {}, "why"}};
  std::ostringstream out;
  EXPECT_NE(EmitReport(results, "json", out), 0);
  results.pop_back();
  EXPECT_EQ(EmitReport(results, "json", out), 0);
  EXPECT_ANY_THROW(EmitReport(results, "xml", out));
}

TEST(Report, JsonRoundTrip) {
  const std::vector<ExperimentResult> results = {
      {"C1", "first, with comma", true, {{"rate", 0.1234567890123456789}, {"n", 3}}, ""},
      {"C2", "quote \"here\"", false, {{"tiny", 1e-300}}, "note"}};
  EXPECT_EQ(ResultsFromJson(Json::parse(ResultsToJson(results).dump())), results);
  const std::string csv = ResultsToCsv(results);
  EXPECT_NE(csv.find("\"first, with comma\""), std::string::npos);
  EXPECT_NE(csv.find("\"quote \"\"here\"\"\""), std::string::npos);
}

}  // namespace
}  // namespace tocrs
