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

// Runs the acceptance experiments and prints one PASS/FAIL line each.
// Usage: acceptance_test [--seed S] [--scale F] [criterion ...]

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tocrs/harness.h"

int main(int argc, char** argv) {
  CLI::App app{"acceptance experiments"};
  tocrs::AcceptanceOptions options;
  std::vector<int> criteria;
  app.add_option("--seed", options.seed, "master seed");
  app.add_option("--scale", options.trial_scale, "trial count multiplier")
      ->check(CLI::PositiveNumber);
  app.add_option("criteria", criteria, "criteria to run (default: all)")
      ->check(CLI::Range(1, tocrs::kAcceptanceCriteria));
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty()) {
    for (int k = 1; k <= tocrs::kAcceptanceCriteria; ++k) criteria.push_back(k);
  }
  int failures = 0;
  for (int k : criteria) {
    try {
      const tocrs::ExperimentResult result = tocrs::RunAcceptance(k, options);
      std::printf("%s\n", tocrs::FormatResultLine(result).c_str());
      failures += result.pass ? 0 : 1;
    } catch (const std::exception& e) {
      std::printf("FAIL C%d: %s\n", k, e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed (seed %llu)\n",
              static_cast<int>(criteria.size()) - failures, criteria.size(),
              static_cast<unsigned long long>(options.seed));
  return failures == 0 ? 0 : 1;
}
