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

// Linear programs in "maximize c^T x subject to rows and bounds" form, solved
// by a two-phase revised simplex method with a dense basis inverse.

#ifndef TOCRS_SIMPLEX_H_
#define TOCRS_SIMPLEX_H_

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace tocrs {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct LPRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

class LPModel {
 public:
  int AddVariable(std::string name, double objective, double lower = 0.0,
                  double upper = kInfinity);
  int AddRow(std::string name, std::vector<std::pair<int, double>> terms,
             Relation relation, double rhs);

  int num_variables() const { return static_cast<int>(names_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<LPRow>& rows() const { return rows_; }
  int FindRow(const std::string& name) const;  // -1 if absent

  // Largest violation of any row or bound at x.
  double MaxResidual(const std::vector<double>& x) const;
  double Objective(const std::vector<double>& x) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<LPRow> rows_;
};

enum class LPStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* LPStatusName(LPStatus status);

struct LPSolution {
  LPStatus status = LPStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  bool used_bland = false;
};

struct SimplexOptions {
  int max_iterations = 200000;
  double tolerance = 1e-9;
  int degenerate_switch = 50;  // consecutive degenerate pivots before Bland
  int refactor_period = 100;
};

LPSolution SolveLP(const LPModel& model, const SimplexOptions& options = {});

}  // namespace tocrs

#endif  // TOCRS_SIMPLEX_H_
