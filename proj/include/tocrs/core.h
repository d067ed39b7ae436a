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

// Domain types shared by every module: type spaces, auction instances,
// feasibility constraints over the n x m agent/item grid, and two-level
// stochastic processes together with their samplers and feasibility checks.

#ifndef TOCRS_CORE_H_
#define TOCRS_CORE_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tocrs/random.h"

namespace tocrs {

// Absolute tolerance for every polytope membership check.
inline constexpr double kFeasibilityTolerance = 1e-9;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  std::span<double> row(int r) {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct Cell {
  int agent = 0;
  int item = 0;
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

// Finite distribution over an agent's valuation vectors (one value per item).
struct AgentTypeSpace {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
};

// Constraint variants. The set is closed so that every variant carries an
// explicit linear description of its row polytope and marginal polytope.
struct SingleCopyPerItem {};

struct KUniformPerAgent {
  std::vector<int> k;  // per-agent cardinality cap
};

struct Knapsack {
  Matrix weights;  // n x m, each in [0, capacity]
  double capacity = 0.0;
};

// Knapsack plus at most one selected cell per agent.
struct MultiChoiceKnapsack {
  Matrix weights;
  double capacity = 0.0;
};

// Vertical-horizontal constraint whose row and column slices are uniform
// matroids. A cap >= slice length leaves the slice unconstrained.
struct VerticalHorizontal {
  std::vector<int> row_caps;  // one per agent
  std::vector<int> col_caps;  // one per item
};

using FeasibilityConstraint =
    std::variant<SingleCopyPerItem, KUniformPerAgent, Knapsack, MultiChoiceKnapsack,
                 VerticalHorizontal>;

std::string VariantName(const FeasibilityConstraint& constraint);

struct AuctionInstance {
  int n = 0;
  int m = 0;
  std::vector<AgentTypeSpace> type_spaces;
  FeasibilityConstraint constraint;
};

// Activation model: row type d_i ~ row_probs[i], then cell (i, j) is active
// independently with probability activation[i](d_i, j).
struct TwoLevelProcess {
  int n = 0;
  int m = 0;
  std::vector<std::vector<double>> row_probs;
  std::vector<Matrix> activation;  // activation[i] is |D_i| x m

  int row_types(int agent) const { return static_cast<int>(row_probs[agent].size()); }
  // w(i, j) = sum_d Pr[d] x_{i,j}(d).
  Matrix Marginals() const;
};

struct ActiveSet {
  int n = 0;
  int m = 0;
  std::vector<std::uint8_t> bits;  // row-major
  std::vector<int> row_types;

  bool active(int i, int j) const { return bits[static_cast<size_t>(i) * m + j] != 0; }
  int count() const;
};

// One linear inequality sum_k coef_k * x_k <= rhs over a coordinate space.
struct LinearInequality {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;

  double Lhs(std::span<const double> x) const;
};

// Validation of the type invariants; throw PreconditionError/DimensionError.
void Validate(const AgentTypeSpace& space, int m);
void Validate(const FeasibilityConstraint& constraint, int n, int m);
void Validate(const AuctionInstance& instance);
void Validate(const TwoLevelProcess& process);

// Inequalities (beyond 0 <= x <= 1) describing P_F^i over the m coordinates
// of one agent's row.
std::vector<LinearInequality> RowPolytope(const FeasibilityConstraint& constraint,
                                          int agent, int m);
// Inequalities describing P_F over coordinates indexed i * m + j.
std::vector<LinearInequality> MarginalPolytope(const FeasibilityConstraint& constraint,
                                               int n, int m);

// Samples R(D, b x): one row type per agent, then independent activations.
ActiveSet SampleActiveSet(const TwoLevelProcess& process, double b, Rng& rng);

// Ex-post membership test. Knapsack capacities are compared with
// kFeasibilityTolerance slack to absorb floating-point summation.
bool IsFeasibleSet(const FeasibilityConstraint& constraint, int n, int m,
                   std::span<const Cell> selected);

struct SlackEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const { return rhs - lhs; }
};

struct FeasibilityReport {
  bool feasible = true;
  double max_violation = 0.0;
  std::vector<SlackEntry> entries;
};

// Checks that every row vector lies in P_F^i and the marginal matrix in P_F.
FeasibilityReport CheckProcessFeasibility(const TwoLevelProcess& process,
                                          const FeasibilityConstraint& constraint,
                                          double tolerance = kFeasibilityTolerance);

// Weight table of a knapsack-type constraint, or nullptr.
const Matrix* KnapsackWeights(const FeasibilityConstraint& constraint);
double KnapsackCapacity(const FeasibilityConstraint& constraint);

}  // namespace tocrs

#endif  // TOCRS_CORE_H_
