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

// Online contention resolution schemes over the n x m agent/item grid and
// for stochastic knapsack, together with the sampling-based estimator that
// replaces exact event probabilities when they are too costly to compute.
//
// Grid schemes receive elements in row batches: agents in index order, items
// in index order within an agent, each accompanied by the row type d_i.

#ifndef TOCRS_SCHEMES_H_
#define TOCRS_SCHEMES_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tocrs/core.h"
#include "tocrs/random.h"

namespace tocrs {

// Cap on distribution support sizes in exact probability computations.
inline constexpr long long kMaxDpStates = 1'000'000;

struct ProbabilityMode {
  enum class Kind { kOracle, kEstimated };
  Kind kind = Kind::kOracle;
  double epsilon = 0.05;
  double delta = 0.01;
  std::uint64_t seed = 0;  // drives the estimation simulations

  static ProbabilityMode Oracle() { return {}; }
  static ProbabilityMode Estimated(double epsilon, double delta, std::uint64_t seed) {
    return {Kind::kEstimated, epsilon, delta, seed};
  }
  bool estimated() const { return kind == Kind::kEstimated; }
};

// T = ceil(ln(2 N / delta) / (2 eps^2)) for N elements.
int EstimatorSampleCount(double epsilon, double delta, long long elements);

// Monte Carlo estimate of an event probability from T replays.
class EventEstimator {
 public:
  EventEstimator(double epsilon, double delta, long long elements);

  int samples() const { return samples_; }
  double epsilon() const { return epsilon_; }
  // Fraction of T simulator calls returning true.
  double Estimate(const std::function<bool(Rng&)>& simulator, Rng& rng) const;
  // mean + eps, the one-sided surrogate used by the schemes.
  double UpperSurrogate(double mean) const { return mean + epsilon_; }

 private:
  double epsilon_;
  int samples_;
};

enum class Branch { kNone, kHeavy, kLight };
const char* BranchName(Branch branch);

// Online selector over the grid with a declared (b, c) guarantee.
class Scheme {
 public:
  Scheme(int n, int m, double b, double c) : n_(n), m_(m), b_(b), c_(c) {}
  virtual ~Scheme() = default;

  virtual std::string name() const = 0;
  int n() const { return n_; }
  int m() const { return m_; }
  double b() const { return b_; }
  double declared_c() const { return c_; }

  // Starts a fresh run.
  void Begin(Rng& rng);
  // Presents element (i, j) of a row whose type is d; returns the irrevocable
  // decision. Inactive elements are never selected.
  bool Offer(int i, int j, int d, bool active, Rng& rng);

  const std::vector<Cell>& selected() const { return selected_; }
  Branch branch() const { return branch_; }
  // Selection decisions in this run that used a probability clamped to 1.
  long long run_clamps() const { return run_clamps_; }
  // Table entries whose normalizer had to be clamped.
  virtual long long table_clamps() const { return 0; }

  // Exact Pr[(i, j) selected | active, row type d], when computable.
  virtual std::optional<double> SelectionProbability(int i, int j, int d) const;

  virtual std::unique_ptr<Scheme> Clone() const = 0;

 protected:
  virtual void DoBegin(Rng& rng) { (void)rng; }
  virtual bool DoOffer(int i, int j, int d, Rng& rng) = 0;
  void set_branch(Branch branch) { branch_ = branch; }
  // Flips a coin of bias p, recording a clamp when `clamped`.
  bool FlipCounted(Rng& rng, double p, bool clamped);

 private:
  int n_;
  int m_;
  double b_;
  double c_;
  std::vector<Cell> selected_;
  Branch branch_ = Branch::kNone;
  long long run_clamps_ = 0;
};

// Presents every element of `active` in arrival order; returns the selection.
std::vector<Cell> RunScheme(Scheme& scheme, const ActiveSet& active, Rng& rng);

// Selects every active element (c = 1); valid only for unconstrained grids.
std::unique_ptr<Scheme> AlwaysSelectScheme(int n, int m, double b);

// One-dimensional OCRS over a row or a column slice. Positions arrive in index
// order; `type` is the row type for row slices and 0 for column slices.
class SliceOcrs {
 public:
  virtual ~SliceOcrs() = default;
  virtual double b() const = 0;
  virtual double c() const = 0;
  virtual void Begin() = 0;
  virtual bool Offer(int position, int type, Rng& rng) = 0;  // active elements only
  virtual std::unique_ptr<SliceOcrs> Clone() const = 0;
};

// At most `cap` selections per row; activation of position j under type d is
// b * activation(d, j). Every active element is selected with probability
// exactly c, the largest value (found by bisection) for which all
// availability probabilities stay at least c.
std::unique_ptr<SliceOcrs> KUniformRowOcrs(double b, int cap,
                                           const std::vector<double>& type_probs,
                                           const Matrix& activation);

// At most one selection per column, c = 1/(1+b). Requires sum(w) <= 1.
std::unique_ptr<SliceOcrs> SingleCopyColumnOcrs(double b, const std::vector<double>& w);

// Selected iff both its row OCRS and its column OCRS select it.
// Selects every active element; c = 1.
std::unique_ptr<SliceOcrs> UnconstrainedSliceOcrs(double b);

struct VhSlices {
  std::vector<std::unique_ptr<SliceOcrs>> rows;
  std::vector<std::unique_ptr<SliceOcrs>> columns;
};

// Row and column OCRSs used by VhScheme.
VhSlices BuildVhSlices(double b, const VerticalHorizontal& constraint,
                       const TwoLevelProcess& process);

std::unique_ptr<Scheme> ComposeVh(std::vector<std::unique_ptr<SliceOcrs>> rows,
                                  std::vector<std::unique_ptr<SliceOcrs>> columns);

// VH scheme for the shipped blocks: k-uniform rows, single-copy columns
// (column caps >= 2 use the calibrated uniform OCRS).
std::unique_ptr<Scheme> VhScheme(double b, const VerticalHorizontal& constraint,
                                 const TwoLevelProcess& process);

// Heavy/light knapsack tOCRS with c = 1/(2+8b) (oracle) or
// c (1-delta)/(1+10 eps) (estimated).
std::unique_ptr<Scheme> KnapsackTocrs(double b, const Knapsack& constraint,
                                      const TwoLevelProcess& process,
                                      const ProbabilityMode& mode = {});

// Multi-choice knapsack tOCRS with c = 1/(2+7b) (oracle) or
// c (1-delta)/(1+8 eps) (estimated).
std::unique_ptr<Scheme> MultiChoiceKnapsackTocrs(double b, const MultiChoiceKnapsack& constraint,
                                                 const TwoLevelProcess& process,
                                                 const ProbabilityMode& mode = {});

// Scheme matching the constraint variant: VH for single-copy, k-uniform and
// VH constraints, the knapsack schemes otherwise.
std::unique_ptr<Scheme> MakeScheme(const FeasibilityConstraint& constraint,
                                   const TwoLevelProcess& process, double b,
                                   const ProbabilityMode& mode = {});

// Elements with finite random weights in [0, capacity]; weight 0 stands for
// an element that does not arrive.
struct StochasticKnapsackInstance {
  std::vector<std::vector<double>> weights;  // support per element
  std::vector<std::vector<double>> probs;
  double capacity = 0.0;

  int size() const { return static_cast<int>(weights.size()); }
  double k_star() const;  // max support weight / capacity
};

void Validate(const StochasticKnapsackInstance& instance);

class StochasticKnapsackOcrs {
 public:
  enum class Regime { kGamma, kSixth };

  StochasticKnapsackOcrs(const StochasticKnapsackInstance& instance,
                         const ProbabilityMode& mode = {});

  double declared_c() const { return declared_c_; }
  double gamma() const { return gamma_; }
  Regime regime() const { return regime_; }
  const StochasticKnapsackInstance& instance() const { return instance_; }

  void Begin(Rng& rng);
  // Element i arrives with the weight at index `support_index` of its support.
  bool Offer(int i, int support_index, Rng& rng);
  double load() const { return load_; }
  Branch branch() const { return branch_; }
  long long run_clamps() const { return run_clamps_; }
  long long table_clamps() const { return table_clamps_; }

  // Exact Pr[selected | weight index], when computable.
  std::optional<double> SelectionProbability(int i, int support_index) const;

 private:
  StochasticKnapsackInstance instance_;
  Regime regime_ = Regime::kGamma;
  double gamma_ = 0.0;
  double declared_c_ = 0.0;
  // Per element and support index: selection probability once the element
  // is admissible in the active branch, and whether it was clamped.
  std::vector<std::vector<double>> select_;
  std::vector<std::vector<char>> clamped_;
  std::vector<std::vector<double>> heavy_avail_;  // Pr[A_i] for heavy weights
  std::optional<std::vector<std::vector<double>>> exact_;
  long long table_clamps_ = 0;

  Branch branch_ = Branch::kNone;
  double load_ = 0.0;
  bool heavy_taken_ = false;
  long long run_clamps_ = 0;
};

}  // namespace tocrs

#endif  // TOCRS_SCHEMES_H_
