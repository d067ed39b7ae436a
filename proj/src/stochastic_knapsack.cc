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

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "tocrs/errors.h"
#include "tocrs/schemes.h"

namespace tocrs {
namespace {

using LoadDist = std::map<double, double>;

// Pr[C_i(k)] for every support weight of every element, under the given
// admission probabilities `select` (indexed like the supports). Elements for
// which `admits` is false never change the load.
template <typename Admits>
std::vector<std::vector<double>> FitProbabilities(const StochasticKnapsackInstance& inst,
                                                  const std::vector<std::vector<double>>& select,
                                                  Admits admits) {
  std::vector<std::vector<double>> fit(inst.size());
  LoadDist dist{{0.0, 1.0}};
  for (int i = 0; i < inst.size(); ++i) {
    const auto& ks = inst.weights[i];
    fit[i].assign(ks.size(), 0.0);
    LoadDist next;
    for (const auto& [w, mass] : dist) {
      double stay = 1.0;
      for (size_t t = 0; t < ks.size(); ++t) {
        if (!admits(ks[t]) || !(w + ks[t] <= inst.capacity)) continue;
        fit[i][t] += mass;
        const double move = inst.probs[i][t] * select[i][t];
        if (move > 0.0) next[w + ks[t]] += mass * move;
        stay -= move;
      }
      next[w] += mass * stay;
    }
    dist = std::move(next);
    if (static_cast<long long>(dist.size()) > kMaxDpStates) {
      throw TooLargeError("load distribution exceeds the exact-computation state cap");
    }
  }
  return fit;
}

}  // namespace

double StochasticKnapsackInstance::k_star() const {
  if (capacity <= 0.0) return 0.0;
  double top = 0.0;
  for (const auto& ks : weights) {
    for (double k : ks) top = std::max(top, k);
  }
  return top / capacity;
}

void Validate(const StochasticKnapsackInstance& instance) {
  if (instance.weights.size() != instance.probs.size()) {
    throw DimensionError("weights and probabilities disagree in element count");
  }
  if (!(instance.capacity >= 0.0) || !std::isfinite(instance.capacity)) {
    throw PreconditionError("capacity must be finite and nonnegative");
  }
  double expected = 0.0;
  for (int i = 0; i < instance.size(); ++i) {
    const auto& ks = instance.weights[i];
    const auto& ps = instance.probs[i];
    if (ks.empty() || ks.size() != ps.size()) {
      throw DimensionError("element " + std::to_string(i) + " has a malformed support");
    }
    double total = 0.0;
    for (size_t t = 0; t < ks.size(); ++t) {
      if (!(ks[t] >= 0.0 && ks[t] <= instance.capacity)) {
        throw PreconditionError("support weight outside [0, K] for element " +
                                std::to_string(i));
      }
      if (!(ps[t] >= 0.0 && ps[t] <= 1.0)) {
        throw PreconditionError("probability outside [0, 1] for element " + std::to_string(i));
      }
      total += ps[t];
      expected += ps[t] * ks[t];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw PreconditionError("weight distribution of element " + std::to_string(i) +
                              " does not sum to 1");
    }
  }
  if (expected > instance.capacity * (1.0 + 1e-12) + 1e-12) {
    throw PreconditionError("inadmissible instance: total expected weight exceeds capacity");
  }
}

StochasticKnapsackOcrs::StochasticKnapsackOcrs(const StochasticKnapsackInstance& instance,
                                               const ProbabilityMode& mode)
    : instance_(instance) {
  Validate(instance_);
  const int n = instance_.size();
  const double cap = instance_.capacity;
  const double half = cap / 2.0;
  const double k_star = instance_.k_star();
  const double gamma = (1.0 - k_star) / (2.0 - k_star);
  regime_ = gamma >= 1.0 / 6.0 ? Regime::kGamma : Regime::kSixth;
  gamma_ = regime_ == Regime::kGamma ? gamma : 1.0 / 3.0;
  declared_c_ = regime_ == Regime::kGamma ? gamma : 1.0 / 6.0;
  if (mode.estimated()) {
    declared_c_ *= (1.0 - mode.delta) / (1.0 + 2.0 * mode.epsilon / declared_c_);
  }

  const bool sixth = regime_ == Regime::kSixth;
  auto admits = [&](double k) { return !sixth || k <= half; };
  select_.resize(n);
  clamped_.resize(n);
  heavy_avail_.resize(n);
  double heavy_before = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& ks = instance_.weights[i];
    select_[i].assign(ks.size(), 0.0);
    clamped_[i].assign(ks.size(), 0);
    heavy_avail_[i].assign(ks.size(), 1.0);
    double heavy_mass = 0.0;
    for (size_t t = 0; t < ks.size(); ++t) {
      if (admits(ks[t])) continue;
      heavy_avail_[i][t] = 1.0 - heavy_before / 3.0;
      select_[i][t] = std::min(1.0, 1.0 / (3.0 * heavy_avail_[i][t]));
      heavy_mass += instance_.probs[i][t];
    }
    heavy_before += heavy_mass;
  }

  auto set_light = [&](int i, size_t t, double fit, bool estimated) {
    const double p = fit > 0.0 ? gamma_ / fit : 2.0;
    if (p <= 1.0) {
      select_[i][t] = p;
      return;
    }
    if (!estimated && p > 1.0 + 1e-9) {
      throw std::logic_error("exact selection probability above 1");
    }
    select_[i][t] = 1.0;
    if (estimated) {
      clamped_[i][t] = 1;
      ++table_clamps_;
    }
  };

  if (!mode.estimated()) {
    // Exact pass: coins of element i depend only on earlier elements.
    LoadDist dist{{0.0, 1.0}};
    for (int i = 0; i < n; ++i) {
      const auto& ks = instance_.weights[i];
      LoadDist next;
      std::vector<double> fit(ks.size(), 0.0);
      for (const auto& [w, mass] : dist) {
        for (size_t t = 0; t < ks.size(); ++t) {
          if (admits(ks[t]) && w + ks[t] <= cap) fit[t] += mass;
        }
      }
      for (size_t t = 0; t < ks.size(); ++t) {
        if (admits(ks[t])) set_light(i, t, fit[t], false);
      }
      for (const auto& [w, mass] : dist) {
        double stay = 1.0;
        for (size_t t = 0; t < ks.size(); ++t) {
          if (!admits(ks[t]) || !(w + ks[t] <= cap)) continue;
          const double move = instance_.probs[i][t] * select_[i][t];
          if (move > 0.0) next[w + ks[t]] += mass * move;
          stay -= move;
        }
        next[w] += mass * stay;
      }
      dist = std::move(next);
      if (static_cast<long long>(dist.size()) > kMaxDpStates) {
        throw TooLargeError("load distribution exceeds the exact-computation state cap");
      }
    }
    exact_.emplace(n);
    for (int i = 0; i < n; ++i) {
      (*exact_)[i].assign(instance_.weights[i].size(), declared_c_);
    }
    return;
  }

  const EventEstimator estimator(mode.epsilon, mode.delta, n);
  for (int i = 0; i < n; ++i) {
    const auto& ks = instance_.weights[i];
    for (size_t t = 0; t < ks.size(); ++t) {
      if (!admits(ks[t])) continue;
      const double k = ks[t];
      auto simulate = [&](Rng& rng) {
        double load = 0.0;
        for (int r = 0; r < i; ++r) {
          const int idx = SampleIndex(rng, instance_.probs[r]);
          const double kr = instance_.weights[r][idx];
          if (!admits(kr) || !(load + kr <= cap)) continue;
          if (tocrs::Flip(rng, select_[r][idx])) load += kr;
        }
        return load + k <= cap;
      };
      // Every support weight of element i replays the same simulated loads.
      Rng rng = MakeRng(mode.seed, static_cast<std::uint64_t>(i));
      set_light(i, t, estimator.UpperSurrogate(estimator.Estimate(simulate, rng)), true);
    }
  }
  try {
    const auto fit = FitProbabilities(instance_, select_, admits);
    exact_.emplace(n);
    for (int i = 0; i < n; ++i) {
      const auto& ks = instance_.weights[i];
      (*exact_)[i].assign(ks.size(), 0.0);
      for (size_t t = 0; t < ks.size(); ++t) {
        double p = admits(ks[t]) ? fit[i][t] * select_[i][t] : 1.0 / 3.0;
        if (sixth) p *= 0.5;
        (*exact_)[i][t] = p;
      }
    }
  } catch (const TooLargeError&) {
    exact_.reset();
  }
}

void StochasticKnapsackOcrs::Begin(Rng& rng) {
  branch_ = regime_ == Regime::kGamma ? Branch::kNone
            : Flip(rng, 0.5)          ? Branch::kHeavy
                                      : Branch::kLight;
  load_ = 0.0;
  heavy_taken_ = false;
  run_clamps_ = 0;
}

bool StochasticKnapsackOcrs::Offer(int i, int support_index, Rng& rng) {
  if (i < 0 || i >= instance_.size() || support_index < 0 ||
      support_index >= static_cast<int>(instance_.weights[i].size())) {
    throw DimensionError("offer outside the instance");
  }
  const double k = instance_.weights[i][support_index];
  const bool heavy = regime_ == Regime::kSixth && k > instance_.capacity / 2.0;
  if (branch_ == Branch::kHeavy) {
    if (!heavy || heavy_taken_) return false;
    if (!Flip(rng, select_[i][support_index])) return false;
    heavy_taken_ = true;
    load_ += k;
    return true;
  }
  if (heavy || !(load_ + k <= instance_.capacity)) return false;
  const bool outcome = Flip(rng, select_[i][support_index]);
  if (clamped_[i][support_index]) ++run_clamps_;
  if (outcome) load_ += k;
  return outcome;
}

std::optional<double> StochasticKnapsackOcrs::SelectionProbability(int i,
                                                                   int support_index) const {
  if (!exact_) return std::nullopt;
  return (*exact_)[i][support_index];
}

}  // namespace tocrs
