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

#ifndef TOCRS_RANDOM_H_
#define TOCRS_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace tocrs {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream `index` under `master`. Trials, workers and estimators all
// derive their engines through this so results never depend on scheduling.
inline std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index) {
  return MixSeed(MixSeed(master) ^ MixSeed(index + 0x632be59bd9b4e019ULL));
}

inline Rng MakeRng(std::uint64_t master, std::uint64_t index) {
  return Rng(DeriveSeed(master, index));
}

// Uniform double in [0, 1) with 53 random bits.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Bernoulli(p). Exact for p <= 0 (never) and p >= 1 (always).
inline bool Flip(Rng& rng, double p) { return Uniform01(rng) < p; }

// Inverse-CDF draw from a finite distribution given by `probs`.
inline int SampleIndex(Rng& rng, std::span<const double> probs) {
  const double u = Uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (int k = 0; k < static_cast<int>(probs.size()); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;
}

}  // namespace tocrs

#endif  // TOCRS_RANDOM_H_
