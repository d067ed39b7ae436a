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

// Bernoulli factories: coins built from other coins whose bias is an exact
// function of the inputs' biases. Every sample reports how many leaf tosses it
// consumed, so a coin shared by several parents is never counted twice.

#ifndef TOCRS_BERNOULLI_H_
#define TOCRS_BERNOULLI_H_

#include <functional>
#include <memory>
#include <optional>

#include "tocrs/random.h"

namespace tocrs {

struct CoinSample {
  bool outcome = false;
  long long tosses = 0;
};

class Coin {
 public:
  virtual ~Coin() = default;

  // One draw; adds the consumed tosses to this coin's counter.
  CoinSample Sample(Rng& rng) {
    const CoinSample s = Draw(rng);
    tosses_ += s.tosses;
    ++samples_;
    return s;
  }
  bool Flip(Rng& rng) { return Sample(rng).outcome; }

  long long tosses() const { return tosses_; }
  long long samples() const { return samples_; }
  void ResetCounters() {
    tosses_ = 0;
    samples_ = 0;
  }
  virtual std::optional<double> declared_bias() const { return std::nullopt; }

 protected:
  virtual CoinSample Draw(Rng& rng) = 0;

 private:
  long long tosses_ = 0;
  long long samples_ = 0;
};

using CoinPtr = std::shared_ptr<Coin>;

// Leaf coin of known bias p; one toss per sample.
CoinPtr ConstantCoin(double p);

// Leaf coin backed by an arbitrary sampler; one toss per sample.
CoinPtr SamplerCoin(std::function<bool(Rng&)> sampler);

CoinPtr Negate(CoinPtr c);                 // 1 - p
CoinPtr Scale(CoinPtr c, double lambda);   // lambda * p
CoinPtr Average(CoinPtr c0, CoinPtr c1);   // (p0 + p1) / 2

// 2p, assuming p <= 1/2 - delta. The assumption cannot be checked at run time;
// violating it silently yields a wrong bias.
CoinPtr Double(CoinPtr c, double delta);

// p0 + p1, assuming p0 + p1 <= 1 - delta.
CoinPtr Add(CoinPtr c0, CoinPtr c1, double delta);
// p1 - p0, assuming p1 - p0 >= delta.
CoinPtr Subtract(CoinPtr c0, CoinPtr c1, double delta);

// p0 / p1, assuming p1 - p0 >= delta.
class DivisionCoin : public Coin {
 public:
  DivisionCoin(CoinPtr c0, CoinPtr c1, double delta);

  // Rounds used by the most recent sample and over all samples.
  long long last_rounds() const { return last_rounds_; }
  long long total_rounds() const { return total_rounds_; }

 protected:
  CoinSample Draw(Rng& rng) override;

 private:
  CoinPtr c0_;
  CoinPtr difference_;
  long long last_rounds_ = 0;
  long long total_rounds_ = 0;
};

std::shared_ptr<DivisionCoin> Divide(CoinPtr c0, CoinPtr c1, double delta);

// Truncation level constant of the doubling construction: the walk is cut at
// ceil(kDoublingLevel / eps) for slack eps.
inline constexpr double kDoublingLevel = 4.0;

// Measured constant D with E[tosses of Double(c, delta)] <= D * (1 + 1/delta)
// over every input bias satisfying the precondition.
inline constexpr double kDoublingTossConstant = 2.5;

// Expected-toss bound of Divide with constant leaf coins.
double DivideTossBound(double p1, double delta);

}  // namespace tocrs

#endif  // TOCRS_BERNOULLI_H_
