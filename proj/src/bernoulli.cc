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

#include "tocrs/bernoulli.h"

#include <cmath>
#include <utility>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

class ConstantCoinImpl : public Coin {
 public:
  explicit ConstantCoinImpl(double p) : p_(p) {}
  std::optional<double> declared_bias() const override { return p_; }

 protected:
  CoinSample Draw(Rng& rng) override { return {tocrs::Flip(rng, p_), 1}; }

 private:
  double p_;
};

class SamplerCoinImpl : public Coin {
 public:
  explicit SamplerCoinImpl(std::function<bool(Rng&)> sampler) : sampler_(std::move(sampler)) {}

 protected:
  CoinSample Draw(Rng& rng) override { return {sampler_(rng), 1}; }

 private:
  std::function<bool(Rng&)> sampler_;
};

class NegateCoin : public Coin {
 public:
  explicit NegateCoin(CoinPtr c) : c_(std::move(c)) {}

 protected:
  CoinSample Draw(Rng& rng) override {
    const CoinSample s = c_->Sample(rng);
    return {!s.outcome, s.tosses};
  }

 private:
  CoinPtr c_;
};

class ScaleCoin : public Coin {
 public:
  ScaleCoin(CoinPtr c, double lambda) : c_(std::move(c)), lambda_(ConstantCoin(lambda)) {}

 protected:
  CoinSample Draw(Rng& rng) override {
    const CoinSample gate = lambda_->Sample(rng);
    if (!gate.outcome) return {false, gate.tosses};
    const CoinSample s = c_->Sample(rng);
    return {s.outcome, gate.tosses + s.tosses};
  }

 private:
  CoinPtr c_;
  CoinPtr lambda_;
};

class AverageCoin : public Coin {
 public:
  AverageCoin(CoinPtr c0, CoinPtr c1) : c0_(std::move(c0)), c1_(std::move(c1)) {}

 protected:
  CoinSample Draw(Rng& rng) override {
    return tocrs::Flip(rng, 0.5) ? c1_->Sample(rng) : c0_->Sample(rng);
  }

 private:
  CoinPtr c0_;
  CoinPtr c1_;
};

// Linear factory for C * p with C = 2, p <= (1 - eps) / C.
//
// A walk on the nonnegative integers starts at 1. Each step tosses the input
// coin: heads moves down one, tails moves to i - 1 + G with G >= 1 geometric,
// Pr[G = g] = (1 - 1/C) C^{-(g-1)}. The probability of ever reaching 0 from i
// is (C p)^i. Once the walk reaches level i >= ceil(kDoublingLevel / eps), we
// write (C p)^i = beta^i (C p / beta)^i with beta = 1 - eps/2: flip a
// beta^i-coin, and on success continue the same walk from i with constant
// C / beta and slack (eps/2) / (1 - eps/2).
class DoubleCoin : public Coin {
 public:
  DoubleCoin(CoinPtr c, double delta) : c_(std::move(c)), delta_(delta) {}

 protected:
  CoinSample Draw(Rng& rng) override {
    double scale = 2.0;
    double eps = 2.0 * delta_;
    long long level = 1;
    long long tosses = 0;
    while (true) {
      const double limit = std::ceil(kDoublingLevel / eps);
      const double up = 1.0 / scale;
      while (level > 0 && static_cast<double>(level) < limit) {
        const CoinSample s = c_->Sample(rng);
        tosses += s.tosses;
        if (s.outcome) {
          --level;
        } else {
          long long g = 1;
          while (tocrs::Flip(rng, up)) ++g;
          level += g - 1;
        }
      }
      if (level == 0) return {true, tosses};
      const double beta = 1.0 - eps / 2.0;
      if (!tocrs::Flip(rng, std::pow(beta, static_cast<double>(level)))) return {false, tosses};
      scale /= beta;
      eps = (eps / 2.0) / beta;
    }
  }

 private:
  CoinPtr c_;
  double delta_;
};

void CheckDelta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
}

}  // namespace

CoinPtr ConstantCoin(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("coin bias must lie in [0, 1]");
  return std::make_shared<ConstantCoinImpl>(p);
}

CoinPtr SamplerCoin(std::function<bool(Rng&)> sampler) {
  return std::make_shared<SamplerCoinImpl>(std::move(sampler));
}

CoinPtr Negate(CoinPtr c) { return std::make_shared<NegateCoin>(std::move(c)); }

CoinPtr Scale(CoinPtr c, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw PreconditionError("lambda must lie in [0, 1]");
  return std::make_shared<ScaleCoin>(std::move(c), lambda);
}

CoinPtr Average(CoinPtr c0, CoinPtr c1) {
  return std::make_shared<AverageCoin>(std::move(c0), std::move(c1));
}

CoinPtr Double(CoinPtr c, double delta) {
  if (!(delta > 0.0) || !(delta < 0.5)) throw PreconditionError("delta must lie in (0, 1/2)");
  return std::make_shared<DoubleCoin>(std::move(c), delta);
}

CoinPtr Add(CoinPtr c0, CoinPtr c1, double delta) {
  CheckDelta(delta);
  return Double(Average(std::move(c0), std::move(c1)), delta / 2.0);
}

CoinPtr Subtract(CoinPtr c0, CoinPtr c1, double delta) {
  CheckDelta(delta);
  return Negate(Add(Negate(std::move(c1)), std::move(c0), delta));
}

DivisionCoin::DivisionCoin(CoinPtr c0, CoinPtr c1, double delta)
    : c0_(c0), difference_(Subtract(std::move(c0), std::move(c1), delta)) {}

CoinSample DivisionCoin::Draw(Rng& rng) {
  long long tosses = 0;
  last_rounds_ = 0;
  while (true) {
    ++last_rounds_;
    ++total_rounds_;
    if (!tocrs::Flip(rng, 0.5)) {
      const CoinSample s = c0_->Sample(rng);
      tosses += s.tosses;
      if (s.outcome) return {true, tosses};
    } else {
      const CoinSample s = difference_->Sample(rng);
      tosses += s.tosses;
      if (s.outcome) return {false, tosses};
    }
  }
}

std::shared_ptr<DivisionCoin> Divide(CoinPtr c0, CoinPtr c1, double delta) {
  CheckDelta(delta);
  return std::make_shared<DivisionCoin>(std::move(c0), std::move(c1), delta);
}

double DivideTossBound(double p1, double delta) {
  return 2.0 * kDoublingTossConstant * (1.0 + 1.0 / delta) / p1;
}

}  // namespace tocrs
