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

#include "tocrs/mechanism.h"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "tocrs/errors.h"

namespace tocrs {
namespace {

constexpr double kKeepSlack = 1e-9;

// (c - eps) / p*, refusing p* meaningfully below c - eps.
double KeepProbability(double target, double pstar) {
  if (pstar < target - kKeepSlack) {
    throw std::logic_error("keep-coin precondition failed: selection probability " +
                           std::to_string(pstar) + " below " + std::to_string(target));
  }
  return pstar <= 0.0 ? 1.0 : std::min(1.0, target / pstar);
}

void CheckReports(std::span<const int> reports, const std::vector<AgentTypeSpace>& spaces) {
  if (reports.size() > spaces.size()) throw DimensionError("more reports than agents");
  for (size_t i = 0; i < reports.size(); ++i) {
    if (reports[i] < 0 || reports[i] >= spaces[i].size()) {
      throw DimensionError("report of agent " + std::to_string(i) + " outside its support");
    }
  }
}

void CheckEpsilon(double c, double epsilon, KeepMode keep) {
  if (!(epsilon >= 0.0)) throw PreconditionError("epsilon must be nonnegative");
  if (!(c - epsilon > 0.0)) throw PreconditionError("c - epsilon must be positive");
  if (keep != KeepMode::kKnownProbability && !(epsilon > 0.0)) {
    throw PreconditionError("this keep mode needs epsilon > 0");
  }
}

}  // namespace

const char* KeepModeName(KeepMode mode) {
  switch (mode) {
    case KeepMode::kKnownProbability: return "known";
    case KeepMode::kExactBernoulli: return "exact";
    case KeepMode::kEstimated: return "estimated";
  }
  return "known";
}

KeepMode ParseKeepMode(const std::string& name) {
  if (name == "known") return KeepMode::kKnownProbability;
  if (name == "exact") return KeepMode::kExactBernoulli;
  if (name == "estimated") return KeepMode::kEstimated;
  throw PreconditionError("unknown keep mode '" + name + "'");
}

const char* TraceKindName(TraceKind kind) {
  switch (kind) {
    case TraceKind::kReport: return "report";
    case TraceKind::kPayment: return "payment";
    case TraceKind::kActivation: return "activation";
    case TraceKind::kSelection: return "selection";
    case TraceKind::kKeepFlip: return "keep";
    case TraceKind::kAllocation: return "allocation";
  }
  return "report";
}

// ---------------------------------------------------------------------------
// Auctions.

Mechanism::Mechanism(AuctionInstance instance, InterimRule rule, const MechanismConfig& config)
    : instance_(std::move(instance)), rule_(std::move(rule)), config_(config) {
  process_ = InducedProcess(instance_, rule_);
  scheme_ = MakeScheme(instance_.constraint, process_, config_.b, config_.scheme_mode);
  Initialize();
}

Mechanism::Mechanism(AuctionInstance instance, InterimRule rule, const MechanismConfig& config,
                     std::unique_ptr<Scheme> scheme)
    : instance_(std::move(instance)),
      rule_(std::move(rule)),
      config_(config),
      scheme_(std::move(scheme)) {
  process_ = InducedProcess(instance_, rule_);
  if (!scheme_ || scheme_->n() != instance_.n || scheme_->m() != instance_.m) {
    throw DimensionError("scheme does not match the instance grid");
  }
  Initialize();
}

void Mechanism::Initialize() {
  Validate(instance_);
  if (!(config_.b > 0.0 && config_.b <= 1.0)) throw PreconditionError("b must lie in (0, 1]");
  if (scheme_->b() != config_.b) throw PreconditionError("scheme built for a different b");
  CheckEpsilon(c(), config_.epsilon, config_.keep);
  if (config_.keep != KeepMode::kEstimated) return;
  const ProbabilityMode& mode = config_.scheme_mode;
  const EventEstimator estimator(config_.epsilon, mode.delta,
                                 static_cast<long long>(instance_.n) * instance_.m);
  estimated_pstar_.resize(instance_.n);
  for (int i = 0; i < instance_.n; ++i) {
    const int types = instance_.type_spaces[i].size();
    estimated_pstar_[i].assign(types, std::vector<double>(instance_.m, 0.0));
    for (int r = 0; r < types; ++r) {
      for (int j = 0; j < instance_.m; ++j) {
        CoinPtr coin = PStarCoin(i, j, r);
        Rng rng = MakeRng(mode.seed ^ 0x5eedULL,
                          (static_cast<std::uint64_t>(i) * types + r) * instance_.m + j);
        estimated_pstar_[i][r][j] =
            estimator.Estimate([&](Rng& g) { return coin->Flip(g); }, rng);
      }
    }
  }
}

double Mechanism::ItemWeight(int i, int j) const {
  const Matrix* weights = KnapsackWeights(instance_.constraint);
  return weights ? (*weights)(i, j) : 1.0;
}

CoinPtr Mechanism::PStarCoin(int i, int j, int r) const {
  if (i < 0 || i >= instance_.n || j < 0 || j >= instance_.m || r < 0 ||
      r >= instance_.type_spaces[i].size()) {
    throw DimensionError("p* coin outside the instance");
  }
  std::shared_ptr<Scheme> sim = scheme_->Clone();
  const double b = config_.b;
  return SamplerCoin([this, sim, b, i, j, r](Rng& rng) {
    sim->Begin(rng);
    for (int a = 0; a <= i; ++a) {
      const int type = a == i ? r : SampleIndex(rng, instance_.type_spaces[a].probs);
      const int end = a == i ? j + 1 : instance_.m;
      for (int item = 0; item < end; ++item) {
        const bool active = (a == i && item == j) || Flip(rng, b * rule_.pi[a](type, item));
        const bool chosen = sim->Offer(a, item, type, active, rng);
        if (a == i && item == j) return chosen;
      }
    }
    return false;
  });
}

double Mechanism::KnownPStar(int i, int j, int r) const {
  const std::optional<double> p = scheme_->SelectionProbability(i, j, r);
  if (!p) throw PreconditionError("scheme has no exact selection probability; use another keep mode");
  return *p;
}

CoinPtr Mechanism::KeepCoin(int i, int j, int r) const {
  const double target = c() - config_.epsilon;
  switch (config_.keep) {
    case KeepMode::kKnownProbability:
      return ConstantCoin(KeepProbability(target, KnownPStar(i, j, r)));
    case KeepMode::kExactBernoulli:
      return Divide(ConstantCoin(target), PStarCoin(i, j, r), config_.epsilon);
    case KeepMode::kEstimated: {
      const double p = estimated_pstar_[i][r][j];
      return ConstantCoin(p <= target ? 1.0 : target / p);
    }
  }
  throw std::logic_error("unreachable keep mode");
}

bool Mechanism::FlipKeep(int i, int j, int r, Rng& rng, RunTrace* trace) const {
  const double target = c() - config_.epsilon;
  bool keep = false;
  long long tosses = 0;
  switch (config_.keep) {
    case KeepMode::kKnownProbability:
      keep = Flip(rng, KeepProbability(target, KnownPStar(i, j, r)));
      break;
    case KeepMode::kExactBernoulli: {
      CoinPtr pstar = PStarCoin(i, j, r);
      auto coin = Divide(ConstantCoin(target), pstar, config_.epsilon);
      keep = coin->Flip(rng);
      tosses = pstar->tosses();
      break;
    }
    case KeepMode::kEstimated: {
      const double p = estimated_pstar_[i][r][j];
      keep = Flip(rng, p <= target ? 1.0 : target / p);
      break;
    }
  }
  ++trace->keep_flips;
  trace->pstar_tosses += tosses;
  trace->events.push_back({TraceKind::kKeepFlip, i, j, keep ? 1.0 : 0.0, Branch::kNone, tosses});
  return keep;
}

MechanismOutcome Mechanism::RunSequential(std::span<const int> reports, Rng& rng) const {
  CheckReports(reports, instance_.type_spaces);
  MechanismOutcome out;
  RunTrace& trace = out.trace;
  std::unique_ptr<Scheme> scheme = scheme_->Clone();
  scheme->Begin(rng);
  for (int i = 0; i < static_cast<int>(reports.size()); ++i) {
    const int r = reports[i];
    trace.events.push_back({TraceKind::kReport, i, -1, static_cast<double>(r)});
    const double pay = payment_factor() * rule_.q[i][r];
    out.payments.push_back(pay);
    out.revenue += pay;
    trace.events.push_back({TraceKind::kPayment, i, -1, pay});
    for (int j = 0; j < instance_.m; ++j) {
      const bool active = Flip(rng, config_.b * rule_.pi[i](r, j));
      trace.events.push_back({TraceKind::kActivation, i, j, active ? 1.0 : 0.0});
      if (!scheme->Offer(i, j, r, active, rng)) continue;
      trace.events.push_back({TraceKind::kSelection, i, j, 1.0, scheme->branch()});
      if (!FlipKeep(i, j, r, rng, &trace)) continue;
      out.allocation.push_back({i, j});
      trace.total_weight += ItemWeight(i, j);
      trace.events.push_back({TraceKind::kAllocation, i, j, ItemWeight(i, j)});
    }
  }
  return out;
}

MechanismOutcome Mechanism::RunBatch(std::span<const int> reports, Rng& rng) const {
  CheckReports(reports, instance_.type_spaces);
  if (static_cast<int>(reports.size()) != instance_.n) {
    throw DimensionError("the batch framework needs every agent's report");
  }
  MechanismOutcome out;
  RunTrace& trace = out.trace;
  for (int i = 0; i < instance_.n; ++i) {
    const int r = reports[i];
    trace.events.push_back({TraceKind::kReport, i, -1, static_cast<double>(r)});
    const double pay = payment_factor() * rule_.q[i][r];
    out.payments.push_back(pay);
    out.revenue += pay;
    trace.events.push_back({TraceKind::kPayment, i, -1, pay});
  }
  ActiveSet active{instance_.n, instance_.m, {}, {reports.begin(), reports.end()}};
  active.bits.resize(static_cast<size_t>(instance_.n) * instance_.m);
  for (int i = 0; i < instance_.n; ++i) {
    for (int j = 0; j < instance_.m; ++j) {
      const bool on = Flip(rng, config_.b * rule_.pi[i](reports[i], j));
      active.bits[static_cast<size_t>(i) * instance_.m + j] = on ? 1 : 0;
      trace.events.push_back({TraceKind::kActivation, i, j, on ? 1.0 : 0.0});
    }
  }
  std::unique_ptr<Scheme> scheme = scheme_->Clone();
  const std::vector<Cell> selected = RunScheme(*scheme, active, rng);
  for (const Cell& cell : selected) {
    trace.events.push_back({TraceKind::kSelection, cell.agent, cell.item, 1.0, scheme->branch()});
  }
  for (const Cell& cell : selected) {
    if (!FlipKeep(cell.agent, cell.item, reports[cell.agent], rng, &trace)) continue;
    out.allocation.push_back(cell);
    trace.total_weight += ItemWeight(cell.agent, cell.item);
    trace.events.push_back(
        {TraceKind::kAllocation, cell.agent, cell.item, ItemWeight(cell.agent, cell.item)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Procurement.

StochasticKnapsackInstance PaymentKnapsack(const ProcurementInstance& instance,
                                           const ProcurementInterimRule& rule) {
  Validate(instance);
  StochasticKnapsackInstance sk;
  sk.capacity = instance.budget;
  double expected = 0.0;
  for (int i = 0; i < instance.n; ++i) {
    const AgentTypeSpace& space = instance.cost_spaces[i];
    std::vector<double> weights(space.size());
    for (int r = 0; r < space.size(); ++r) {
      weights[r] = std::clamp(rule.q[i][r], 0.0, instance.budget);
      expected += space.probs[r] * weights[r];
    }
    sk.weights.push_back(std::move(weights));
    sk.probs.push_back(space.probs);
  }
  // LP round-off may leave the expected payment a hair above the budget.
  if (expected > instance.budget) {
    if (expected > instance.budget + 1e-7 * std::max(1.0, instance.budget)) {
      throw PreconditionError("expected payments exceed the budget");
    }
    const double scale = instance.budget / expected;
    for (auto& weights : sk.weights) {
      for (double& w : weights) w *= scale;
    }
  }
  return sk;
}

ProcurementMechanism::ProcurementMechanism(ProcurementInstance instance,
                                           ProcurementInterimRule rule,
                                           const ProcurementConfig& config)
    : instance_(std::move(instance)),
      rule_(std::move(rule)),
      config_(config),
      ocrs_(PaymentKnapsack(instance_, rule_), config.ocrs_mode) {
  CheckEpsilon(c(), config_.epsilon, config_.keep);
  if (config_.keep != KeepMode::kEstimated) return;
  const EventEstimator estimator(config_.epsilon, config_.ocrs_mode.delta, instance_.n);
  estimated_pstar_.resize(instance_.n);
  for (int i = 0; i < instance_.n; ++i) {
    const int types = instance_.cost_spaces[i].size();
    estimated_pstar_[i].assign(types, 0.0);
    for (int r = 0; r < types; ++r) {
      CoinPtr coin = PStarCoin(i, r);
      Rng rng = MakeRng(config_.ocrs_mode.seed ^ 0x5eedULL,
                        static_cast<std::uint64_t>(i) * types + r);
      estimated_pstar_[i][r] = estimator.Estimate([&](Rng& g) { return coin->Flip(g); }, rng);
    }
  }
}

CoinPtr ProcurementMechanism::PStarCoin(int i, int r) const {
  if (i < 0 || i >= instance_.n || r < 0 || r >= instance_.cost_spaces[i].size()) {
    throw DimensionError("p* coin outside the instance");
  }
  auto sim = std::make_shared<StochasticKnapsackOcrs>(ocrs_);
  return SamplerCoin([this, sim, i, r](Rng& rng) {
    sim->Begin(rng);
    for (int a = 0; a < i; ++a) {
      sim->Offer(a, SampleIndex(rng, instance_.cost_spaces[a].probs), rng);
    }
    return sim->Offer(i, r, rng);
  });
}

double ProcurementMechanism::KnownPStar(int i, int r) const {
  const std::optional<double> p = ocrs_.SelectionProbability(i, r);
  if (!p) throw PreconditionError("OCRS has no exact selection probability; use another keep mode");
  return *p;
}

CoinPtr ProcurementMechanism::KeepCoin(int i, int r) const {
  const double target = c() - config_.epsilon;
  switch (config_.keep) {
    case KeepMode::kKnownProbability:
      return ConstantCoin(KeepProbability(target, KnownPStar(i, r)));
    case KeepMode::kExactBernoulli:
      return Divide(ConstantCoin(target), PStarCoin(i, r), config_.epsilon);
    case KeepMode::kEstimated: {
      const double p = estimated_pstar_[i][r];
      return ConstantCoin(p <= target ? 1.0 : target / p);
    }
  }
  throw std::logic_error("unreachable keep mode");
}

ProcurementOutcome ProcurementMechanism::Run(std::span<const int> reports, Rng& rng) const {
  CheckReports(reports, instance_.cost_spaces);
  ProcurementOutcome out;
  RunTrace& trace = out.trace;
  const double target = c() - config_.epsilon;
  StochasticKnapsackOcrs ocrs = ocrs_;
  ocrs.Begin(rng);
  for (int i = 0; i < static_cast<int>(reports.size()); ++i) {
    const int r = reports[i];
    trace.events.push_back({TraceKind::kReport, i, -1, static_cast<double>(r)});
    double pay = 0.0;
    if (ocrs.Offer(i, r, rng)) {
      trace.events.push_back({TraceKind::kSelection, i, -1, payment(i, r), ocrs.branch()});
      bool keep = false;
      long long tosses = 0;
      if (config_.keep == KeepMode::kExactBernoulli) {
        CoinPtr pstar = PStarCoin(i, r);
        keep = Divide(ConstantCoin(target), pstar, config_.epsilon)->Flip(rng);
        tosses = pstar->tosses();
      } else {
        keep = KeepCoin(i, r)->Flip(rng);
      }
      ++trace.keep_flips;
      trace.pstar_tosses += tosses;
      trace.events.push_back({TraceKind::kKeepFlip, i, -1, keep ? 1.0 : 0.0, Branch::kNone, tosses});
      if (keep) pay = payment(i, r);
    }
    out.payments.push_back(pay);
    out.total_payment += pay;
    trace.total_weight = out.total_payment;
    trace.events.push_back({TraceKind::kPayment, i, -1, pay});
    for (int j = 0; j < instance_.m; ++j) {
      if (!Flip(rng, target * rule_.pi[i](r, j))) continue;
      out.procured.push_back({i, j});
      out.buyer_value += instance_.values(i, j);
      trace.events.push_back({TraceKind::kAllocation, i, j, instance_.values(i, j)});
    }
  }
  return out;
}

}  // namespace tocrs
