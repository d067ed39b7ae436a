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

#include "tocrs/harness.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tocrs/bernoulli.h"
#include "tocrs/errors.h"

namespace tocrs {
namespace {

double UniformIn(Rng& rng, double lo, double hi) { return lo + (hi - lo) * Uniform01(rng); }

std::vector<double> RandomProbs(int count, Rng& rng) {
  std::vector<double> probs(count);
  double total = 0.0;
  for (double& p : probs) {
    p = UniformIn(rng, 0.2, 1.0);
    total += p;
  }
  for (double& p : probs) p /= total;
  // Push the rounding residue onto the largest entry.
  double sum = 0.0;
  for (double p : probs) sum += p;
  *std::max_element(probs.begin(), probs.end()) += 1.0 - sum;
  return probs;
}

double Quantize(double x, int grid) {
  return grid > 0 ? std::round(x * grid) / grid : x;
}

std::vector<std::vector<double>> DistinctVectors(int count, int m, double lo, double hi, int grid,
                                                 Rng& rng) {
  std::vector<std::vector<double>> out;
  for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt > 1000 * count) throw PreconditionError("cannot draw distinct type vectors");
    std::vector<double> v(m);
    for (double& x : v) x = Quantize(UniformIn(rng, lo, hi), grid);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  }
  return out;
}

double PackingScale(const std::vector<LinearInequality>& rows, std::span<const double> x) {
  double scale = 1.0;
  for (const LinearInequality& row : rows) {
    const double lhs = row.Lhs(x);
    if (lhs > row.rhs) scale = std::min(scale, std::max(0.0, row.rhs) / lhs);
  }
  return scale;
}

double Stderr(double sum, double sumsq, long long n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

std::string FormatDouble(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

int WorkerCount() {
  if (const char* env = std::getenv("TOCRS_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

double BinomialSigma(double p, long long samples) {
  if (samples <= 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(samples));
}

// ---------------------------------------------------------------------------
// Generators.

FeasibilityConstraint GenerateConstraint(const AuctionParams& p, Rng& rng) {
  auto weights = [&] {
    Matrix w(p.n, p.m);
    for (int i = 0; i < p.n; ++i) {
      for (int j = 0; j < p.m; ++j) w(i, j) = UniformIn(rng, p.weight_lo, p.weight_hi) * p.capacity;
    }
    return w;
  };
  if (p.variant == "single_copy_per_item") return SingleCopyPerItem{};
  if (p.variant == "k_uniform_per_agent") return KUniformPerAgent{std::vector<int>(p.n, p.k)};
  if (p.variant == "knapsack") return Knapsack{weights(), p.capacity};
  if (p.variant == "multi_choice_knapsack") return MultiChoiceKnapsack{weights(), p.capacity};
  if (p.variant == "vh") {
    return VerticalHorizontal{std::vector<int>(p.n, p.k), std::vector<int>(p.m, p.col_cap)};
  }
  throw UnsupportedConstraintError("unknown constraint variant '" + p.variant + "'");
}

AuctionInstance GenerateAuction(const AuctionParams& p, Rng& rng) {
  if (p.n < 1 || p.m < 1 || p.types < 1 || !(p.value_lo <= p.value_hi) || p.value_lo < 0.0) {
    throw PreconditionError("invalid auction generator parameters");
  }
  AuctionInstance instance;
  instance.n = p.n;
  instance.m = p.m;
  for (int i = 0; i < p.n; ++i) {
    AgentTypeSpace space;
    space.support = DistinctVectors(p.types, p.m, p.value_lo, p.value_hi, p.value_grid, rng);
    space.probs = RandomProbs(p.types, rng);
    instance.type_spaces.push_back(std::move(space));
  }
  instance.constraint = GenerateConstraint(p, rng);
  Validate(instance);
  return instance;
}

ProcurementInstance GenerateProcurement(const ProcurementParams& p, Rng& rng) {
  if (p.n < 1 || p.m < 1 || p.types < 1 || !(p.budget > 0.0) || p.cost_lo < 0.0 ||
      !(p.cost_lo <= p.cost_hi)) {
    throw PreconditionError("invalid procurement generator parameters");
  }
  ProcurementInstance instance;
  instance.n = p.n;
  instance.m = p.m;
  instance.budget = p.budget;
  instance.values = Matrix(p.n, p.m);
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.m; ++j) instance.values(i, j) = UniformIn(rng, p.value_lo, p.value_hi);
  }
  for (int i = 0; i < p.n; ++i) {
    AgentTypeSpace space;
    space.support = DistinctVectors(p.types, p.m, p.cost_lo, p.cost_hi, 0, rng);
    space.probs = RandomProbs(p.types, rng);
    instance.cost_spaces.push_back(std::move(space));
  }
  Validate(instance);
  return instance;
}

void FitProcess(const FeasibilityConstraint& constraint, TwoLevelProcess* process) {
  const int n = process->n;
  const int m = process->m;
  for (int i = 0; i < n; ++i) {
    const auto rows = RowPolytope(constraint, i, m);
    Matrix& x = process->activation[i];
    for (int d = 0; d < x.rows(); ++d) {
      double scale = PackingScale(rows, x.row(d));
      for (double v : x.row(d)) {
        if (v > 1.0) scale = std::min(scale, 1.0 / v);
      }
      for (double& v : x.row(d)) v *= scale;
    }
  }
  const Matrix w = process->Marginals();
  const double scale = PackingScale(MarginalPolytope(constraint, n, m), w.data());
  for (Matrix& x : process->activation) {
    for (int d = 0; d < x.rows(); ++d) {
      for (double& v : x.row(d)) v *= scale;
    }
  }
}

TwoLevelProcess GenerateFeasibleProcess(const FeasibilityConstraint& constraint, int n, int m,
                                        int types, Rng& rng, double activation_lo) {
  TwoLevelProcess process;
  process.n = n;
  process.m = m;
  for (int i = 0; i < n; ++i) {
    process.row_probs.push_back(RandomProbs(types, rng));
    Matrix x(types, m);
    for (int d = 0; d < types; ++d) {
      for (int j = 0; j < m; ++j) x(d, j) = UniformIn(rng, activation_lo, 1.0);
    }
    process.activation.push_back(std::move(x));
  }
  FitProcess(constraint, &process);
  Validate(process);
  return process;
}

StochasticKnapsackInstance GenerateStochasticKnapsack(const StochasticKnapsackParams& p,
                                                      Rng& rng) {
  if (p.n < 1 || p.support < 2 || !(p.k_star >= 0.0 && p.k_star <= 1.0) ||
      !(p.capacity > 0.0) || !(p.load > 0.0 && p.load <= 1.0)) {
    throw PreconditionError("invalid stochastic knapsack generator parameters");
  }
  const double top = p.k_star * p.capacity;
  StochasticKnapsackInstance instance;
  instance.capacity = p.capacity;
  std::vector<double> active_mean(p.n, 0.0);
  std::vector<std::vector<double>> shape(p.n);
  for (int i = 0; i < p.n; ++i) {
    std::vector<double> weights{0.0};
    for (int t = 1; t < p.support; ++t) {
      weights.push_back(i == 0 && t == 1 ? top : UniformIn(rng, 0.1 * top, top));
    }
    shape[i] = RandomProbs(p.support - 1, rng);
    for (int t = 1; t < p.support; ++t) active_mean[i] += shape[i][t - 1] * weights[t];
    instance.weights.push_back(std::move(weights));
  }
  std::vector<double> activity(p.n);
  double expected = 0.0;
  for (int i = 0; i < p.n; ++i) {
    activity[i] = UniformIn(rng, 0.3, 1.0);
    expected += activity[i] * active_mean[i];
  }
  const double scale = expected > 0.0 ? p.load * p.capacity / expected : 1.0;
  for (int i = 0; i < p.n; ++i) {
    const double a = std::min(1.0, activity[i] * scale * (1.0 - 1e-12));
    std::vector<double> probs{1.0 - a};
    for (double s : shape[i]) probs.push_back(a * s);
    instance.probs.push_back(std::move(probs));
  }
  Validate(instance);
  return instance;
}

// ---------------------------------------------------------------------------
// Scheme verification.

namespace {

struct SelectState {
  std::shared_ptr<Scheme> scheme;
  std::vector<RateCount> cells;
  std::vector<std::vector<RateCount>> typed;
  long long infeasible = 0;
  long long partition = 0;
  long long heavy_runs = 0;
  long long clamps = 0;
  double max_weight = 0.0;
};

void Merge(std::vector<RateCount>& into, const std::vector<RateCount>& from) {
  for (size_t k = 0; k < into.size(); ++k) {
    into[k].active += from[k].active;
    into[k].selected += from[k].selected;
  }
}

}  // namespace

SelectabilityReport VerifySelectability(const Scheme& scheme, const TwoLevelProcess& process,
                                        const FeasibilityConstraint& constraint,
                                        long long trials, std::uint64_t seed,
                                        const VerifyOptions& options) {
  const int n = process.n;
  const int m = process.m;
  if (scheme.n() != n || scheme.m() != m) throw DimensionError("scheme and process differ");
  const Matrix* weights = KnapsackWeights(constraint);
  const double half = weights ? KnapsackCapacity(constraint) / 2.0 : 0.0;

  SelectState init;
  init.cells.assign(static_cast<size_t>(n) * m, {});
  init.typed.resize(n);
  for (int i = 0; i < n; ++i) init.typed[i].assign(static_cast<size_t>(process.row_types(i)) * m, {});

  SelectState total = ParallelTrials(
      trials, init,
      [&](SelectState& st, long long t) {
        if (!st.scheme) st.scheme = scheme.Clone();
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        const ActiveSet active = SampleActiveSet(process, scheme.b(), rng);
        const std::vector<Cell> chosen = RunScheme(*st.scheme, active, rng);
        std::vector<char> picked(static_cast<size_t>(n) * m, 0);
        double weight = 0.0;
        for (const Cell& c : chosen) {
          picked[static_cast<size_t>(c.agent) * m + c.item] = 1;
          if (!weights) continue;
          const double k = (*weights)(c.agent, c.item);
          weight += k;
          const bool heavy = k > half;
          if ((st.scheme->branch() == Branch::kHeavy && !heavy) ||
              (st.scheme->branch() == Branch::kLight && heavy)) {
            ++st.partition;
          }
        }
        for (int i = 0; i < n; ++i) {
          const int d = active.row_types[i];
          for (int j = 0; j < m; ++j) {
            if (!active.active(i, j)) continue;
            const size_t k = static_cast<size_t>(i) * m + j;
            ++st.cells[k].active;
            ++st.typed[i][static_cast<size_t>(d) * m + j].active;
            if (picked[k]) {
              ++st.cells[k].selected;
              ++st.typed[i][static_cast<size_t>(d) * m + j].selected;
            }
          }
        }
        if (!IsFeasibleSet(constraint, n, m, chosen)) ++st.infeasible;
        if (st.scheme->branch() == Branch::kHeavy) ++st.heavy_runs;
        st.clamps += st.scheme->run_clamps();
        st.max_weight = std::max(st.max_weight, weight);
      },
      [](SelectState& into, const SelectState& from) {
        Merge(into.cells, from.cells);
        for (size_t i = 0; i < into.typed.size(); ++i) Merge(into.typed[i], from.typed[i]);
        into.infeasible += from.infeasible;
        into.partition += from.partition;
        into.heavy_runs += from.heavy_runs;
        into.clamps += from.clamps;
        into.max_weight = std::max(into.max_weight, from.max_weight);
      });

  SelectabilityReport report;
  report.scheme = scheme.name();
  report.declared_c = scheme.declared_c();
  report.trials = trials;
  report.n = n;
  report.m = m;
  report.cells = std::move(total.cells);
  report.typed = std::move(total.typed);
  report.feasibility_violations = total.infeasible;
  report.partition_violations = total.partition;
  report.heavy_runs = total.heavy_runs;
  report.run_clamps = total.clamps;
  report.table_clamps = scheme.table_clamps();
  report.max_weight = total.max_weight;
  const double c = report.declared_c;
  for (const RateCount& cell : report.cells) {
    if (cell.active < options.min_samples) continue;
    ++report.checked_cells;
    report.min_rate = std::min(report.min_rate, cell.rate());
    if (cell.rate() < c - options.sigmas * BinomialSigma(c, cell.active)) ++report.failing_cells;
  }
  report.pass = report.checked_cells > 0 && report.failing_cells == 0 &&
                report.feasibility_violations == 0 && report.partition_violations == 0;
  return report;
}

StochasticKnapsackReport VerifyStochasticKnapsack(const StochasticKnapsackOcrs& ocrs,
                                                  long long trials, std::uint64_t seed,
                                                  const VerifyOptions& options) {
  const StochasticKnapsackInstance& inst = ocrs.instance();
  struct State {
    std::shared_ptr<StochasticKnapsackOcrs> ocrs;
    std::vector<std::vector<RateCount>> rates;
    long long overfilled = 0;
    double max_load = 0.0;
  };
  State init;
  for (const auto& ks : inst.weights) init.rates.emplace_back(ks.size());
  State total = ParallelTrials(
      trials, init,
      [&](State& st, long long t) {
        if (!st.ocrs) st.ocrs = std::make_shared<StochasticKnapsackOcrs>(ocrs);
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        st.ocrs->Begin(rng);
        for (int i = 0; i < inst.size(); ++i) {
          const int idx = SampleIndex(rng, inst.probs[i]);
          RateCount& rc = st.rates[i][idx];
          ++rc.active;
          if (st.ocrs->Offer(i, idx, rng)) ++rc.selected;
        }
        if (st.ocrs->load() > inst.capacity) ++st.overfilled;
        st.max_load = std::max(st.max_load, st.ocrs->load());
      },
      [](State& into, const State& from) {
        for (size_t i = 0; i < into.rates.size(); ++i) Merge(into.rates[i], from.rates[i]);
        into.overfilled += from.overfilled;
        into.max_load = std::max(into.max_load, from.max_load);
      });
  StochasticKnapsackReport report;
  report.declared_c = ocrs.declared_c();
  report.regime = ocrs.regime() == StochasticKnapsackOcrs::Regime::kGamma ? "gamma" : "sixth";
  report.trials = trials;
  report.rates = std::move(total.rates);
  report.overfilled = total.overfilled;
  report.max_load = total.max_load;
  const double c = report.declared_c;
  for (const auto& row : report.rates) {
    for (const RateCount& rc : row) {
      if (rc.active < options.min_samples) continue;
      ++report.checked;
      report.min_rate = std::min(report.min_rate, rc.rate());
      if (rc.rate() < c - options.sigmas * BinomialSigma(c, rc.active)) ++report.failing;
    }
  }
  report.pass = report.checked > 0 && report.failing == 0 && report.overfilled == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Mechanism verification.

std::vector<int> SampleReports(const std::vector<AgentTypeSpace>& spaces, Rng& rng) {
  std::vector<int> reports;
  reports.reserve(spaces.size());
  for (const AgentTypeSpace& space : spaces) reports.push_back(SampleIndex(rng, space.probs));
  return reports;
}

EndToEndReport VerifyEndToEnd(const Mechanism& mechanism, long long trials, std::uint64_t seed,
                              std::optional<double> oracle_opt, bool batch,
                              const VerifyOptions& options) {
  const AuctionInstance& inst = mechanism.instance();
  struct State {
    double sum = 0.0;
    double sumsq = 0.0;
    long long infeasible = 0;
    long long keep_flips = 0;
    long long tosses = 0;
  };
  const State total = ParallelTrials(
      trials, State{},
      [&](State& st, long long t) {
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        const std::vector<int> reports = SampleReports(inst.type_spaces, rng);
        const MechanismOutcome out =
            batch ? mechanism.RunBatch(reports, rng) : mechanism.RunSequential(reports, rng);
        st.sum += out.revenue;
        st.sumsq += out.revenue * out.revenue;
        if (!IsFeasibleSet(inst.constraint, inst.n, inst.m, out.allocation)) ++st.infeasible;
        st.keep_flips += out.trace.keep_flips;
        st.tosses += out.trace.pstar_tosses;
      },
      [](State& into, const State& from) {
        into.sum += from.sum;
        into.sumsq += from.sumsq;
        into.infeasible += from.infeasible;
        into.keep_flips += from.keep_flips;
        into.tosses += from.tosses;
      });
  EndToEndReport report;
  report.trials = trials;
  report.lp_objective = mechanism.rule().objective;
  report.expected_revenue = mechanism.payment_factor() * report.lp_objective;
  report.mean_revenue = trials > 0 ? total.sum / trials : 0.0;
  report.revenue_stderr = Stderr(total.sum, total.sumsq, trials);
  report.feasibility_violations = total.infeasible;
  report.keep_flips = total.keep_flips;
  report.pstar_tosses = total.tosses;
  const double slack = 1e-9 * std::max(1.0, std::abs(report.expected_revenue));
  report.identity_pass = std::abs(report.mean_revenue - report.expected_revenue) <=
                         options.sigmas * report.revenue_stderr + slack;
  report.oracle_opt = oracle_opt;
  bool ratio_ok = true;
  if (oracle_opt && *oracle_opt > 0.0) {
    report.ratio_to_opt = report.mean_revenue / *oracle_opt;
    report.guaranteed_ratio = report.expected_revenue / *oracle_opt;
    ratio_ok = report.ratio_to_opt >=
               report.guaranteed_ratio - (options.sigmas * report.revenue_stderr + slack) / *oracle_opt;
  }
  report.pass = report.identity_pass && ratio_ok && report.feasibility_violations == 0;
  return report;
}

AllocationAudit AuditAllocation(const Mechanism& mechanism, int agent, int report_index,
                                long long trials, std::uint64_t seed, bool batch,
                                const VerifyOptions& options) {
  const AuctionInstance& inst = mechanism.instance();
  if (agent < 0 || agent >= inst.n || report_index < 0 ||
      report_index >= inst.type_spaces[agent].size()) {
    throw DimensionError("audit outside the instance");
  }
  const std::vector<RateCount> init(inst.m);
  std::vector<RateCount> counts = ParallelTrials(
      trials, init,
      [&](std::vector<RateCount>& st, long long t) {
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        std::vector<int> reports = SampleReports(inst.type_spaces, rng);
        reports[agent] = report_index;
        const MechanismOutcome out =
            batch ? mechanism.RunBatch(reports, rng) : mechanism.RunSequential(reports, rng);
        for (RateCount& rc : st) ++rc.active;
        for (const Cell& c : out.allocation) {
          if (c.agent == agent) ++st[c.item].selected;
        }
      },
      [](std::vector<RateCount>& into, const std::vector<RateCount>& from) { Merge(into, from); });
  AllocationAudit audit;
  audit.agent = agent;
  audit.report = report_index;
  audit.items = std::move(counts);
  audit.pass = true;
  for (int j = 0; j < inst.m; ++j) {
    const double expected = mechanism.payment_factor() * mechanism.rule().pi[agent](report_index, j);
    audit.expected.push_back(expected);
    const double sigma = BinomialSigma(expected, trials);
    const double gap = std::abs(audit.items[j].rate() - expected);
    const double z = sigma > 0.0 ? gap / sigma : (gap > 1e-12 ? INFINITY : 0.0);
    audit.max_z = std::max(audit.max_z, z);
  }
  audit.pass = audit.max_z <= options.sigmas;
  return audit;
}

BicReport AuditBic(const Mechanism& mechanism, long long trials_per_report, std::uint64_t seed,
                   const VerifyOptions& options) {
  const AuctionInstance& inst = mechanism.instance();
  const InterimRule& rule = mechanism.rule();
  const double factor = mechanism.payment_factor();
  BicReport report;
  for (int i = 0; i < inst.n; ++i) {
    const AgentTypeSpace& space = inst.type_spaces[i];
    const int types = space.size();
    // [report][true type]
    std::vector<std::vector<BicEntry>> table(types, std::vector<BicEntry>(types));
    for (int r = 0; r < types; ++r) {
      struct State {
        std::vector<double> sum;
        std::vector<double> sumsq;
      };
      const State init{std::vector<double>(types, 0.0), std::vector<double>(types, 0.0)};
      const std::uint64_t sub = DeriveSeed(seed, static_cast<std::uint64_t>(i) * 1000 + r);
      const State total = ParallelTrials(
          trials_per_report, init,
          [&](State& st, long long t) {
            Rng rng = MakeRng(sub, static_cast<std::uint64_t>(t));
            std::vector<int> reports = SampleReports(inst.type_spaces, rng);
            reports[i] = r;
            const MechanismOutcome out = mechanism.RunSequential(reports, rng);
            for (int truth = 0; truth < types; ++truth) {
              double u = -out.payments[i];
              for (const Cell& c : out.allocation) {
                if (c.agent == i) u += space.support[truth][c.item];
              }
              st.sum[truth] += u;
              st.sumsq[truth] += u * u;
            }
          },
          [](State& into, const State& from) {
            for (size_t k = 0; k < into.sum.size(); ++k) {
              into.sum[k] += from.sum[k];
              into.sumsq[k] += from.sumsq[k];
            }
          });
      for (int truth = 0; truth < types; ++truth) {
        BicEntry& e = table[r][truth];
        e.agent = i;
        e.true_type = truth;
        e.report = r;
        e.empirical = total.sum[truth] / trials_per_report;
        e.stderr_ = Stderr(total.sum[truth], total.sumsq[truth], trials_per_report);
        double value = 0.0;
        for (int j = 0; j < inst.m; ++j) value += space.support[truth][j] * rule.pi[i](r, j);
        e.analytic = factor * (value - rule.q[i][r]);
        const double gap = std::abs(e.empirical - e.analytic);
        const double slack = 1e-9 * std::max(1.0, std::abs(e.analytic));
        if (gap > options.sigmas * e.stderr_ + slack) ++report.identity_failures;
        if (e.stderr_ > 0.0) report.max_identity_z = std::max(report.max_identity_z, gap / e.stderr_);
        report.entries.push_back(e);
      }
    }
    for (int truth = 0; truth < types; ++truth) {
      const BicEntry& honest = table[truth][truth];
      for (int r = 0; r < types; ++r) {
        if (r == truth) continue;
        const BicEntry& lie = table[r][truth];
        const double margin =
            options.sigmas * std::hypot(honest.stderr_, lie.stderr_) +
            1e-9 * std::max(1.0, std::abs(honest.analytic));
        if (honest.empirical < lie.empirical - margin) ++report.incentive_failures;
      }
    }
  }
  report.pass = report.identity_failures == 0 && report.incentive_failures == 0;
  return report;
}

ProcurementReport VerifyProcurement(const ProcurementMechanism& mechanism, long long trials,
                                    std::uint64_t seed, const VerifyOptions& options) {
  const ProcurementInstance& inst = mechanism.instance();
  struct State {
    double value = 0.0;
    double valuesq = 0.0;
    double payment = 0.0;
    double max_payment = 0.0;
    long long over = 0;
  };
  const State total = ParallelTrials(
      trials, State{},
      [&](State& st, long long t) {
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        const std::vector<int> reports = SampleReports(inst.cost_spaces, rng);
        const ProcurementOutcome out = mechanism.Run(reports, rng);
        st.value += out.buyer_value;
        st.valuesq += out.buyer_value * out.buyer_value;
        st.payment += out.total_payment;
        st.max_payment = std::max(st.max_payment, out.total_payment);
        if (out.total_payment > inst.budget) ++st.over;
      },
      [](State& into, const State& from) {
        into.value += from.value;
        into.valuesq += from.valuesq;
        into.payment += from.payment;
        into.max_payment = std::max(into.max_payment, from.max_payment);
        into.over += from.over;
      });
  ProcurementReport report;
  report.trials = trials;
  report.c = mechanism.c();
  report.lp_objective = mechanism.rule().objective;
  const double factor = report.c - mechanism.config().epsilon;
  report.expected_value = factor * report.lp_objective;
  report.mean_value = trials > 0 ? total.value / trials : 0.0;
  report.value_stderr = Stderr(total.value, total.valuesq, trials);
  report.mean_payment = trials > 0 ? total.payment / trials : 0.0;
  report.max_payment = total.max_payment;
  report.budget_violations = total.over;
  bool ratio_ok = true;
  if (report.lp_objective > 0.0) {
    report.ratio = report.mean_value / report.lp_objective;
    ratio_ok = report.ratio >=
               factor - (options.sigmas * report.value_stderr) / report.lp_objective - 1e-12;
  } else {
    report.ratio = 1.0;
  }
  report.pass = ratio_ok && report.budget_violations == 0;
  return report;
}

DivisionReport BenchDivision(double p0, double p1, double delta, long long samples,
                             std::uint64_t seed, const VerifyOptions& options) {
  if (!(p1 - p0 >= delta) || !(p0 >= 0.0) || !(p1 <= 1.0)) {
    throw PreconditionError("division bench needs p1 - p0 >= delta");
  }
  struct State {
    long long ones = 0;
    long long tosses = 0;
    long long rounds = 0;
    std::map<long long, long long> histogram;
  };
  const State total = ParallelTrials(
      samples, State{},
      [&](State& st, long long t) {
        Rng rng = MakeRng(seed, static_cast<std::uint64_t>(t));
        auto coin = Divide(ConstantCoin(p0), ConstantCoin(p1), delta);
        const CoinSample s = coin->Sample(rng);
        st.ones += s.outcome ? 1 : 0;
        st.tosses += s.tosses;
        st.rounds += coin->last_rounds();
        ++st.histogram[coin->last_rounds()];
      },
      [](State& into, const State& from) {
        into.ones += from.ones;
        into.tosses += from.tosses;
        into.rounds += from.rounds;
        for (const auto& [k, v] : from.histogram) into.histogram[k] += v;
      });
  DivisionReport report;
  report.p0 = p0;
  report.p1 = p1;
  report.delta = delta;
  report.samples = samples;
  report.bias = static_cast<double>(total.ones) / samples;
  const double target = p0 / p1;
  report.bias_stderr = BinomialSigma(target, samples);
  report.mean_tosses = static_cast<double>(total.tosses) / samples;
  report.toss_bound = DivideTossBound(p1, delta);
  report.mean_rounds = static_cast<double>(total.rounds) / samples;

  // Rounds are geometric with success probability p1 / 2; bins hold at
  // least five expected counts and the last bin pools the tail.
  const double q = p1 / 2.0;
  double chi = 0.0;
  int bins = 0;
  long long seen = 0;
  double tail = 1.0;  // Pr[R >= k]
  for (long long k = 1;; ++k) {
    const double pk = tail * q;
    const double rest = tail - pk;
    if (rest * samples < 5.0 || pk * samples < 5.0) {
      const double expected = tail * samples;
      const double observed = static_cast<double>(samples - seen);
      chi += (observed - expected) * (observed - expected) / expected;
      ++bins;
      break;
    }
    const auto it = total.histogram.find(k);
    const double observed = it == total.histogram.end() ? 0.0 : static_cast<double>(it->second);
    const double expected = pk * samples;
    chi += (observed - expected) * (observed - expected) / expected;
    seen += static_cast<long long>(observed);
    ++bins;
    tail = rest;
  }
  report.chi_square = chi;
  report.dof = std::max(1, bins - 1);
  const boost::math::chi_squared_distribution<double> dist(report.dof);
  report.p_value = boost::math::cdf(boost::math::complement(dist, chi));
  const bool bias_ok = std::abs(report.bias - target) <= options.sigmas * report.bias_stderr;
  report.pass = bias_ok && report.mean_tosses <= report.toss_bound && report.p_value >= 0.01;
  return report;
}

// ---------------------------------------------------------------------------
// Reports.

Json ResultsToJson(const std::vector<ExperimentResult>& results) {
  Json list = Json::array();
  bool all = true;
  for (const ExperimentResult& r : results) {
    Json metrics = Json::array();
    for (const auto& [name, value] : r.metrics) {
      metrics.push_back({{"name", name}, {"value", std::isfinite(value) ? Json(value) : Json()}});
    }
    list.push_back({{"id", r.id},
                    {"title", r.title},
                    {"pass", r.pass},
                    {"metrics", metrics},
                    {"note", r.note}});
    all = all && r.pass;
  }
  return {{"all_pass", all}, {"results", list}};
}

std::vector<ExperimentResult> ResultsFromJson(const Json& doc) {
  std::vector<ExperimentResult> out;
  for (const Json& entry : doc.at("results")) {
    ExperimentResult r;
    r.id = entry.at("id").get<std::string>();
    r.title = entry.at("title").get<std::string>();
    r.pass = entry.at("pass").get<bool>();
    r.note = entry.value("note", "");
    for (const Json& m : entry.at("metrics")) {
      const Json& v = m.at("value");
      r.metrics.emplace_back(m.at("name").get<std::string>(),
                             v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                         : v.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string ResultsToCsv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "id,title,pass,metric,value\n";
  for (const ExperimentResult& r : results) {
    const std::string head =
        CsvField(r.id) + "," + CsvField(r.title) + "," + (r.pass ? "true" : "false") + ",";
    if (r.metrics.empty()) out << head << ",\n";
    for (const auto& [name, value] : r.metrics) {
      out << head << CsvField(name) << "," << FormatDouble(value) << "\n";
    }
  }
  return out.str();
}

int EmitReport(const std::vector<ExperimentResult>& results, const std::string& format,
               std::ostream& out) {
  if (format == "json") {
    out << ResultsToJson(results).dump(2) << "\n";
  } else if (format == "csv") {
    out << ResultsToCsv(results);
  } else {
    throw PreconditionError("unknown report format '" + format + "'");
  }
  for (const ExperimentResult& r : results) {
    if (!r.pass) return 1;
  }
  return 0;
}

std::string FormatResultLine(const ExperimentResult& result) {
  std::ostringstream out;
  out << (result.pass ? "PASS " : "FAIL ") << result.id << " " << result.title << ":";
  char buf[96];
  for (const auto& [name, value] : result.metrics) {
    std::snprintf(buf, sizeof(buf), " %s=%.6g", name.c_str(), value);
    out << buf;
  }
  if (!result.note.empty()) out << " (" << result.note << ")";
  return out.str();
}

}  // namespace tocrs
