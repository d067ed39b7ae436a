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

// Command-line front end: instance generation, LP solving, scheme and
// mechanism simulation, acceptance verification and factory benchmarks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json_config.h"
#include "tocrs/errors.h"
#include "tocrs/harness.h"
#include "tocrs/instance_io.h"

namespace tocrs::cli {
namespace {

struct Globals {
  std::uint64_t seed = AcceptanceOptions{}.seed;
  long long trials = 10000;
  std::string out;
  std::string format = "json";
};

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  file << text;
}

// Summaries are flat key/value objects; csv renders them one pair per line.
std::string RenderSummary(const Json& summary, const std::string& format) {
  if (format == "json") return summary.dump(2) + "\n";
  if (format != "csv") throw PreconditionError("unknown format '" + format + "'");
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [key, value] : summary.items()) {
    out << key << "," << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
  }
  return out.str();
}

ProbabilityMode ParseMode(const std::string& name, double epsilon, double delta,
                          std::uint64_t seed) {
  if (name == "oracle") return ProbabilityMode::Oracle();
  if (name == "estimated") return ProbabilityMode::Estimated(epsilon, delta, seed);
  throw PreconditionError("probability mode must be 'oracle' or 'estimated'");
}

double Ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string kind = "auction";
  AuctionParams auction;
  ProcurementParams procurement;
  StochasticKnapsackParams knapsack;
};

void AddGen(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<GenArgs>();
  CLI::App* cmd = app.add_subcommand("gen", "generate a random instance");
  cmd->add_option("--kind", args->kind, "auction, procurement or stochastic_knapsack")
      ->check(CLI::IsMember({"auction", "procurement", "stochastic_knapsack"}));
  cmd->add_option("-n,--agents", args->auction.n, "agents (sellers, elements)");
  cmd->add_option("-m,--items", args->auction.m, "items (services)");
  cmd->add_option("--types", args->auction.types, "types per agent");
  cmd->add_option("--variant", args->auction.variant, "feasibility constraint")
      ->check(CLI::IsMember({"single_copy_per_item", "k_uniform_per_agent", "knapsack",
                             "multi_choice_knapsack", "vh"}));
  cmd->add_option("--value-lo", args->auction.value_lo);
  cmd->add_option("--value-hi", args->auction.value_hi);
  cmd->add_option("--value-grid", args->auction.value_grid, "values on a 1/grid lattice");
  cmd->add_option("--weight-lo", args->auction.weight_lo, "as a fraction of capacity");
  cmd->add_option("--weight-hi", args->auction.weight_hi, "as a fraction of capacity");
  cmd->add_option("--capacity", args->auction.capacity);
  cmd->add_option("--k", args->auction.k, "row cap");
  cmd->add_option("--col-cap", args->auction.col_cap, "column cap (vh)");
  cmd->add_option("--cost-lo", args->procurement.cost_lo);
  cmd->add_option("--cost-hi", args->procurement.cost_hi);
  cmd->add_option("--budget", args->procurement.budget);
  cmd->add_option("--k-star", args->knapsack.k_star, "largest weight over capacity");
  cmd->add_option("--support", args->knapsack.support, "weights per element");
  cmd->add_option("--load", args->knapsack.load, "expected weight over capacity");
  cmd->callback([args, &g, status] {
    Rng rng = MakeRng(g.seed, 0);
    Json doc;
    if (args->kind == "auction") {
      doc = ToJson(GenerateAuction(args->auction, rng));
    } else if (args->kind == "procurement") {
      ProcurementParams p = args->procurement;
      p.n = args->auction.n;
      p.m = args->auction.m;
      p.types = args->auction.types;
      doc = ToJson(GenerateProcurement(p, rng));
    } else {
      StochasticKnapsackParams p = args->knapsack;
      p.n = args->auction.n;
      p.capacity = args->auction.capacity;
      doc = ToJson(GenerateStochasticKnapsack(p, rng));
    }
    WriteText(g.out, doc.dump(2) + "\n");
    *status = 0;
  });
}

// ---- solve-lp --------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  bool oracle = false;
};

void AddSolve(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<SolveArgs>();
  CLI::App* cmd = app.add_subcommand("solve-lp", "solve the interim relaxation");
  cmd->add_option("--instance", args->instance, "auction or procurement instance")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_flag("--oracle", args->oracle, "also compute the exact optimum when small");
  cmd->callback([args, &g, status] {
    const Json doc = ReadJsonFile(args->instance);
    Json out;
    if (DocumentKind(doc) == "procurement") {
      const ProcurementInstance inst = ProcurementFromJson(doc);
      const ProcurementInterimRule rule = SolveLp2(inst);
      out = ToJson(rule);
      out["max_incentive_violation"] = MaxIncentiveViolation(inst, rule);
    } else {
      const AuctionInstance inst = AuctionFromJson(doc);
      const InterimRule rule = SolveLp1(inst);
      out = ToJson(rule);
      out["max_incentive_violation"] = MaxIncentiveViolation(inst, rule);
      if (args->oracle) {
        try {
          out["oracle_opt"] = BruteForceOptimalRevenue(inst);
        } catch (const TooLargeError& e) {
          out["oracle_opt"] = nullptr;
          std::cerr << "oracle skipped: " << e.what() << "\n";
        }
      }
    }
    WriteText(g.out, out.dump(2) + "\n");
    *status = 0;
  });
}

// ---- run-scheme ------------------------------------------------------------

struct SchemeArgs {
  std::string instance;
  std::string interim;
  std::string process;
  std::string scheme = "auto";
  std::string mode = "oracle";
  std::string cells;
  double b = 1.0;
  double epsilon = 0.05;
  double delta = 0.01;
};

void AddRunScheme(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<SchemeArgs>();
  CLI::App* cmd = app.add_subcommand("run-scheme", "measure per-element selectability");
  cmd->add_option("--instance", args->instance, "auction or stochastic_knapsack instance")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--interim", args->interim, "interim rule inducing the process");
  cmd->add_option("--process", args->process, "explicit two-level process");
  cmd->add_option("--scheme", args->scheme, "auto (by constraint) or always")
      ->check(CLI::IsMember({"auto", "always"}));
  cmd->add_option("--mode", args->mode, "oracle or estimated probabilities");
  cmd->add_option("--b", args->b, "activation scale")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--epsilon", args->epsilon);
  cmd->add_option("--delta", args->delta);
  cmd->add_option("--cells", args->cells, "per-element CSV output");
  cmd->callback([args, &g, status] {
    const Json doc = ReadJsonFile(args->instance);
    const ProbabilityMode mode = ParseMode(args->mode, args->epsilon, args->delta, g.seed);
    Json summary;
    std::ostringstream csv;
    if (DocumentKind(doc) == "stochastic_knapsack") {
      const StochasticKnapsackInstance inst = StochasticKnapsackFromJson(doc);
      const StochasticKnapsackOcrs ocrs(inst, mode);
      const auto r = VerifyStochasticKnapsack(ocrs, g.trials, g.seed);
      csv << "element,support_index,weight,active,selected,rate\n";
      for (int i = 0; i < inst.size(); ++i) {
        for (size_t s = 0; s < inst.weights[i].size(); ++s) {
          const RateCount& rc = r.rates[i][s];
          csv << i << "," << s << "," << inst.weights[i][s] << "," << rc.active << ","
              << rc.selected << "," << rc.rate() << "\n";
        }
      }
      summary = {{"scheme", "stochastic_knapsack"}, {"regime", r.regime},
                 {"declared_c", r.declared_c},      {"min_empirical_c", r.min_rate},
                 {"checked", r.checked},            {"failing", r.failing},
                 {"feasibility_violations", r.overfilled}, {"max_load", r.max_load},
                 {"trials", r.trials},              {"pass", r.pass}};
      *status = r.overfilled == 0 ? 0 : 1;
    } else {
      const AuctionInstance inst = AuctionFromJson(doc);
      TwoLevelProcess process;
      if (!args->process.empty()) {
        process = ProcessFromJson(ReadJsonFile(args->process));
      } else {
        const InterimRule rule = args->interim.empty()
                                     ? SolveLp1(inst)
                                     : InterimFromJson(ReadJsonFile(args->interim));
        process = InducedProcess(inst, rule);
      }
      const auto scheme = args->scheme == "always"
                              ? AlwaysSelectScheme(process.n, process.m, args->b)
                              : MakeScheme(inst.constraint, process, args->b, mode);
      const auto r = VerifySelectability(*scheme, process, inst.constraint, g.trials, g.seed);
      csv << "agent,item,active,selected,rate\n";
      for (int i = 0; i < r.n; ++i) {
        for (int j = 0; j < r.m; ++j) {
          const RateCount& rc = r.cell(i, j);
          csv << i << "," << j << "," << rc.active << "," << rc.selected << "," << rc.rate()
              << "\n";
        }
      }
      summary = {{"scheme", r.scheme},
                 {"declared_c", r.declared_c},
                 {"min_empirical_c", r.min_rate},
                 {"checked_cells", r.checked_cells},
                 {"failing_cells", r.failing_cells},
                 {"feasibility_violations", r.feasibility_violations},
                 {"partition_violations", r.partition_violations},
                 {"run_clamps", r.run_clamps},
                 {"table_clamps", r.table_clamps},
                 {"trials", r.trials},
                 {"pass", r.pass}};
      *status = r.feasibility_violations == 0 ? 0 : 1;
    }
    if (!args->cells.empty()) WriteText(args->cells, csv.str());
    WriteText(g.out, RenderSummary(summary, g.format));
  });
}

// ---- run-mech --------------------------------------------------------------

struct MechArgs {
  std::string instance;
  std::string interim;
  std::string keep = "known";
  std::string mode = "oracle";
  std::string trials_csv;
  double b = 1.0;
  double epsilon = 0.0;
  double delta = 0.01;
  bool batch = false;
  bool oracle = false;
  long long bic_trials = 2000;
};

struct TrialRow {
  long long trial = 0;
  double revenue = 0.0;  // buyer value for procurement
  double payment = 0.0;  // total payment for procurement
  std::size_t allocated = 0;
  double weight = 0.0;
  bool violation = false;
};

std::string TrialCsv(const std::vector<TrialRow>& rows, const char* value_name) {
  std::ostringstream out;
  out << "trial," << value_name << ",payment,allocated,weight,violation\n";
  for (const TrialRow& r : rows) {
    out << r.trial << "," << r.revenue << "," << r.payment << "," << r.allocated << ","
        << r.weight << "," << (r.violation ? 1 : 0) << "\n";
  }
  return out.str();
}

template <typename RunOne>
std::vector<TrialRow> CollectTrials(long long trials, RunOne run_one) {
  auto rows = ParallelTrials(
      trials, std::vector<TrialRow>{},
      [&](std::vector<TrialRow>& acc, long long t) { acc.push_back(run_one(t)); },
      [](std::vector<TrialRow>& into, const std::vector<TrialRow>& from) {
        into.insert(into.end(), from.begin(), from.end());
      });
  return rows;
}

void MeanAndStderr(const std::vector<TrialRow>& rows, double* mean, double* se) {
  double sum = 0.0, sq = 0.0;
  for (const TrialRow& r : rows) {
    sum += r.revenue;
    sq += r.revenue * r.revenue;
  }
  const double n = static_cast<double>(rows.size());
  *mean = n > 0 ? sum / n : 0.0;
  *se = n > 1 ? std::sqrt(std::max(0.0, sq / n - *mean * *mean) / n) : 0.0;
}

void AddRunMech(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<MechArgs>();
  CLI::App* cmd = app.add_subcommand("run-mech", "simulate the revenue mechanism");
  cmd->add_option("--instance", args->instance, "auction instance")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--interim", args->interim, "interim rule (default: solve LP1)");
  cmd->add_option("--keep", args->keep, "known, exact or estimated keep probabilities")
      ->check(CLI::IsMember({"known", "exact", "estimated"}));
  cmd->add_option("--mode", args->mode, "oracle or estimated scheme probabilities");
  cmd->add_option("--b", args->b)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--epsilon", args->epsilon);
  cmd->add_option("--delta", args->delta);
  cmd->add_flag("--batch", args->batch, "collect all reports before the scheme runs");
  cmd->add_flag("--oracle", args->oracle, "compare against the exact optimum");
  cmd->add_option("--bic-trials", args->bic_trials, "trials per report pair (0 skips)");
  cmd->add_option("--trials-csv", args->trials_csv, "per-trial CSV output");
  cmd->callback([args, &g, status] {
    const AuctionInstance inst = AuctionFromJson(ReadJsonFile(args->instance));
    InterimRule rule =
        args->interim.empty() ? SolveLp1(inst) : InterimFromJson(ReadJsonFile(args->interim));
    MechanismConfig config;
    config.b = args->b;
    config.epsilon = args->epsilon;
    config.keep = ParseKeepMode(args->keep);
    config.scheme_mode = ParseMode(args->mode, std::max(args->epsilon, 1e-3), args->delta, g.seed);
    const double lp = rule.objective;
    const Mechanism mech(inst, std::move(rule), config);
    const auto rows = CollectTrials(g.trials, [&](long long t) {
      Rng rng = MakeRng(g.seed, static_cast<std::uint64_t>(t));
      const auto reports = SampleReports(inst.type_spaces, rng);
      const MechanismOutcome out =
          args->batch ? mech.RunBatch(reports, rng) : mech.RunSequential(reports, rng);
      return TrialRow{t, out.revenue, out.revenue, out.allocation.size(),
                      out.trace.total_weight,
                      !IsFeasibleSet(inst.constraint, inst.n, inst.m, out.allocation)};
    });
    double mean = 0.0, se = 0.0;
    MeanAndStderr(rows, &mean, &se);
    long long infeasible = 0;
    for (const TrialRow& r : rows) infeasible += r.violation ? 1 : 0;
    Json summary = {{"mean_revenue", mean},
                    {"revenue_stderr", se},
                    {"expected_revenue", mech.payment_factor() * lp},
                    {"lp_objective", lp},
                    {"ratio", Ratio(mean, lp)},
                    {"c", mech.c()},
                    {"payment_factor", mech.payment_factor()},
                    {"feasibility_violations", infeasible},
                    {"trials", g.trials}};
    if (args->bic_trials > 0) {
      const BicReport bic = AuditBic(mech, args->bic_trials, DeriveSeed(g.seed, 1));
      summary["bic_violations"] = bic.incentive_failures + bic.identity_failures;
    }
    if (args->oracle) {
      const double opt = BruteForceOptimalRevenue(inst);
      summary["oracle_opt"] = opt;
      summary["ratio_to_opt"] = Ratio(mean, opt);
    }
    if (!args->trials_csv.empty()) WriteText(args->trials_csv, TrialCsv(rows, "revenue"));
    WriteText(g.out, RenderSummary(summary, g.format));
    *status = infeasible == 0 ? 0 : 1;
  });
}

// ---- run-procurement -------------------------------------------------------

void AddRunProcurement(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<MechArgs>();
  CLI::App* cmd =
      app.add_subcommand("run-procurement", "simulate the budgeted procurement auction");
  cmd->add_option("--instance", args->instance, "procurement instance")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--interim", args->interim, "interim rule (default: solve LP2)");
  cmd->add_option("--keep", args->keep, "known, exact or estimated keep probabilities")
      ->check(CLI::IsMember({"known", "exact", "estimated"}));
  cmd->add_option("--mode", args->mode, "oracle or estimated OCRS probabilities");
  cmd->add_option("--epsilon", args->epsilon);
  cmd->add_option("--delta", args->delta);
  cmd->add_option("--trials-csv", args->trials_csv, "per-trial CSV output");
  cmd->callback([args, &g, status] {
    const ProcurementInstance inst = ProcurementFromJson(ReadJsonFile(args->instance));
    ProcurementInterimRule rule = args->interim.empty()
                                      ? SolveLp2(inst)
                                      : ProcurementInterimFromJson(ReadJsonFile(args->interim));
    ProcurementConfig config;
    config.epsilon = args->epsilon;
    config.keep = ParseKeepMode(args->keep);
    config.ocrs_mode = ParseMode(args->mode, std::max(args->epsilon, 1e-3), args->delta, g.seed);
    const double lp = rule.objective;
    const ProcurementMechanism mech(inst, std::move(rule), config);
    const double slack = 1e-9 * std::max(1.0, inst.budget);
    const auto rows = CollectTrials(g.trials, [&](long long t) {
      Rng rng = MakeRng(g.seed, static_cast<std::uint64_t>(t));
      const auto reports = SampleReports(inst.cost_spaces, rng);
      const ProcurementOutcome out = mech.Run(reports, rng);
      return TrialRow{t, out.buyer_value, out.total_payment, out.procured.size(),
                      out.total_payment, out.total_payment > inst.budget + slack};
    });
    double mean = 0.0, se = 0.0, pay = 0.0, max_pay = 0.0;
    MeanAndStderr(rows, &mean, &se);
    long long violations = 0;
    for (const TrialRow& r : rows) {
      violations += r.violation ? 1 : 0;
      pay += r.payment;
      max_pay = std::max(max_pay, r.payment);
    }
    const Json summary = {{"mean_value", mean},
                          {"value_stderr", se},
                          {"expected_value", (mech.c() - args->epsilon) * lp},
                          {"lp_objective", lp},
                          {"ratio", Ratio(mean, lp)},
                          {"c", mech.c()},
                          {"mean_payment", rows.empty() ? 0.0 : pay / rows.size()},
                          {"max_payment", max_pay},
                          {"budget", inst.budget},
                          {"budget_violations", violations},
                          {"trials", g.trials}};
    if (!args->trials_csv.empty()) WriteText(args->trials_csv, TrialCsv(rows, "value"));
    WriteText(g.out, RenderSummary(summary, g.format));
    *status = violations == 0 ? 0 : 1;
  });
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::vector<int> criteria;
  double scale = 1.0;
};

void AddVerify(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<VerifyArgs>();
  CLI::App* cmd = app.add_subcommand("verify", "run acceptance experiments");
  cmd->add_option("criteria", args->criteria, "criteria to run (default: all)")
      ->check(CLI::Range(1, kAcceptanceCriteria));
  cmd->add_option("--scale", args->scale, "trial count multiplier")
      ->check(CLI::PositiveNumber);
  cmd->callback([args, &g, status] {
    std::vector<int> criteria = args->criteria;
    if (criteria.empty()) {
      for (int k = 1; k <= kAcceptanceCriteria; ++k) criteria.push_back(k);
    }
    AcceptanceOptions options;
    options.seed = g.seed;
    options.trial_scale = args->scale;
    std::vector<ExperimentResult> results;
    for (int k : criteria) {
      ExperimentResult r;
      try {
        r = RunAcceptance(k, options);
      } catch (const std::exception& e) {
        r.id = "C" + std::to_string(k);
        r.title = "error";
        r.note = e.what();
      }
      std::cerr << FormatResultLine(r) << "\n";
      results.push_back(std::move(r));
    }
    if (g.out.empty() || g.out == "-") {
      *status = EmitReport(results, g.format, std::cout);
    } else {
      std::ofstream file(g.out);
      if (!file) throw std::runtime_error("cannot write " + g.out);
      *status = EmitReport(results, g.format, file);
    }
  });
}

// ---- bernoulli-bench -------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> pairs = {"0.1,0.6", "0.25,0.5", "0.4,0.9"};
  double delta = 0.0;
};

void AddBench(CLI::App& app, const Globals& g, int* status) {
  auto args = std::make_shared<BenchArgs>();
  CLI::App* cmd = app.add_subcommand("bernoulli-bench", "benchmark the division factory");
  cmd->add_option("--pair", args->pairs, "p0,p1 of the constant input coins");
  cmd->add_option("--delta", args->delta, "gap parameter (default: p1 - p0)");
  cmd->callback([args, &g, status] {
    std::vector<DivisionReport> reports;
    for (size_t k = 0; k < args->pairs.size(); ++k) {
      double p0 = 0.0, p1 = 0.0;
      if (std::sscanf(args->pairs[k].c_str(), "%lf,%lf", &p0, &p1) != 2) {
        throw PreconditionError("pair must look like p0,p1");
      }
      const double delta = args->delta > 0.0 ? args->delta : p1 - p0;
      reports.push_back(BenchDivision(p0, p1, delta, g.trials, DeriveSeed(g.seed, k)));
    }
    std::ostringstream out;
    if (g.format == "csv") {
      out << "p0,p1,delta,samples,bias,target,bias_stderr,mean_tosses,toss_bound,"
             "mean_rounds,chi_square,dof,p_value,pass\n";
      for (const DivisionReport& r : reports) {
        char line[512];
        std::snprintf(line, sizeof(line),
                      "%.17g,%.17g,%.17g,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,"
                      "%.17g,%d\n",
                      r.p0, r.p1, r.delta, r.samples, r.bias, r.p0 / r.p1, r.bias_stderr,
                      r.mean_tosses, r.toss_bound, r.mean_rounds, r.chi_square, r.dof,
                      r.p_value, r.pass ? 1 : 0);
        out << line;
      }
    } else {
      Json doc = Json::array();
      for (const DivisionReport& r : reports) {
        doc.push_back({{"p0", r.p0},
                       {"p1", r.p1},
                       {"delta", r.delta},
                       {"samples", r.samples},
                       {"bias", r.bias},
                       {"target", r.p0 / r.p1},
                       {"bias_stderr", r.bias_stderr},
                       {"mean_tosses", r.mean_tosses},
                       {"toss_bound", r.toss_bound},
                       {"mean_rounds", r.mean_rounds},
                       {"chi_square", r.chi_square},
                       {"dof", r.dof},
                       {"p_value", r.p_value},
                       {"pass", r.pass}});
      }
      out << doc.dump(2) << "\n";
    }
    WriteText(g.out, out.str());
    bool pass = true;
    for (const DivisionReport& r : reports) pass = pass && r.pass;
    *status = pass ? 0 : 1;
  });
}

}  // namespace
}  // namespace tocrs::cli

int main(int argc, char** argv) {
  using namespace tocrs::cli;
  CLI::App app{"online contention resolution schemes and the mechanisms built on them"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags");
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--trials", g.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  int status = 0;
  AddGen(app, g, &status);
  AddSolve(app, g, &status);
  AddRunScheme(app, g, &status);
  AddRunMech(app, g, &status);
  AddRunProcurement(app, g, &status);
  AddVerify(app, g, &status);
  AddBench(app, g, &status);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
