// Copyright 2026 The doseopt Authors.
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

// Command-line driver: data generation, model fitting, allocation and the
// experiment suites. Exit code 0 on success, 1 on any library error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "doseopt/alloc.h"
#include "doseopt/config.h"
#include "doseopt/csv.h"
#include "doseopt/datagen.h"
#include "doseopt/error.h"
#include "doseopt/estimators.h"
#include "doseopt/experiments.h"
#include "doseopt/metrics.h"

namespace {

using doseopt::Error;
using doseopt::ErrorCode;
using doseopt::ExperimentConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  std::string data;
  std::optional<std::size_t> synthetic;
  std::vector<std::string> overrides;
};

void AddCommonFlags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config, "Config file (key = value)");
  cmd->add_option("--seed", flags->seed, "Global seed");
  cmd->add_option("--out", flags->out, "Output directory");
  auto* data =
      cmd->add_option("--data", flags->data, "Covariate CSV (25 columns)");
  auto* synth = cmd->add_option("--synthetic", flags->synthetic,
                                "Use N synthetic covariate rows");
  data->excludes(synth);
  cmd->add_option("--set", flags->overrides,
                  "Override a config key: --set key=value (repeatable)");
}

ExperimentConfig BuildConfig(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.config.empty()
                             ? ExperimentConfig()
                             : doseopt::LoadConfig(flags.config);
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "--set expects key=value, got " + kv);
    }
    doseopt::SetConfigValue(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.data.empty()) cfg.data_csv = flags.data;
  if (flags.synthetic) {
    cfg.data_csv.clear();
    cfg.synthetic_n = *flags.synthetic;
  }
  cfg.Validate();
  return cfg;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void RunGenerate(const CommonFlags& flags, double gamma) {
  const ExperimentConfig cfg = BuildConfig(flags);
  const doseopt::CovariateTable cov = doseopt::LoadOrSynthCovariates(cfg);
  const doseopt::PreparedData data = doseopt::PrepareData(cfg, cov, gamma);
  std::filesystem::create_directories(flags.out);
  doseopt::WriteResult(flags.out, "data.csv",
                       doseopt::DatasetToCsv(data.full.data), cfg);
  doseopt::WriteResult(flags.out, "train.csv",
                       doseopt::DatasetToCsv(data.train), cfg);
  doseopt::WriteResult(flags.out, "test.csv",
                       doseopt::DatasetToCsv(data.test), cfg);
  doseopt::WriteTextFile(flags.out + "/truth.txt",
                         doseopt::GroundTruthToText(data.full.truth));
  std::cout << "wrote " << data.full.data.size() << " rows ("
            << data.train.size() << " train, " << data.test.size()
            << " allocation) to " << flags.out << "\n";
  if (data.full.data.guarded_rows > 0) {
    std::cout << "note: " << data.full.data.guarded_rows
              << " rows hit the denominator floor\n";
  }
}

void RunFit(const CommonFlags& flags, const std::string& train_path,
            const std::string& eval_path, const std::string& truth_path,
            const std::string& estimator, double budget) {
  const ExperimentConfig cfg = BuildConfig(flags);
  const doseopt::Dataset train = doseopt::DatasetFromCsv(train_path);
  const doseopt::Dataset eval =
      eval_path.empty() ? train : doseopt::DatasetFromCsv(eval_path);
  const auto kind = doseopt::ParseEstimatorKind(estimator);
  std::optional<doseopt::GroundTruth> truth;
  if (!truth_path.empty()) {
    truth = doseopt::GroundTruthFromText(ReadFile(truth_path));
  }
  if (kind == doseopt::EstimatorKind::kOracle && !truth) {
    throw Error(ErrorCode::kInvalidArgument, "oracle needs --truth");
  }
  std::string note;
  const auto model = doseopt::FitEstimator(
      kind, train, truth.value_or(doseopt::GroundTruth{}), cfg, &note);
  std::filesystem::create_directories(flags.out);
  if (const auto* rf = dynamic_cast<const doseopt::RfSLearner*>(model.get())) {
    doseopt::WriteTextFile(flags.out + "/model.txt", rf->forest().Serialize());
  }
  const doseopt::CadeMatrix cade =
      doseopt::ComputeCadeMatrix(*model, eval.covariates, cfg.delta);
  doseopt::AllocationProblem problem =
      doseopt::MakeUpliftProblem(cade, eval.groups, budget);
  doseopt::WriteProblemFiles(problem, flags.out);
  std::cout << "fitted " << estimator;
  if (!note.empty()) std::cout << " (" << note << ")";
  std::cout << "; wrote cade.csv, cost.csv, meta.csv";
  if (truth) {
    doseopt::WriteTextFile(
        flags.out + "/cade_true.csv",
        doseopt::CadeMatrixToCsv(doseopt::TrueCadeMatrix(*truth, eval,
                                                         cfg.delta)));
    std::cout << ", cade_true.csv; MISE "
              << doseopt::FormatDouble(doseopt::Mise(*model, *truth, eval));
  }
  std::cout << "\n";
}

struct AllocateFlags {
  std::string problem_dir;
  std::string solver = "auto";
  std::optional<double> budget;
  std::string eps_dt;
  std::string eps_do;
  bool strict = false;
  double time_limit = 0.0;
  std::int64_t node_limit = 1'000'000;
};

std::optional<double> ParseEpsFlag(const std::string& text) {
  if (text == "disabled") return std::nullopt;
  return doseopt::ParseCell(text, 1, 1);
}

int RunAllocate(const CommonFlags& flags, const AllocateFlags& a) {
  const std::string dir = a.problem_dir;
  doseopt::AllocationProblem problem = doseopt::ReadProblemFiles(
      dir + "/cade.csv", dir + "/cost.csv", dir + "/meta.csv");
  if (a.budget) problem.budget = *a.budget;
  if (!a.eps_dt.empty()) problem.eps_dt = ParseEpsFlag(a.eps_dt);
  if (!a.eps_do.empty()) problem.eps_do = ParseEpsFlag(a.eps_do);
  problem.strict_fairness = a.strict;
  doseopt::BnbOptions options;
  options.time_limit_seconds = a.time_limit;
  options.node_limit = a.node_limit;
  const doseopt::SolveReport report =
      doseopt::Solve(problem, doseopt::ParseSolverKind(a.solver), options);
  for (const std::string& w : report.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  std::filesystem::create_directories(flags.out);
  if (report.status == doseopt::SolveStatus::kInfeasible) {
    std::cerr << "error: the allocation problem is infeasible\n";
    return 1;
  }
  doseopt::WriteTextFile(flags.out + "/policy.csv",
                         doseopt::PolicyToCsv(report.policy, problem.doses));
  doseopt::WriteTextFile(flags.out + "/report.csv",
                         doseopt::SolveReportCsvHeader() + "\n" +
                             doseopt::SolveReportCsvRow(report, problem) +
                             "\n");
  std::cout << doseopt::SolveStatusName(report.status) << " objective "
            << doseopt::FormatDouble(report.objective) << " cost "
            << doseopt::FormatDouble(
                   doseopt::PolicyCost(report.policy, problem.costs))
            << "\n";
  return 0;
}

void RunExperiment(const std::string& which, const CommonFlags& flags) {
  const ExperimentConfig cfg = BuildConfig(flags);
  const std::string& out = flags.out;
  if (which == "exp1") {
    const doseopt::Exp1Result r = doseopt::RunExp1(cfg);
    doseopt::WriteResult(out, "exp1.csv", r.ToCsv(), cfg,
                         "auuc_step = " + doseopt::FormatDouble(cfg.auuc_step) +
                             "\n" + r.notes);
    for (std::size_t e = 0; e < r.curves.size(); ++e) {
      const auto& c = r.curves[e];
      doseopt::WriteResult(out, "exp1_curve_" + r.rows[e + 1].estimator +
                                    ".csv",
                           doseopt::CurvesToCsv(c[0], c[1], c[2]), cfg);
    }
    std::cout << r.ToCsv();
  } else if (which == "exp2") {
    const doseopt::Exp2Result r = doseopt::RunExp2(cfg);
    doseopt::WriteResult(out, "exp2.csv", r.ToCsv(), cfg);
    for (double gamma : cfg.gammas) {
      for (auto kind : cfg.exp2_estimators) {
        const std::string name = doseopt::EstimatorKindName(kind);
        doseopt::WriteResult(
            out,
            "exp2_fairness_" + name + "_gamma" +
                doseopt::FormatDouble(gamma) + ".csv",
            r.FairnessCsv(gamma, name), cfg);
      }
    }
    std::cout << r.ToCsv();
  } else if (which == "exp3") {
    const doseopt::Exp3Result r = doseopt::RunExp3(cfg);
    doseopt::WriteResult(out, "exp3.csv", r.ToCsv(), cfg);
    std::cout << r.ToCsv();
  } else if (which == "scalability") {
    const doseopt::ScalabilityResult r = doseopt::RunScalability(cfg);
    doseopt::WriteResult(out, "scalability.csv", r.ToCsv(), cfg);
    std::cout << r.ToCsv();
  } else {
    const doseopt::DeltaSweepResult r = doseopt::RunDeltaSweep(cfg);
    doseopt::WriteResult(out, "delta_sweep.csv", r.ToCsv(), cfg);
    std::cout << r.ToCsv();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doseopt: dose allocation under budget and fairness limits"};
  app.require_subcommand(1);

  CommonFlags flags;
  double gamma = 0.0;
  auto* generate = app.add_subcommand("generate", "Generate a dataset");
  AddCommonFlags(generate, &flags);
  generate->add_option("--gamma", gamma, "Group outcome amplifier");

  std::string train_path, eval_path, truth_path, estimator = "rf";
  double fit_budget = 0.0;
  auto* fit = app.add_subcommand("fit", "Fit an estimator, write effects");
  AddCommonFlags(fit, &flags);
  fit->add_option("--train", train_path, "Training dataset CSV")->required();
  fit->add_option("--eval", eval_path, "Rows to score (default: train)");
  fit->add_option("--truth", truth_path, "Ground truth file");
  fit->add_option("--estimator", estimator, "oracle|rf|binned");
  fit->add_option("--budget", fit_budget, "Budget written to meta.csv");

  AllocateFlags alloc;
  auto* allocate = app.add_subcommand("allocate", "Solve an allocation");
  AddCommonFlags(allocate, &flags);
  allocate->add_option("--problem", alloc.problem_dir,
                       "Directory with cade.csv, cost.csv, meta.csv")
      ->required();
  allocate->add_option("--solver", alloc.solver, "greedy|dp|bnb|auto|brute");
  allocate->add_option("--budget", alloc.budget, "Override the budget");
  allocate->add_option("--eps-dt", alloc.eps_dt, "Dose slack or 'disabled'");
  allocate->add_option("--eps-do", alloc.eps_do, "Outcome slack or 'disabled'");
  allocate->add_flag("--strict-fairness", alloc.strict,
                     "Keep fairness rows even at eps >= 1");
  allocate->add_option("--time-limit", alloc.time_limit, "Seconds (0: none)");
  allocate->add_option("--node-limit", alloc.node_limit, "B&B node limit");

  std::vector<std::pair<std::string, CLI::App*>> experiments;
  for (const char* name :
       {"exp1", "exp2", "exp3", "scalability", "delta-sweep"}) {
    auto* cmd = app.add_subcommand(name, std::string("Run ") + name);
    AddCommonFlags(cmd, &flags);
    experiments.emplace_back(name, cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      RunGenerate(flags, gamma);
    } else if (fit->parsed()) {
      RunFit(flags, train_path, eval_path, truth_path, estimator, fit_budget);
    } else if (allocate->parsed()) {
      return RunAllocate(flags, alloc);
    } else {
      for (const auto& [name, cmd] : experiments) {
        if (cmd->parsed()) RunExperiment(name, flags);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << doseopt::ErrorCodeName(e.code())
              << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
