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

#include "doseopt/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"
#include "doseopt/random_forest.h"

namespace doseopt {
namespace {

using Clock = std::chrono::steady_clock;

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Rethrows module errors with the experiment name in front.
template <typename F>
auto WithContext(const std::string& context, F body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what());
  }
}

std::string EpsText(const std::optional<double>& eps) {
  return eps ? FormatDouble(*eps) : "disabled";
}

AllocationProblem UpliftProblem(const CadeMatrix& cade,
                                const std::vector<int>& groups) {
  return MakeUpliftProblem(cade, groups, 0.0);
}

SolveReport SolveChecked(const AllocationProblem& problem, SolverKind kind,
                         const BnbOptions& options) {
  SolveReport r = Solve(problem, kind, options);
  if (r.status == SolveStatus::kInfeasible) {
    throw Error(ErrorCode::kFailedPrecondition,
                "budget " + FormatDouble(problem.budget) + ": infeasible");
  }
  return r;
}

}  // namespace

std::uint64_t StreamSeed(const ExperimentConfig& cfg, SeedStream stream) {
  return MixSeed(cfg.seed, static_cast<std::uint64_t>(stream));
}

CovariateTable LoadOrSynthCovariates(const ExperimentConfig& cfg) {
  if (!cfg.data_csv.empty()) {
    CsvCovariateOptions options;
    options.has_header = cfg.data_has_header;
    options.first_column = cfg.data_first_column;
    return LoadCovariates(cfg.data_csv, options);
  }
  return SynthCovariates(cfg.synthetic_n,
                         StreamSeed(cfg, SeedStream::kCovariates));
}

PreparedData PrepareData(const ExperimentConfig& cfg,
                         const CovariateTable& covariates, double gamma) {
  GenConfig gen = cfg.gen;
  gen.seed = StreamSeed(cfg, SeedStream::kGeneration);
  gen.gamma = gamma;
  PreparedData out;
  out.full = GenerateDataset(covariates, gen);
  const std::size_t n = out.full.data.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const auto n_test = static_cast<std::size_t>(
      std::llround(cfg.test_fraction * static_cast<double>(n)));
  if (n_test == 0) {
    out.train_rows = perm;
    out.test_rows = perm;
  } else {
    if (n_test >= n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "test_fraction leaves no training rows");
    }
    std::mt19937_64 rng(StreamSeed(cfg, SeedStream::kSplit));
    std::shuffle(perm.begin(), perm.end(), rng);
    out.test_rows.assign(perm.begin(), perm.begin() + n_test);
    out.train_rows.assign(perm.begin() + n_test, perm.end());
    std::sort(out.test_rows.begin(), out.test_rows.end());
    std::sort(out.train_rows.begin(), out.train_rows.end());
  }
  out.train = SubsetRows(out.full.data, out.train_rows);
  out.test = SubsetRows(out.full.data, out.test_rows);
  return out;
}

std::unique_ptr<DoseResponseModel> FitEstimator(EstimatorKind kind,
                                                const Dataset& train,
                                                const GroundTruth& truth,
                                                const ExperimentConfig& cfg,
                                                std::string* note) {
  switch (kind) {
    case EstimatorKind::kOracle:
      return MakeOracle(truth);
    case EstimatorKind::kBinnedSLearner:
      return FitBinnedSLearner(train, cfg.binned_bins, cfg.binned_k);
    case EstimatorKind::kRfSLearner:
      break;
  }
  RfConfig rf = cfg.rf;
  rf.seed = StreamSeed(cfg, SeedStream::kForest);
  const bool search = !cfg.rf_grid_trees.empty() ||
                      !cfg.rf_grid_depth.empty() ||
                      !cfg.rf_grid_min_leaf.empty();
  if (search && cfg.cv_folds >= 2) {
    const std::vector<int> trees =
        cfg.rf_grid_trees.empty() ? std::vector<int>{rf.n_trees}
                                  : cfg.rf_grid_trees;
    const std::vector<int> depths =
        cfg.rf_grid_depth.empty() ? std::vector<int>{rf.max_depth}
                                  : cfg.rf_grid_depth;
    const std::vector<int> leaves =
        cfg.rf_grid_min_leaf.empty() ? std::vector<int>{rf.min_samples_leaf}
                                     : cfg.rf_grid_min_leaf;
    std::vector<RfConfig> grid;
    for (int t : trees) {
      for (int d : depths) {
        for (int l : leaves) {
          RfConfig c = rf;
          c.n_trees = t;
          c.max_depth = d;
          c.min_samples_leaf = l;
          grid.push_back(c);
        }
      }
    }
    rf = CrossValidateRf(train, grid, cfg.cv_folds,
                         StreamSeed(cfg, SeedStream::kCrossValidation))
             .best;
  }
  if (note != nullptr) *note = rf.ToString();
  return FitRfSLearner(train, rf);
}

BnbOptions MakeBnbOptions(const ExperimentConfig& cfg) {
  BnbOptions options;
  options.node_limit = cfg.bnb_node_limit;
  options.time_limit_seconds = cfg.bnb_time_limit;
  options.relative_gap = cfg.bnb_relative_gap;
  return options;
}

std::vector<double> AuucGrid(const ExperimentConfig& cfg) {
  const double top = cfg.auuc_caps.back();
  std::vector<double> grid;
  const auto steps = static_cast<int>(std::llround(top / cfg.auuc_step));
  for (int j = 1; j <= steps; ++j) grid.push_back(j * cfg.auuc_step);
  return grid;
}

// ---------------------------------------------------------------------------
// Experiment 1

std::string Exp1Result::ToCsv() const {
  std::ostringstream out;
  out << "estimator,mise";
  for (double cap : caps) {
    out << ",auuc" << FormatDouble(cap) << "_greedy,auuc" << FormatDouble(cap)
        << "_exact";
  }
  out << ",max_abs_regret\n";
  for (const Exp1Row& row : rows) {
    out << row.estimator << ',' << FormatDouble(row.mise);
    for (const auto& pair : row.auuc) {
      out << ',' << FormatDouble(pair[0]) << ',' << FormatDouble(pair[1]);
    }
    double worst = 0.0;
    for (double r : row.regret) worst = std::max(worst, std::abs(r));
    out << ',' << FormatDouble(worst) << '\n';
  }
  return out.str();
}

Exp1Result RunExp1(const ExperimentConfig& cfg) {
  return WithContext("exp1", [&] {
    cfg.Validate();
    const CovariateTable cov = LoadOrSynthCovariates(cfg);
    const PreparedData data = PrepareData(cfg, cov, cfg.gammas.front());
    const GroundTruth& truth = data.full.truth;
    const CadeMatrix t_true = TrueCadeMatrix(truth, data.test, cfg.delta);
    const AllocationProblem truth_problem =
        UpliftProblem(t_true, data.test.groups);
    const BnbOptions options = MakeBnbOptions(cfg);
    const std::vector<double> grid = AuucGrid(cfg);
    const std::array<SolverKind, 2> solvers = {SolverKind::kGreedy,
                                               cfg.solver};

    std::array<ValueCurve, 2> optimal;
    for (int s = 0; s < 2; ++s) {
      optimal[s] = ComputeValueCurve(truth_problem, grid, solvers[s],
                                     t_true.values, options);
    }
    const ValueCurve optimal_budgets = ComputeValueCurve(
        truth_problem, cfg.budgets, cfg.solver, t_true.values, options);

    Exp1Result result;
    result.caps = cfg.auuc_caps;
    result.budgets = cfg.budgets;
    Exp1Row optimal_row;
    optimal_row.estimator = "optimal";
    for (double cap : cfg.auuc_caps) {
      std::array<double, 2> pair{};
      for (int s = 0; s < 2; ++s) {
        const ValueCurve c = TruncateCurve(optimal[s], cap);
        pair[s] = Auuc(c, c);
      }
      optimal_row.auuc.push_back(pair);
    }
    optimal_row.regret.assign(cfg.budgets.size(), 0.0);
    result.rows.push_back(optimal_row);

    for (EstimatorKind kind : cfg.estimators) {
      const std::string name = EstimatorKindName(kind);
      std::string note;
      const auto model =
          FitEstimator(kind, data.train, truth, cfg, &note);
      if (!note.empty()) result.notes += name + ": " + note + "\n";
      Exp1Row row;
      row.estimator = name;
      row.mise = Mise(*model, truth, data.test);
      const CadeMatrix t_hat =
          ComputeCadeMatrix(*model, data.test.covariates, cfg.delta);
      const AllocationProblem est_problem =
          UpliftProblem(t_hat, data.test.groups);
      std::array<ValueCurve, 2> presc;
      for (int s = 0; s < 2; ++s) {
        presc[s] = ComputeValueCurve(est_problem, grid, solvers[s],
                                     t_true.values, options);
      }
      for (double cap : cfg.auuc_caps) {
        std::array<double, 2> pair{};
        for (int s = 0; s < 2; ++s) {
          pair[s] = Auuc(TruncateCurve(presc[s], cap),
                         TruncateCurve(optimal[s], cap));
        }
        row.auuc.push_back(pair);
      }
      ValueCurve expected;
      const ValueCurve presc_budgets =
          ComputeValueCurve(est_problem, cfg.budgets, cfg.solver,
                            t_true.values, options, &expected);
      for (std::size_t j = 0; j < cfg.budgets.size(); ++j) {
        row.regret.push_back(
            Regret(optimal_budgets.values[j], presc_budgets.values[j]));
      }
      result.rows.push_back(row);
      result.curves.push_back({expected, presc_budgets, optimal_budgets});
    }
    return result;
  });
}

// ---------------------------------------------------------------------------
// Experiment 2

std::string Exp2Result::ToCsv() const {
  std::ostringstream out;
  out << "gamma,estimator,eps_dt,eps_do,norm_presc,norm_exp,mean_dose_g0,"
         "mean_dose_g1,outcome_g0_est,outcome_g1_est,outcome_g0_true,"
         "outcome_g1_true,disparity_gap,limited_solves\n";
  for (const Exp2Cell& c : cells) {
    out << FormatDouble(c.gamma) << ',' << c.estimator << ','
        << EpsText(c.eps_dt) << ',' << EpsText(c.eps_do) << ','
        << FormatDouble(c.norm_presc) << ',' << FormatDouble(c.norm_exp)
        << ',' << FormatDouble(c.mean_dose_g0) << ','
        << FormatDouble(c.mean_dose_g1) << ','
        << FormatDouble(c.outcome_g0_est) << ','
        << FormatDouble(c.outcome_g1_est) << ','
        << FormatDouble(c.outcome_g0_true) << ','
        << FormatDouble(c.outcome_g1_true) << ','
        << FormatDouble(c.disparity_gap) << ',' << c.limited_solves << '\n';
  }
  return out.str();
}

std::string Exp2Result::FairnessCsv(double gamma,
                                    const std::string& estimator) const {
  std::ostringstream out;
  out << "eps_dt,eps_do,mean_dose_g0,mean_dose_g1,outcome_g0_est,"
         "outcome_g1_est,outcome_g0_true,outcome_g1_true,objective\n";
  for (const Exp2Cell& c : cells) {
    if (c.gamma != gamma || c.estimator != estimator) continue;
    out << EpsText(c.eps_dt) << ',' << EpsText(c.eps_do) << ','
        << FormatDouble(c.mean_dose_g0) << ',' << FormatDouble(c.mean_dose_g1)
        << ',' << FormatDouble(c.outcome_g0_est) << ','
        << FormatDouble(c.outcome_g1_est) << ','
        << FormatDouble(c.outcome_g0_true) << ','
        << FormatDouble(c.outcome_g1_true) << ','
        << FormatDouble(c.norm_presc) << '\n';
  }
  return out.str();
}

Exp2Result RunExp2(const ExperimentConfig& cfg) {
  return WithContext("exp2", [&] {
    cfg.Validate();
    const CovariateTable cov = LoadOrSynthCovariates(cfg);
    const BnbOptions options = MakeBnbOptions(cfg);
    const double nb = static_cast<double>(cfg.budgets.size());
    Exp2Result result;
    for (double gamma : cfg.gammas) {
      const PreparedData data = PrepareData(cfg, cov, gamma);
      const CadeMatrix t_true =
          TrueCadeMatrix(data.full.truth, data.test, cfg.delta);
      AllocationProblem truth_problem =
          UpliftProblem(t_true, data.test.groups);
      std::vector<double> u_opt;
      for (double b : cfg.budgets) {
        truth_problem.budget = b;
        u_opt.push_back(SolveChecked(truth_problem, cfg.solver, options)
                            .objective);
        if (std::abs(u_opt.back()) <= 1e-12) {
          throw Error(ErrorCode::kNumerical,
                      "optimal uplift is zero at budget " + FormatDouble(b));
        }
      }
      for (EstimatorKind kind : cfg.exp2_estimators) {
        const auto model =
            FitEstimator(kind, data.train, data.full.truth, cfg);
        const CadeMatrix t_hat =
            ComputeCadeMatrix(*model, data.test.covariates, cfg.delta);
        AllocationProblem problem = UpliftProblem(t_hat, data.test.groups);
        std::vector<double> u_exp_free;
        for (double b : cfg.budgets) {
          problem.budget = b;
          u_exp_free.push_back(
              SolveChecked(problem, cfg.solver, options).objective);
        }
        // Policies of the cells one step tighter in either slack seed the
        // search, so the objective cannot decrease along either axis.
        const std::size_t nb_int = cfg.budgets.size();
        const std::size_t ndo = cfg.eps_do.size();
        std::vector<std::vector<Policy>> cell_policies(
            cfg.eps_dt.size() * ndo);
        for (std::size_t a = 0; a < cfg.eps_dt.size(); ++a) {
          for (std::size_t c = 0; c < ndo; ++c) {
            const auto& eps_dt = cfg.eps_dt[a];
            const auto& eps_do = cfg.eps_do[c];
            Exp2Cell cell;
            cell.gamma = gamma;
            cell.estimator = EstimatorKindName(kind);
            cell.eps_dt = eps_dt;
            cell.eps_do = eps_do;
            problem.eps_dt = eps_dt;
            problem.eps_do = eps_do;
            std::vector<Policy>& mine = cell_policies[a * ndo + c];
            for (std::size_t j = 0; j < nb_int; ++j) {
              problem.budget = cfg.budgets[j];
              BnbOptions seeded = options;
              if (a > 0) {
                seeded.start_policies.push_back(
                    cell_policies[(a - 1) * ndo + c][j]);
              }
              if (c > 0) {
                seeded.start_policies.push_back(
                    cell_policies[a * ndo + c - 1][j]);
              }
              const SolveReport r = SolveChecked(problem, cfg.solver, seeded);
              mine.push_back(r.policy);
              if (r.status == SolveStatus::kLimit) ++cell.limited_solves;
              const double presc = PolicyValue(r.policy, t_true.values,
                                               problem.benefits);
              cell.norm_presc += presc / u_opt[j] / nb;
              cell.norm_exp += (std::abs(u_exp_free[j]) > 1e-12
                                    ? r.objective / u_exp_free[j]
                                    : 1.0) /
                               nb;
              const FairnessReport est = MakeFairnessReport(
                  r.policy, t_hat.values, t_hat.doses, data.test.groups);
              const FairnessReport tru = MakeFairnessReport(
                  r.policy, t_true.values, t_true.doses, data.test.groups);
              cell.mean_dose_g0 += est.mean_dose_g0 / nb;
              cell.mean_dose_g1 += est.mean_dose_g1 / nb;
              cell.outcome_g0_est += est.outcome_g0 / nb;
              cell.outcome_g1_est += est.outcome_g1 / nb;
              cell.outcome_g0_true += tru.outcome_g0 / nb;
              cell.outcome_g1_true += tru.outcome_g1 / nb;
              cell.disparity_gap +=
                  std::abs((est.outcome_g0 - est.outcome_g1) -
                           (tru.outcome_g0 - tru.outcome_g1)) /
                  nb;
            }
            result.cells.push_back(cell);
          }
        }
      }
    }
    return result;
  });
}

// ---------------------------------------------------------------------------
// Experiment 3

std::string Exp3Result::ToCsv() const {
  std::ostringstream out;
  out << "budget,u_of_uopt,v_of_uopt,u_of_vopt,v_of_vopt\n";
  for (const Exp3Row& r : rows) {
    out << FormatDouble(r.budget) << ',' << FormatDouble(r.u_of_uopt) << ','
        << FormatDouble(r.v_of_uopt) << ',' << FormatDouble(r.u_of_vopt)
        << ',' << FormatDouble(r.v_of_vopt) << '\n';
  }
  return out.str();
}

std::vector<double> DrawBenefits(const BenefitSpec& spec, std::size_t n) {
  if (!spec.uniform) return std::vector<double>(n, 1.0);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(spec.lo, spec.hi);
  std::vector<double> b(n);
  for (double& v : b) v = spec.lo == spec.hi ? spec.lo : u(rng);
  return b;
}

Exp3Result RunExp3(const ExperimentConfig& cfg) {
  return WithContext("exp3", [&] {
    cfg.Validate();
    const CovariateTable cov = LoadOrSynthCovariates(cfg);
    const PreparedData data = PrepareData(cfg, cov, cfg.gammas.front());
    const CadeMatrix t_true =
        TrueCadeMatrix(data.full.truth, data.test, cfg.delta);
    const auto model = FitEstimator(cfg.exp3_estimator, data.train,
                                    data.full.truth, cfg);
    const CadeMatrix t_hat =
        ComputeCadeMatrix(*model, data.test.covariates, cfg.delta);
    const std::vector<double> ones(data.test.size(), 1.0);
    const std::vector<double> b = DrawBenefits(cfg.benefits, data.test.size());
    AllocationProblem u_problem = UpliftProblem(t_hat, data.test.groups);
    AllocationProblem v_problem = u_problem;
    v_problem.benefits = b;
    const BnbOptions options = MakeBnbOptions(cfg);
    Exp3Result result;
    for (double budget : cfg.budgets) {
      u_problem.budget = v_problem.budget = budget;
      const Policy pu = SolveChecked(u_problem, cfg.solver, options).policy;
      const Policy pv = SolveChecked(v_problem, cfg.solver, options).policy;
      Exp3Row row;
      row.budget = budget;
      row.u_of_uopt = PolicyValue(pu, t_true.values, ones);
      row.v_of_uopt = PolicyValue(pu, t_true.values, b);
      row.u_of_vopt = PolicyValue(pv, t_true.values, ones);
      row.v_of_vopt = PolicyValue(pv, t_true.values, b);
      result.rows.push_back(row);
    }
    return result;
  });
}

// ---------------------------------------------------------------------------
// Scalability

CovariateTable OversampleCovariates(const CovariateTable& covariates,
                                    int factor, double jitter,
                                    std::uint64_t seed) {
  if (factor < 1) {
    throw Error(ErrorCode::kInvalidArgument, "oversampling factor must be >= 1");
  }
  const std::size_t n = covariates.rows();
  const std::size_t cols = covariates.features.cols();
  Matrix out(n * static_cast<std::size_t>(factor), cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(covariates.row(i).begin(), cols, out.row(i).begin());
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = n; i < out.rows(); ++i) {
    const std::size_t src = pick(rng);
    std::copy_n(covariates.row(src).begin(), cols, out.row(i).begin());
    for (std::size_t c : kContinuousFeatures) {
      out(i, c) += jitter * noise(rng);
    }
  }
  return CovariateTable{std::move(out)};
}

std::string ScalabilityResult::ToCsv() const {
  std::ostringstream out;
  out << "factor,n,budget,greedy_ms,greedy_value,exact_status,exact_ms,"
         "exact_value,exact_bound,exact_nodes,dp_ms,dp_value\n";
  for (const ScalabilityRow& r : rows) {
    out << r.factor << ',' << r.entities << ',' << FormatDouble(r.budget)
        << ',' << FormatDouble(r.greedy_ms) << ','
        << FormatDouble(r.greedy_value) << ',';
    if (r.exact) {
      out << SolveStatusName(r.exact->status) << ','
          << FormatDouble(r.exact->wall_ms) << ','
          << FormatDouble(r.exact->objective) << ','
          << (r.exact->best_bound ? FormatDouble(*r.exact->best_bound) : "")
          << ',' << r.exact->nodes;
    } else {
      out << "skipped,,,,";
    }
    out << ',' << FormatDouble(r.dp_ms) << ',' << FormatDouble(r.dp_value)
        << '\n';
  }
  return out.str();
}

ScalabilityResult RunScalability(const ExperimentConfig& cfg) {
  return WithContext("scalability", [&] {
    cfg.Validate();
    const CovariateTable cov = LoadOrSynthCovariates(cfg);
    const PreparedData data = PrepareData(cfg, cov, cfg.gammas.front());
    const GroundTruth& truth = data.full.truth;
    ScalabilityResult result;
    for (int factor : cfg.scal_factors) {
      const CovariateTable big = OversampleCovariates(
          data.full.data.covariates, factor, cfg.scal_jitter,
          MixSeed(StreamSeed(cfg, SeedStream::kOversample),
                  static_cast<std::uint64_t>(factor)));
      const std::size_t n = big.rows();
      CadeMatrix t;
      t.doses = DoseGrid(cfg.delta);
      t.provenance = Provenance::kGroundTruth;
      t.values = Matrix(n, t.doses.size());
      std::vector<int> groups(n);
      for (std::size_t i = 0; i < n; ++i) {
        groups[i] = big.row(i)[truth.protected_feature] == 1.0 ? 1 : 0;
        const auto v =
            TrueCadeVector(truth, big.row(i), groups[i], cfg.delta);
        std::copy(v.begin(), v.end(), t.values.row(i).begin());
      }
      AllocationProblem problem =
          MakeUpliftProblem(t, groups, cfg.scal_budget * factor);
      ScalabilityRow row;
      row.factor = factor;
      row.entities = n;
      row.budget = problem.budget;
      const SolveReport greedy = SolveGreedy(problem);
      row.greedy_ms = greedy.wall_ms;
      row.greedy_value = greedy.objective;
      if (factor <= cfg.scal_exact_max_factor) {
        BnbOptions options = MakeBnbOptions(cfg);
        options.time_limit_seconds = cfg.scal_time_limit;
        row.exact = SolveBnb(problem, options);
      }
      if (DpApplicable(problem)) {
        const SolveReport dp = SolveDp(problem);
        row.dp_ms = dp.wall_ms;
        row.dp_value = dp.objective;
      }
      result.rows.push_back(std::move(row));
    }
    return result;
  });
}

// ---------------------------------------------------------------------------
// Delta sweep

std::string DeltaSweepResult::ToCsv() const {
  std::ostringstream out;
  out << "delta,u_exp,u_presc,status,wall_ms\n";
  for (const DeltaSweepRow& r : rows) {
    out << r.delta << ',' << FormatDouble(r.u_exp) << ','
        << FormatDouble(r.u_presc) << ',' << r.status << ','
        << FormatDouble(r.wall_ms) << '\n';
  }
  return out.str();
}

DeltaSweepResult RunDeltaSweep(const ExperimentConfig& cfg) {
  return WithContext("delta-sweep", [&] {
    cfg.Validate();
    const CovariateTable cov = LoadOrSynthCovariates(cfg);
    const PreparedData data = PrepareData(cfg, cov, cfg.gammas.front());
    const auto model = FitEstimator(cfg.sweep_estimator, data.train,
                                    data.full.truth, cfg);
    const BnbOptions options = MakeBnbOptions(cfg);
    DeltaSweepResult result;
    for (int delta : cfg.sweep_deltas) {
      const CadeMatrix t_true =
          TrueCadeMatrix(data.full.truth, data.test, delta);
      const CadeMatrix t_hat =
          ComputeCadeMatrix(*model, data.test.covariates, delta);
      AllocationProblem problem = UpliftProblem(t_hat, data.test.groups);
      problem.budget = cfg.sweep_budget;
      const auto start = Clock::now();
      const SolveReport r = SolveChecked(problem, cfg.solver, options);
      DeltaSweepRow row;
      row.wall_ms = ElapsedMs(start);
      row.delta = delta;
      row.u_exp = r.objective;
      row.u_presc = PolicyValue(r.policy, t_true.values, problem.benefits);
      row.status = SolveStatusName(r.status);
      result.rows.push_back(row);
    }
    return result;
  });
}

void WriteResult(const std::string& directory, const std::string& name,
                 const std::string& csv, const ExperimentConfig& cfg,
                 const std::string& extra_meta) {
  std::filesystem::create_directories(directory);
  WriteTextFile(directory + "/" + name, csv);
  std::ostringstream meta;
  meta << "config_hash = " << cfg.Hash() << '\n'
       << "seed = " << cfg.seed << '\n';
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) {
      s += (j ? "," : "") + FormatDouble(static_cast<double>(v[j]));
    }
    return s;
  };
  meta << "budget_grid = " << list(cfg.budgets) << '\n'
       << "auuc_grid = " << list(AuucGrid(cfg)) << '\n'
       << "dose_grid = " << list(DoseGrid(cfg.delta)) << '\n';
  meta << extra_meta;
  meta << "# full configuration\n" << cfg.ToText();
  WriteTextFile(directory + "/" + name + ".meta", meta.str());
}

}  // namespace doseopt
