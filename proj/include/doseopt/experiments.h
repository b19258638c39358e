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

#ifndef DOSEOPT_EXPERIMENTS_H_
#define DOSEOPT_EXPERIMENTS_H_

// End-to-end experiment drivers. Each returns a result table and can write
// it as CSV with a metadata sidecar.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doseopt/alloc.h"
#include "doseopt/config.h"
#include "doseopt/datagen.h"
#include "doseopt/estimators.h"
#include "doseopt/metrics.h"

namespace doseopt {

// Seeds for the independent random streams derived from the global seed.
enum class SeedStream : std::uint64_t {
  kCovariates = 1,
  kGeneration = 2,
  kSplit = 3,
  kForest = 4,
  kCrossValidation = 5,
  kOversample = 6,
};

std::uint64_t StreamSeed(const ExperimentConfig& cfg, SeedStream stream);

CovariateTable LoadOrSynthCovariates(const ExperimentConfig& cfg);

struct PreparedData {
  GeneratedData full;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  Dataset train;
  Dataset test;  // The allocation set.
};

// Generates outcomes with the given gamma and splits off the allocation set.
// With test_fraction = 0 both parts are the full dataset.
PreparedData PrepareData(const ExperimentConfig& cfg,
                         const CovariateTable& covariates, double gamma);

// Fits the requested estimator on `train`. For rf, a non-empty grid runs
// cross-validation first; `note` receives the chosen settings.
std::unique_ptr<DoseResponseModel> FitEstimator(EstimatorKind kind,
                                                const Dataset& train,
                                                const GroundTruth& truth,
                                                const ExperimentConfig& cfg,
                                                std::string* note = nullptr);

BnbOptions MakeBnbOptions(const ExperimentConfig& cfg);

// Budget grid used for curve areas: step, 2 step, ..., max cap.
std::vector<double> AuucGrid(const ExperimentConfig& cfg);

struct Exp1Row {
  std::string estimator;  // "optimal" for the full-information row.
  double mise = 0.0;
  // [cap][0] greedy, [cap][1] exact.
  std::vector<std::array<double, 2>> auuc;
  // Regret of the exact solver at each budget of cfg.budgets.
  std::vector<double> regret;
};

struct Exp1Result {
  std::vector<double> caps;
  std::vector<double> budgets;
  std::vector<Exp1Row> rows;
  // Exact-solver curves on cfg.budgets per estimator (same order as rows,
  // minus the optimal row).
  std::vector<std::array<ValueCurve, 3>> curves;  // exp, presc, opt.
  std::string notes;

  std::string ToCsv() const;
};

Exp1Result RunExp1(const ExperimentConfig& cfg);

struct Exp2Cell {
  double gamma = 0.0;
  std::string estimator;
  std::optional<double> eps_dt;
  std::optional<double> eps_do;
  // Averages over the budget grid.
  double norm_presc = 0.0;  // U_presc(B, eps) / U_opt(B, unconstrained)
  double norm_exp = 0.0;    // Objective / unconstrained objective, same T.
  double mean_dose_g0 = 0.0;
  double mean_dose_g1 = 0.0;
  double outcome_g0_est = 0.0;
  double outcome_g1_est = 0.0;
  double outcome_g0_true = 0.0;
  double outcome_g1_true = 0.0;
  // Mean over budgets of |est gap - true gap| in group outcome means.
  double disparity_gap = 0.0;
  int limited_solves = 0;  // Solves that stopped at a node or time limit.
};

struct Exp2Result {
  std::vector<Exp2Cell> cells;

  std::string ToCsv() const;
  // Fixed-header fairness table for one (gamma, estimator) slice.
  std::string FairnessCsv(double gamma, const std::string& estimator) const;
};

Exp2Result RunExp2(const ExperimentConfig& cfg);

struct Exp3Row {
  double budget = 0.0;
  double u_of_uopt = 0.0;
  double v_of_uopt = 0.0;
  double u_of_vopt = 0.0;
  double v_of_vopt = 0.0;
};

struct Exp3Result {
  std::vector<Exp3Row> rows;
  std::string ToCsv() const;
};

std::vector<double> DrawBenefits(const BenefitSpec& spec, std::size_t n);

Exp3Result RunExp3(const ExperimentConfig& cfg);

// Original rows first, then (factor - 1) * N rows resampled with
// replacement; continuous features of the resampled rows get Gaussian
// jitter with standard deviation `jitter`.
CovariateTable OversampleCovariates(const CovariateTable& covariates,
                                    int factor, double jitter,
                                    std::uint64_t seed);

struct ScalabilityRow {
  int factor = 1;
  std::size_t entities = 0;
  double budget = 0.0;
  double greedy_ms = 0.0;
  double greedy_value = 0.0;
  std::optional<SolveReport> exact;  // Branch-and-bound, when attempted.
  double dp_ms = 0.0;
  double dp_value = 0.0;
};

struct ScalabilityResult {
  std::vector<ScalabilityRow> rows;
  std::string ToCsv() const;
};

ScalabilityResult RunScalability(const ExperimentConfig& cfg);

struct DeltaSweepRow {
  int delta = 0;
  double u_exp = 0.0;
  double u_presc = 0.0;
  std::string status;
  double wall_ms = 0.0;
};

struct DeltaSweepResult {
  std::vector<DeltaSweepRow> rows;
  std::string ToCsv() const;
};

DeltaSweepResult RunDeltaSweep(const ExperimentConfig& cfg);

// Writes dir/name and dir/name.meta (config hash, seed, grids, full config).
void WriteResult(const std::string& directory, const std::string& name,
                 const std::string& csv, const ExperimentConfig& cfg,
                 const std::string& extra_meta = "");

}  // namespace doseopt

#endif  // DOSEOPT_EXPERIMENTS_H_
