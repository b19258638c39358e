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

#ifndef DOSEOPT_CONFIG_H_
#define DOSEOPT_CONFIG_H_

// Experiment configuration: a flat "key = value" text file. Lines starting
// with '#' are comments. Lists are comma separated; numeric lists also
// accept "start:stop:step" (inclusive stop). Unknown keys are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "doseopt/alloc.h"
#include "doseopt/datagen.h"
#include "doseopt/estimators.h"
#include "doseopt/random_forest.h"

namespace doseopt {

struct BenefitSpec {
  bool uniform = true;  // false: all ones.
  double lo = 0.5;
  double hi = 1.5;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  // Data source: covariate CSV when set, otherwise synthetic covariates.
  std::string data_csv;
  bool data_has_header = false;
  std::size_t data_first_column = 0;
  std::size_t synthetic_n = 747;

  std::uint64_t seed = 1;
  GenConfig gen;  // gen.seed is derived from `seed`.
  // Share of rows held out as the allocation set; 0 allocates on all rows.
  double test_fraction = 0.3;

  int delta = 10;
  std::vector<EstimatorKind> estimators = {EstimatorKind::kOracle,
                                           EstimatorKind::kRfSLearner,
                                           EstimatorKind::kBinnedSLearner};
  RfConfig rf;
  // Cross-validation grid; empty lists keep `rf` as is.
  std::vector<int> rf_grid_trees;
  std::vector<int> rf_grid_depth;
  std::vector<int> rf_grid_min_leaf;
  int cv_folds = 5;
  int binned_bins = 10;
  int binned_k = 20;

  std::vector<double> budgets;  // Default 25:250:25.
  std::vector<double> auuc_caps = {140.0, 250.0};
  double auuc_step = 10.0;

  // Ascending; nullopt entries mean "disabled" and must come last.
  std::vector<std::optional<double>> eps_dt;
  std::vector<std::optional<double>> eps_do;
  std::vector<double> gammas = {0.0};
  std::vector<EstimatorKind> exp2_estimators = {EstimatorKind::kRfSLearner};

  BenefitSpec benefits;
  EstimatorKind exp3_estimator = EstimatorKind::kOracle;

  SolverKind solver = SolverKind::kAuto;
  // Branch-and-bound limits used inside experiments. Solves that stop at a
  // limit are counted in the outputs.
  std::int64_t bnb_node_limit = 200;
  double bnb_time_limit = 0.0;
  double bnb_relative_gap = 1e-4;

  std::vector<int> scal_factors = {1, 2, 4, 8};
  double scal_budget = 140.0;  // Budget at factor 1; scaled by the factor.
  double scal_jitter = 0.01;
  int scal_exact_max_factor = 2;
  double scal_time_limit = 300.0;

  std::vector<int> sweep_deltas = {1, 2, 5, 10, 20};
  double sweep_budget = 140.0;
  EstimatorKind sweep_estimator = EstimatorKind::kOracle;

  ExperimentConfig();

  void Validate() const;
  // Canonical "key = value" listing of every setting, sorted by key.
  std::string ToText() const;
  // FNV-1a 64 of ToText(), as 16 hex digits.
  std::string Hash() const;
};

ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Applies one setting; throws Error(kParse) for unknown keys or bad values.
void SetConfigValue(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

std::vector<double> ParseNumberList(const std::string& text);
EstimatorKind ParseEstimatorKind(const std::string& name);

std::uint64_t Fnv1a64(const std::string& text);

}  // namespace doseopt

#endif  // DOSEOPT_CONFIG_H_
