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

#ifndef DOSEOPT_ESTIMATORS_H_
#define DOSEOPT_ESTIMATORS_H_

// Dose-response (CADR) estimators and the discretized effect matrices built
// from them.

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "doseopt/datagen.h"
#include "doseopt/matrix.h"
#include "doseopt/random_forest.h"

namespace doseopt {

enum class EstimatorKind { kOracle, kRfSLearner, kBinnedSLearner };

const char* EstimatorKindName(EstimatorKind kind);

// mu_hat(s, x). Implementations are immutable after fitting and return
// values clamped to [0, 1].
class DoseResponseModel {
 public:
  virtual ~DoseResponseModel() = default;
  virtual EstimatorKind kind() const = 0;
  virtual double Predict(double dose, std::span<const double> x) const = 0;
};

// Predicts the ground-truth curve exactly. The protected attribute is read
// from the configured covariate column.
class OracleModel : public DoseResponseModel {
 public:
  explicit OracleModel(GroundTruth truth) : truth_(std::move(truth)) {}
  EstimatorKind kind() const override { return EstimatorKind::kOracle; }
  double Predict(double dose, std::span<const double> x) const override;

 private:
  GroundTruth truth_;
};

// S-learner: one forest over the 26 inputs (x, s).
class RfSLearner : public DoseResponseModel {
 public:
  explicit RfSLearner(RegressionForest forest) : forest_(std::move(forest)) {}
  EstimatorKind kind() const override { return EstimatorKind::kRfSLearner; }
  double Predict(double dose, std::span<const double> x) const override;
  const RegressionForest& forest() const { return forest_; }

 private:
  RegressionForest forest_;
};

// Equal-width dose strata; within a stratum, the mean outcome of the k
// nearest training rows (Euclidean distance on standardized covariates).
class BinnedSLearner : public DoseResponseModel {
 public:
  BinnedSLearner(const Dataset& data, int dose_bins, int k);
  EstimatorKind kind() const override {
    return EstimatorKind::kBinnedSLearner;
  }
  double Predict(double dose, std::span<const double> x) const override;

  int Stratum(double dose) const;
  bool StratumEmpty(int stratum) const;
  // Number of queries answered by the global-mean fallback so far.
  std::uint64_t fallback_queries() const { return fallback_queries_.load(); }

 private:
  int dose_bins_;
  int k_;
  double global_mean_ = 0.0;
  std::vector<double> center_;
  std::vector<double> scale_;
  // Per stratum: standardized covariates (row-major, 25 wide) and outcomes.
  std::vector<std::vector<double>> stratum_x_;
  std::vector<std::vector<double>> stratum_y_;
  mutable std::atomic<std::uint64_t> fallback_queries_{0};
};

// Design matrix for the S-learner: covariates followed by the dose.
Matrix SLearnerInputs(const Dataset& data);

std::unique_ptr<RfSLearner> FitRfSLearner(const Dataset& data,
                                          const RfConfig& config);
std::unique_ptr<BinnedSLearner> FitBinnedSLearner(const Dataset& data,
                                                  int dose_bins, int k);
std::unique_ptr<OracleModel> MakeOracle(const GroundTruth& truth);

enum class Provenance { kEstimated, kGroundTruth };

// N x (delta + 1) dose effects on the grid {0, 1/delta, ..., 1}. Column 0
// is identically zero; entries lie in [-1, 1].
struct CadeMatrix {
  Matrix values;
  std::vector<double> doses;
  Provenance provenance = Provenance::kEstimated;

  std::size_t entities() const { return values.rows(); }
  std::size_t num_doses() const { return values.cols(); }
};

CadeMatrix ComputeCadeMatrix(const DoseResponseModel& model,
                             const CovariateTable& covariates, int delta);

// Stacks TrueCadeVector for every row of `data`.
CadeMatrix TrueCadeMatrix(const GroundTruth& truth, const Dataset& data,
                          int delta);

// Header "entity,dose_0.0,...,dose_1.0"; one row per entity.
std::string CadeMatrixToCsv(const CadeMatrix& cade);
CadeMatrix CadeMatrixFromCsv(const std::string& path);

// Mean over rows of the integral over s in [0, 1] of (mu - mu_hat)^2,
// composite trapezoid rule on `grid_points` equally spaced doses.
double Mise(const DoseResponseModel& model, const GroundTruth& truth,
            const Dataset& data, int grid_points = 101);

// Mean squared error of factual predictions (model(s_i, x_i) vs y_i).
double FactualMse(const DoseResponseModel& model, const Dataset& data);

struct CvResult {
  RfConfig best;
  std::vector<double> mean_mse;  // One entry per grid point.
};

// k-fold cross-validation over a grid; the lowest mean factual MSE wins and
// ties go to the earlier grid entry.
CvResult CrossValidateRf(const Dataset& data, std::span<const RfConfig> grid,
                         int folds, std::uint64_t seed);

}  // namespace doseopt

#endif  // DOSEOPT_ESTIMATORS_H_
