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

#include "doseopt/estimators.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {

const char* EstimatorKindName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kOracle:
      return "oracle";
    case EstimatorKind::kRfSLearner:
      return "rf";
    case EstimatorKind::kBinnedSLearner:
      return "binned";
  }
  return "unknown";
}

double OracleModel::Predict(double dose, std::span<const double> x) const {
  const int a = x[truth_.protected_feature] == 1.0 ? 1 : 0;
  return TrueCadr(truth_, dose, x, a);
}

double RfSLearner::Predict(double dose, std::span<const double> x) const {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariate row must have 25 entries");
  }
  std::array<double, kNumFeatures + 1> input{};
  std::copy(x.begin(), x.end(), input.begin());
  input[kNumFeatures] = dose;
  return std::clamp(forest_.Predict(input), 0.0, 1.0);
}

Matrix SLearnerInputs(const Dataset& data) {
  Matrix inputs(data.size(), kNumFeatures + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.covariates.row(i);
    std::copy(x.begin(), x.end(), inputs.row(i).begin());
    inputs(i, kNumFeatures) = data.doses[i];
  }
  return inputs;
}

std::unique_ptr<RfSLearner> FitRfSLearner(const Dataset& data,
                                          const RfConfig& config) {
  config.Validate();
  if (data.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot fit on an empty dataset");
  }
  if (data.size() < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset smaller than 2 * min_samples_leaf");
  }
  return std::make_unique<RfSLearner>(
      RegressionForest::Fit(SLearnerInputs(data), data.outcomes, config));
}

BinnedSLearner::BinnedSLearner(const Dataset& data, int dose_bins, int k)
    : dose_bins_(dose_bins), k_(k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (dose_bins < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dose_bins must be >= 1");
  }
  const std::size_t n = data.size();
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot fit on an empty dataset");
  }
  global_mean_ = std::accumulate(data.outcomes.begin(), data.outcomes.end(),
                                 0.0) /
                 static_cast<double>(n);
  center_.assign(kNumFeatures, 0.0);
  scale_.assign(kNumFeatures, 1.0);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.covariates.features(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = data.covariates.features(i, j) - mean;
      ss += d * d;
    }
    center_[j] = mean;
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    scale_[j] = sd > 0.0 ? sd : 1.0;
  }
  stratum_x_.resize(dose_bins);
  stratum_y_.resize(dose_bins);
  for (std::size_t i = 0; i < n; ++i) {
    const int b = Stratum(data.doses[i]);
    const auto x = data.covariates.row(i);
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      stratum_x_[b].push_back((x[j] - center_[j]) / scale_[j]);
    }
    stratum_y_[b].push_back(data.outcomes[i]);
  }
}

int BinnedSLearner::Stratum(double dose) const {
  const int b = static_cast<int>(std::floor(dose * dose_bins_));
  return std::clamp(b, 0, dose_bins_ - 1);
}

bool BinnedSLearner::StratumEmpty(int stratum) const {
  return stratum_y_.at(stratum).empty();
}

double BinnedSLearner::Predict(double dose, std::span<const double> x) const {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariate row must have 25 entries");
  }
  const int b = Stratum(dose);
  const auto& ys = stratum_y_[b];
  if (ys.empty()) {
    fallback_queries_.fetch_add(1);
    return std::clamp(global_mean_, 0.0, 1.0);
  }
  const auto& xs = stratum_x_[b];
  const std::size_t m = ys.size();
  const std::size_t k = std::min<std::size_t>(k_, m);
  double total = 0.0;
  if (k == m) {
    total = std::accumulate(ys.begin(), ys.end(), 0.0);
  } else {
    std::array<double, kNumFeatures> q{};
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      q[j] = (x[j] - center_[j]) / scale_[j];
    }
    std::vector<std::pair<double, std::size_t>> dist(m);
    for (std::size_t r = 0; r < m; ++r) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < kNumFeatures; ++j) {
        const double d = xs[r * kNumFeatures + j] - q[j];
        d2 += d * d;
      }
      dist[r] = {d2, r};
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + k);
    for (std::size_t r = 0; r < k; ++r) total += ys[dist[r].second];
  }
  return std::clamp(total / static_cast<double>(k), 0.0, 1.0);
}

std::unique_ptr<BinnedSLearner> FitBinnedSLearner(const Dataset& data,
                                                  int dose_bins, int k) {
  return std::make_unique<BinnedSLearner>(data, dose_bins, k);
}

std::unique_ptr<OracleModel> MakeOracle(const GroundTruth& truth) {
  if (!truth.frozen()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "oracle needs a frozen ground truth");
  }
  return std::make_unique<OracleModel>(truth);
}

CadeMatrix ComputeCadeMatrix(const DoseResponseModel& model,
                             const CovariateTable& covariates, int delta) {
  CadeMatrix cade;
  cade.doses = DoseGrid(delta);
  cade.provenance = model.kind() == EstimatorKind::kOracle
                        ? Provenance::kGroundTruth
                        : Provenance::kEstimated;
  cade.values = Matrix(covariates.rows(), cade.doses.size(), 0.0);
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    const auto x = covariates.row(i);
    const double base = model.Predict(0.0, x);
    for (std::size_t d = 1; d < cade.doses.size(); ++d) {
      cade.values(i, d) =
          std::clamp(model.Predict(cade.doses[d], x) - base, -1.0, 1.0);
    }
  }
  return cade;
}

CadeMatrix TrueCadeMatrix(const GroundTruth& truth, const Dataset& data,
                          int delta) {
  CadeMatrix cade;
  cade.doses = DoseGrid(delta);
  cade.provenance = Provenance::kGroundTruth;
  cade.values = Matrix(data.size(), cade.doses.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto tau =
        TrueCadeVector(truth, data.covariates.row(i), data.groups[i], delta);
    std::copy(tau.begin(), tau.end(), cade.values.row(i).begin());
  }
  return cade;
}

std::string CadeMatrixToCsv(const CadeMatrix& cade) {
  std::ostringstream out;
  out << "entity";
  for (double d : cade.doses) out << ",dose_" << FormatDose(d);
  out << '\n';
  for (std::size_t i = 0; i < cade.entities(); ++i) {
    out << i;
    for (double v : cade.values.row(i)) out << ',' << FormatDouble(v);
    out << '\n';
  }
  return out.str();
}

CadeMatrix CadeMatrixFromCsv(const std::string& path) {
  const CsvTable table = ReadCsv(path, /*has_header=*/true);
  if (table.header.size() < 2 || table.header[0] != "entity") {
    throw Error(ErrorCode::kValidation,
                path + ": expected header entity,dose_...");
  }
  CadeMatrix cade;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h.rfind("dose_", 0) != 0) {
      throw Error(ErrorCode::kValidation,
                  path + ": column " + std::to_string(c + 1) +
                      " header must start with dose_");
    }
    cade.doses.push_back(ParseCell(h.substr(5), 0, c + 1));
  }
  cade.values = Matrix(table.rows.size(), cade.doses.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t c = 1; c < table.header.size(); ++c) {
      cade.values(i, c - 1) = ParseCell(table.rows[i][c], i + 1, c + 1);
    }
  }
  return cade;
}

double Mise(const DoseResponseModel& model, const GroundTruth& truth,
            const Dataset& data, int grid_points) {
  if (grid_points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "grid_points must be >= 2");
  }
  if (data.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "MISE of an empty dataset");
  }
  const double h = 1.0 / static_cast<double>(grid_points - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.covariates.row(i);
    double integral = 0.0;
    for (int g = 0; g < grid_points; ++g) {
      const double s = g == grid_points - 1 ? 1.0 : g * h;
      const double diff =
          TrueCadr(truth, s, x, data.groups[i]) - model.Predict(s, x);
      const double w = (g == 0 || g == grid_points - 1) ? 0.5 : 1.0;
      integral += w * diff * diff;
    }
    total += integral * h;
  }
  return total / static_cast<double>(data.size());
}

double FactualMse(const DoseResponseModel& model, const Dataset& data) {
  if (data.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "MSE of an empty dataset");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e =
        model.Predict(data.doses[i], data.covariates.row(i)) - data.outcomes[i];
    total += e * e;
  }
  return total / static_cast<double>(data.size());
}

CvResult CrossValidateRf(const Dataset& data, std::span<const RfConfig> grid,
                         int folds, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty hyperparameter grid");
  }
  if (folds < 2 || static_cast<std::size_t>(folds) > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "folds must lie in [2, N], got " + std::to_string(folds));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Dataset> train(folds);
  std::vector<Dataset> test(folds);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t k = 0; k < n; ++k) {
      (static_cast<int>(k % folds) == f ? te : tr).push_back(perm[k]);
    }
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());
    train[f] = SubsetRows(data, tr);
    test[f] = SubsetRows(data, te);
  }

  CvResult result;
  double best = std::numeric_limits<double>::infinity();
  for (const RfConfig& config : grid) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      const auto model = FitRfSLearner(train[f], config);
      total += FactualMse(*model, test[f]);
    }
    const double mean = total / folds;
    result.mean_mse.push_back(mean);
    if (mean < best) {
      best = mean;
      result.best = config;
    }
  }
  return result;
}

}  // namespace doseopt
