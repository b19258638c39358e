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

#include "doseopt/datagen.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {
namespace {

double Guard(double denominator, bool* guarded) {
  if (std::abs(denominator) >= kDenominatorFloor) return denominator;
  if (guarded != nullptr) *guarded = true;
  return denominator < 0.0 ? -kDenominatorFloor : kDenominatorFloor;
}

double GroupMeanDeviation(std::span<const double> x,
                          std::span<const std::size_t> columns, double c) {
  double sum = 0.0;
  for (std::size_t j : columns) sum += x[j] - c;
  return sum / static_cast<double>(columns.size());
}

void CheckRow(std::span<const double> x) {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariate row must have 25 entries, got " +
                    std::to_string(x.size()));
  }
}

}  // namespace

bool IsBinaryFeature(std::size_t column) {
  return std::find(kContinuousFeatures.begin(), kContinuousFeatures.end(),
                   column) == kContinuousFeatures.end();
}

CovariateTable PreprocessCovariates(Matrix raw) {
  if (raw.cols() != kNumFeatures) {
    throw Error(ErrorCode::kValidation,
                "expected 25 feature columns, found " +
                    std::to_string(raw.cols()));
  }
  if (raw.rows() < 2) {
    throw Error(ErrorCode::kValidation, "need at least 2 covariate rows");
  }
  const std::size_t n = raw.rows();
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (!IsBinaryFeature(j)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = raw(i, j);
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::kValidation,
                    "row " + std::to_string(i + 1) + ", feature " +
                        std::to_string(j + 1) +
                        ": binary feature must be 0 or 1, got " +
                        FormatDouble(v));
      }
    }
  }
  for (std::size_t j : kContinuousFeatures) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += raw(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ss += (raw(i, j) - mean) * (raw(i, j) - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::kValidation,
                  "feature " + std::to_string(j + 1) +
                      " has zero variance and cannot be standardized");
    }
    for (std::size_t i = 0; i < n; ++i) raw(i, j) = (raw(i, j) - mean) / sd;
  }
  return CovariateTable{std::move(raw)};
}

CovariateTable LoadCovariates(const std::string& path,
                              const CsvCovariateOptions& options) {
  const CsvTable table = ReadCsv(path, options.has_header);
  if (table.rows.empty()) {
    throw Error(ErrorCode::kValidation, path + ": no data rows");
  }
  const std::size_t width = table.rows.front().size();
  if (width < options.first_column + kNumFeatures) {
    throw Error(ErrorCode::kValidation,
                path + ": need 25 feature columns starting at column " +
                    std::to_string(options.first_column + 1) + ", found " +
                    std::to_string(width) + " columns");
  }
  Matrix raw(table.rows.size(), kNumFeatures);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const std::size_t col = options.first_column + j;
      raw(i, j) = ParseCell(table.rows[i][col], i + 1, col + 1);
    }
  }
  try {
    return PreprocessCovariates(std::move(raw));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

CovariateTable SynthCovariates(std::size_t n, std::uint64_t seed) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic covariates need n >= 2");
  }
  std::mt19937_64 rng(seed);
  std::array<double, kNumFeatures> p{};
  std::uniform_real_distribution<double> prob(0.2, 0.8);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (IsBinaryFeature(j)) p[j] = prob(rng);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix raw(n, kNumFeatures);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      raw(i, j) = IsBinaryFeature(j) ? (unit(rng) < p[j] ? 1.0 : 0.0)
                                     : normal(rng);
    }
  }
  // A binary column can come out constant for tiny n; that is harmless.
  // Continuous columns are z-scored like loaded data.
  return PreprocessCovariates(std::move(raw));
}

void GenConfig::Validate() const {
  if (!(treatment_noise_variance >= 0.0) || !(outcome_noise_variance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise variances must be non-negative");
  }
  if (!(gamma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be non-negative");
  }
  if (std::find(kBinaryGroup1.begin(), kBinaryGroup1.end(),
                protected_feature) == kBinaryGroup1.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "protected feature must belong to binary group one "
                "(1-based features 4, 7-15)");
  }
}

std::pair<double, double> BinaryGroupMeans(const CovariateTable& cov) {
  double c1 = 0.0;
  double c2 = 0.0;
  for (std::size_t i = 0; i < cov.rows(); ++i) {
    const auto x = cov.row(i);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t j : kBinaryGroup1) s1 += x[j];
    for (std::size_t j : kBinaryGroup2) s2 += x[j];
    c1 += s1 / static_cast<double>(kBinaryGroup1.size());
    c2 += s2 / static_cast<double>(kBinaryGroup2.size());
  }
  const double n = static_cast<double>(cov.rows());
  return {c1 / n, c2 / n};
}

double LatentDoseScore(std::span<const double> x, double c2, bool* guarded) {
  CheckRow(x);
  const double x1 = x[0], x2 = x[1], x3 = x[2], x5 = x[4], x6 = x[5];
  const double hi = std::max({x3, x5, x6});
  const double lo = std::min({x3, x5, x6});
  return x1 / Guard(1.0 + x2, guarded) + hi / Guard(0.2 + lo, guarded) +
         std::tanh(5.0 * GroupMeanDeviation(x, kBinaryGroup2, c2)) - 2.0;
}

double AssignDose(std::span<const double> x, double c2, double noise,
                  bool* guarded) {
  const double t = LatentDoseScore(x, c2, guarded) + noise;
  return 1.0 / (1.0 + std::exp(-2.0 * t));
}

double BaseResponse(double s, std::span<const double> x, double c1) {
  CheckRow(x);
  const double x1 = x[0], x2 = x[1], x3 = x[2], x5 = x[4], x6 = x[5];
  const double dose_term = std::sin(3.0 * std::numbers::pi * s) / (1.2 - s);
  const double covariate_term =
      std::tanh(5.0 * GroupMeanDeviation(x, kBinaryGroup1, c1)) +
      std::exp(0.2 * (x1 - x6)) /
          Guard(0.5 + 5.0 * std::min({x2, x3, x5}), nullptr);
  return dose_term * covariate_term;
}

double GroupFactor(const GroundTruth& gt, int a) {
  return a == 1 ? 1.0 + gt.gamma * gt.gamma_scale : 1.0;
}

namespace {

double Normalize(const GroundTruth& gt, double raw) {
  if (!gt.frozen()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "ground truth normalization is not frozen");
  }
  const double y = (raw - *gt.y_min) / (*gt.y_max - *gt.y_min);
  return std::clamp(y, 0.0, 1.0);
}

}  // namespace

OutcomeDraw GenOutcome(std::span<const double> x, double s, int a,
                       const GroundTruth& gt, double noise) {
  const double raw = BaseResponse(s, x, gt.c1) * GroupFactor(gt, a) + noise;
  return {raw, Normalize(gt, raw)};
}

GeneratedData GenerateDataset(const CovariateTable& cov, const GenConfig& cfg) {
  cfg.Validate();
  const std::size_t n = cov.rows();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 rows");

  GeneratedData out;
  GroundTruth& gt = out.truth;
  std::tie(gt.c1, gt.c2) = BinaryGroupMeans(cov);
  gt.gamma = cfg.gamma;
  gt.gamma_scale = cfg.gamma_scale;
  gt.protected_feature = cfg.protected_feature;

  Dataset& data = out.data;
  data.covariates = cov;
  data.doses.resize(n);
  data.raw_outcomes.resize(n);
  data.groups.resize(n);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> dose_noise(
      0.0, std::sqrt(cfg.treatment_noise_variance));
  std::normal_distribution<double> outcome_noise(
      0.0, std::sqrt(cfg.outcome_noise_variance));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto x = cov.row(i);
    const int a = x[cfg.protected_feature] == 1.0 ? 1 : 0;
    double s = 0.0;
    if (cfg.dose_assignment == DoseAssignment::kUniform) {
      s = unit(rng);
    } else {
      bool guarded = false;
      s = AssignDose(x, gt.c2, dose_noise(rng), &guarded);
      if (guarded) ++data.guarded_rows;
    }
    data.doses[i] = s;
    data.groups[i] = a;
    data.raw_outcomes[i] =
        BaseResponse(s, x, gt.c1) * GroupFactor(gt, a) + outcome_noise(rng);
  }

  const auto [lo, hi] =
      std::minmax_element(data.raw_outcomes.begin(), data.raw_outcomes.end());
  if (!(*hi > *lo)) {
    throw Error(ErrorCode::kNumerical,
                "outcomes have zero range; cannot normalize");
  }
  gt.y_min = *lo;
  gt.y_max = *hi;
  data.outcomes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.outcomes[i] = Normalize(gt, data.raw_outcomes[i]);
  }
  return out;
}

double TrueCadr(const GroundTruth& gt, double s, std::span<const double> x,
                int a) {
  return Normalize(gt, BaseResponse(s, x, gt.c1) * GroupFactor(gt, a));
}

std::vector<double> DoseGrid(int delta) {
  if (delta < 1) {
    throw Error(ErrorCode::kInvalidArgument, "delta must be at least 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(delta) + 1);
  for (int d = 0; d <= delta; ++d) {
    grid[d] = static_cast<double>(d) / static_cast<double>(delta);
  }
  return grid;
}

std::vector<double> TrueCadeVector(const GroundTruth& gt,
                                   std::span<const double> x, int a,
                                   int delta) {
  const std::vector<double> grid = DoseGrid(delta);
  const double base = TrueCadr(gt, 0.0, x, a);
  std::vector<double> tau(grid.size(), 0.0);
  for (std::size_t d = 1; d < grid.size(); ++d) {
    tau[d] = TrueCadr(gt, grid[d], x, a) - base;
  }
  return tau;
}

std::string DatasetToCsv(const Dataset& data) {
  std::ostringstream out;
  for (std::size_t j = 0; j < kNumFeatures; ++j) out << 'x' << j + 1 << ',';
  out << "a,s,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.covariates.row(i)) out << FormatDouble(v) << ',';
    out << data.groups[i] << ',' << FormatDouble(data.doses[i]) << ','
        << FormatDouble(data.outcomes[i]) << '\n';
  }
  return out.str();
}

Dataset DatasetFromCsv(const std::string& path) {
  const CsvTable table = ReadCsv(path, /*has_header=*/true);
  if (table.header.size() != kNumFeatures + 3) {
    throw Error(ErrorCode::kValidation,
                path + ": dataset CSV must have columns x1..x25,a,s,y");
  }
  Dataset data;
  const std::size_t n = table.rows.size();
  data.covariates.features = Matrix(n, kNumFeatures);
  data.doses.resize(n);
  data.outcomes.resize(n);
  data.groups.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      data.covariates.features(i, j) = ParseCell(r[j], i + 1, j + 1);
    }
    const double a = ParseCell(r[kNumFeatures], i + 1, kNumFeatures + 1);
    if (a != 0.0 && a != 1.0) {
      throw Error(ErrorCode::kValidation,
                  path + ": row " + std::to_string(i + 1) +
                      ": protected attribute must be 0 or 1");
    }
    data.groups[i] = static_cast<int>(a);
    data.doses[i] = ParseCell(r[kNumFeatures + 1], i + 1, kNumFeatures + 2);
    data.outcomes[i] = ParseCell(r[kNumFeatures + 2], i + 1, kNumFeatures + 3);
    if (data.doses[i] < 0.0 || data.doses[i] > 1.0 || data.outcomes[i] < 0.0 ||
        data.outcomes[i] > 1.0) {
      throw Error(ErrorCode::kValidation,
                  path + ": row " + std::to_string(i + 1) +
                      ": dose and outcome must lie in [0, 1]");
    }
  }
  return data;
}

std::string GroundTruthToText(const GroundTruth& gt) {
  if (!gt.frozen()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "cannot export ground truth before normalization is frozen");
  }
  std::ostringstream out;
  out << "c1=" << FormatDouble(gt.c1) << '\n'
      << "c2=" << FormatDouble(gt.c2) << '\n'
      << "y_min=" << FormatDouble(*gt.y_min) << '\n'
      << "y_max=" << FormatDouble(*gt.y_max) << '\n'
      << "gamma=" << FormatDouble(gt.gamma) << '\n'
      << "gamma_scale=" << FormatDouble(gt.gamma_scale) << '\n'
      << "protected_feature=" << gt.protected_feature + 1 << '\n';
  return out.str();
}

GroundTruth GroundTruthFromText(const std::string& text) {
  GroundTruth gt;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse,
                  "ground truth line " + std::to_string(line_no) +
                      ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const double v = ParseCell(line.substr(eq + 1), line_no, 2);
    if (key == "c1") {
      gt.c1 = v;
    } else if (key == "c2") {
      gt.c2 = v;
    } else if (key == "y_min") {
      gt.y_min = v;
    } else if (key == "y_max") {
      gt.y_max = v;
    } else if (key == "gamma") {
      gt.gamma = v;
    } else if (key == "gamma_scale") {
      gt.gamma_scale = v;
    } else if (key == "protected_feature") {
      gt.protected_feature = static_cast<std::size_t>(v) - 1;
    } else {
      throw Error(ErrorCode::kParse, "unknown ground truth key '" + key + "'");
    }
  }
  if (!gt.frozen() || !(*gt.y_max > *gt.y_min)) {
    throw Error(ErrorCode::kValidation,
                "ground truth needs y_min < y_max");
  }
  return gt;
}

Dataset SubsetRows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.covariates.features = Matrix(rows.size(), kNumFeatures);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= data.size()) {
      throw Error(ErrorCode::kInvalidArgument, "row index out of range");
    }
    std::copy_n(data.covariates.row(i).begin(), kNumFeatures,
                out.covariates.features.row(k).begin());
    out.doses.push_back(data.doses[i]);
    out.outcomes.push_back(data.outcomes[i]);
    out.groups.push_back(data.groups[i]);
    if (!data.raw_outcomes.empty()) {
      out.raw_outcomes.push_back(data.raw_outcomes[i]);
    }
  }
  return out;
}

}  // namespace doseopt
