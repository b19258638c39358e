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

#ifndef DOSEOPT_DATAGEN_H_
#define DOSEOPT_DATAGEN_H_

// Semi-synthetic continuous-treatment data in the style of the IHDP
// dose-response benchmark. Covariates are either read from a CSV (the 747 x 25
// IHDP table) or synthesized; doses and outcomes are generated from closed-form
// response surfaces so the true dose-response curve of every row is known.
//
// Feature indices below are 0-based. The benchmark formulas are usually
// written with 1-based indices; feature k there is column k-1 here:
//   continuous        {1,2,3,5,6}        -> {0,1,2,4,5}
//   binary group one  {4,7,8,...,15}     -> {3,6,7,...,14}
//   binary group two  {16,...,25}        -> {15,...,24}

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doseopt/matrix.h"

namespace doseopt {

inline constexpr std::size_t kNumFeatures = 25;
inline constexpr std::array<std::size_t, 5> kContinuousFeatures = {0, 1, 2, 4,
                                                                   5};
inline constexpr std::array<std::size_t, 10> kBinaryGroup1 = {3,  6,  7,  8,  9,
                                                              10, 11, 12, 13, 14};
inline constexpr std::array<std::size_t, 10> kBinaryGroup2 = {
    15, 16, 17, 18, 19, 20, 21, 22, 23, 24};

bool IsBinaryFeature(std::size_t column);

// N x 25 covariate table. Continuous columns are z-scored (sample standard
// deviation, n-1 denominator); binary columns hold 0/1.
struct CovariateTable {
  Matrix features;

  std::size_t rows() const { return features.rows(); }
  std::span<const double> row(std::size_t i) const { return features.row(i); }
};

struct CsvCovariateOptions {
  bool has_header = false;
  // Column of the first feature; the 25 features are read from
  // [first_column, first_column + 25).
  std::size_t first_column = 0;
};

CovariateTable LoadCovariates(const std::string& path,
                              const CsvCovariateOptions& options = {});

// Validates and z-scores a raw table (binary columns must already be 0/1).
CovariateTable PreprocessCovariates(Matrix raw);

// Offline stand-in for the IHDP table: standard-normal continuous columns
// and Bernoulli(p_j) binary columns with p_j ~ Uniform(0.2, 0.8).
CovariateTable SynthCovariates(std::size_t n, std::uint64_t seed);

enum class DoseAssignment {
  kConfounded,  // Logistic dose model driven by the covariates.
  kUniform,     // s ~ Uniform(0, 1) independent of x (randomized trial).
};

struct GenConfig {
  std::uint64_t seed = 0;
  double treatment_noise_variance = 0.25;
  double outcome_noise_variance = 0.25;
  // Amplifies the outcome gap between protected groups: rows with a = 1 get
  // their response multiplied by (1 + gamma * gamma_scale).
  double gamma = 0.0;
  double gamma_scale = 0.1;
  // 0-based; must be a column of binary group one. Default is feature 7 in
  // 1-based numbering.
  std::size_t protected_feature = 6;
  DoseAssignment dose_assignment = DoseAssignment::kConfounded;

  void Validate() const;
};

struct Dataset {
  CovariateTable covariates;
  std::vector<double> doses;
  std::vector<double> outcomes;
  std::vector<int> groups;  // Protected attribute per row.
  std::vector<double> raw_outcomes;  // Noisy outcomes before normalization.
  // Rows whose dose-model denominators were floored (see kDenominatorFloor).
  std::size_t guarded_rows = 0;

  std::size_t size() const { return doses.size(); }
};

// Noiseless generator parameters plus the frozen outcome normalization.
// Immutable once built; safe to share between threads.
struct GroundTruth {
  double c1 = 0.0;
  double c2 = 0.0;
  std::optional<double> y_min;
  std::optional<double> y_max;
  double gamma = 0.0;
  double gamma_scale = 0.1;
  std::size_t protected_feature = 6;

  bool frozen() const { return y_min.has_value() && y_max.has_value(); }
};

// Denominators with magnitude below this are replaced by sign * floor.
inline constexpr double kDenominatorFloor = 1e-6;

// Group means of binary feature groups one and two over a table.
std::pair<double, double> BinaryGroupMeans(const CovariateTable& cov);

// Latent dose score t~(x) without noise. Sets *guarded when a denominator
// was floored.
double LatentDoseScore(std::span<const double> x, double c2,
                       bool* guarded = nullptr);

// Logistic squash of latent score plus a realized noise draw.
double AssignDose(std::span<const double> x, double c2, double noise,
                  bool* guarded = nullptr);

// Noiseless response surface before the group factor. Zero at s = 0 and
// s = 1/3 for every x.
double BaseResponse(double s, std::span<const double> x, double c1);

double GroupFactor(const GroundTruth& gt, int a);

struct OutcomeDraw {
  double raw;         // y~ = base * group factor + noise
  double normalized;  // Clamped affine normalization into [0, 1].
};

OutcomeDraw GenOutcome(std::span<const double> x, double s, int a,
                       const GroundTruth& gt, double noise);

struct GeneratedData {
  Dataset data;
  GroundTruth truth;
};

GeneratedData GenerateDataset(const CovariateTable& cov, const GenConfig& cfg);

// mu(s, x): the noiseless response under the frozen normalization, clamped
// to [0, 1].
double TrueCadr(const GroundTruth& gt, double s, std::span<const double> x,
                int a);

// Dose grid {0, 1/delta, ..., 1}.
std::vector<double> DoseGrid(int delta);

// tau at every grid dose: entry d is mu(D_d, x) - mu(0, x); entry 0 is 0.
std::vector<double> TrueCadeVector(const GroundTruth& gt,
                                   std::span<const double> x, int a,
                                   int delta);

// CSV with columns x1..x25,a,s,y at full precision.
std::string DatasetToCsv(const Dataset& data);
Dataset DatasetFromCsv(const std::string& path);

// Plain key=value text with every GroundTruth field.
std::string GroundTruthToText(const GroundTruth& gt);
GroundTruth GroundTruthFromText(const std::string& text);

// Returns the rows at the given indices (covariates, doses, outcomes, groups).
Dataset SubsetRows(const Dataset& data, std::span<const std::size_t> rows);

}  // namespace doseopt

#endif  // DOSEOPT_DATAGEN_H_
