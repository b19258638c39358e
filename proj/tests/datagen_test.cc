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
#include <filesystem>
#include <numbers>
#include <set>
#include <vector>

#include "doseopt/csv.h"
#include "doseopt/error.h"
#include "gtest/gtest.h"

namespace doseopt {
namespace {

// Hand-built row: continuous x1..x6 (minus x4) plus two binary blocks.
std::vector<double> SampleRow() {
  return {-0.4, 0.6, 0.3, 1, 0.5, 0.4, 1, 0, 1, 0, 0, 1, 0,
          1,    0,   1,   0, 0,   1,   1, 0, 1, 0, 0, 1};
}

constexpr double kC1 = 0.45;
constexpr double kC2 = 0.55;

// Values evaluated independently (double precision) from the closed forms.
TEST(DatagenTest, LatentDoseScoreMatchesFrozenValue) {
  EXPECT_NEAR(LatentDoseScore(SampleRow(), kC2), -1.4949186624037094, 1e-13);
}

TEST(DatagenTest, AssignDoseMatchesFrozenValues) {
  EXPECT_NEAR(AssignDose(SampleRow(), kC2, 0.0), 0.047887106306004144, 1e-13);
  EXPECT_NEAR(AssignDose(SampleRow(), kC2, 0.3), 0.083950941290622194, 1e-13);
}

TEST(DatagenTest, BaseResponseMatchesFrozenValues) {
  const auto x = SampleRow();
  EXPECT_NEAR(BaseResponse(0.25, x, kC1), 0.49943365567032083, 1e-13);
  EXPECT_NEAR(BaseResponse(0.5, x, kC1), -0.95855793840973569, 1e-13);
  EXPECT_NEAR(BaseResponse(0.0, x, kC1), 0.0, 1e-15);
  EXPECT_NEAR(BaseResponse(1.0, x, kC1), 0.0, 1e-12);
}

// Direct re-derivation of the response surface for arbitrary rows.
double OracleBase(double s, const std::vector<double>& x, double c1) {
  double dev = 0.0;
  for (std::size_t j : kBinaryGroup1) dev += x[j] - c1;
  dev /= 10.0;
  const double m = std::min(x[1], std::min(x[2], x[4]));
  return std::sin(3.0 * std::numbers::pi * s) / (1.2 - s) *
         (std::tanh(5.0 * dev) + std::exp(0.2 * (x[0] - x[5])) / (0.5 + 5.0 * m));
}

TEST(DatagenTest, BaseResponseAgreesWithOracleOnSyntheticRows) {
  const CovariateTable cov = SynthCovariates(50, 3);
  for (std::size_t i = 0; i < cov.rows(); ++i) {
    const std::vector<double> x(cov.row(i).begin(), cov.row(i).end());
    const double m = std::min(x[1], std::min(x[2], x[4]));
    if (std::abs(0.5 + 5.0 * m) < 1e-3) continue;
    for (double s : {0.1, 0.35, 0.8}) {
      EXPECT_NEAR(BaseResponse(s, x, 0.4), OracleBase(s, x, 0.4),
                  1e-9 * (1.0 + std::abs(OracleBase(s, x, 0.4))));
    }
  }
}

TEST(DatagenTest, DoseDenominatorIsFloored) {
  auto x = SampleRow();
  x[2] = 0.3;
  x[4] = -0.2;  // 0.2 + min(x3, x5, x6) == 0
  x[5] = 0.4;
  bool guarded = false;
  const double t = LatentDoseScore(x, kC2, &guarded);
  EXPECT_TRUE(guarded);
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_GT(t, 1e5);  // max(...) / 1e-6 dominates.
  guarded = false;
  LatentDoseScore(SampleRow(), kC2, &guarded);
  EXPECT_FALSE(guarded);
}

TEST(DatagenTest, PreprocessStandardizesContinuousOnly) {
  const CovariateTable cov = SynthCovariates(200, 11);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < cov.rows(); ++i) mean += cov.features(i, j);
    mean /= cov.rows();
    double ss = 0.0;
    for (std::size_t i = 0; i < cov.rows(); ++i) {
      ss += (cov.features(i, j) - mean) * (cov.features(i, j) - mean);
    }
    if (IsBinaryFeature(j)) {
      for (std::size_t i = 0; i < cov.rows(); ++i) {
        const double v = cov.features(i, j);
        EXPECT_TRUE(v == 0.0 || v == 1.0);
      }
    } else {
      EXPECT_NEAR(mean, 0.0, 1e-9);
      EXPECT_NEAR(std::sqrt(ss / (cov.rows() - 1)), 1.0, 1e-9);
    }
  }
}

TEST(DatagenTest, PreprocessRejectsBadInput) {
  Matrix raw(3, kNumFeatures, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j : kContinuousFeatures) raw(i, j) = static_cast<double>(i + j);
  }
  raw(1, 3) = 0.5;  // Binary column with a fractional value.
  EXPECT_THROW(PreprocessCovariates(raw), Error);
  raw(1, 3) = 1.0;
  raw(0, 0) = raw(1, 0) = raw(2, 0) = 2.0;  // Zero variance.
  EXPECT_THROW(PreprocessCovariates(raw), Error);
  EXPECT_THROW(PreprocessCovariates(Matrix(3, 24)), Error);
}

TEST(DatagenTest, LoadCovariatesReadsOffsetColumns) {
  const auto dir = std::filesystem::temp_directory_path() / "doseopt_dg_test";
  std::filesystem::create_directories(dir);
  const CovariateTable ref = SynthCovariates(20, 5);
  std::string text = "id";
  for (int j = 1; j <= 25; ++j) text += ",x" + std::to_string(j);
  text += "\n";
  for (std::size_t i = 0; i < ref.rows(); ++i) {
    text += std::to_string(i);
    for (double v : ref.row(i)) text += "," + FormatDouble(v);
    text += "\n";
  }
  const std::string path = (dir / "cov.csv").string();
  WriteTextFile(path, text);
  const CovariateTable loaded = LoadCovariates(path, {true, 1});
  ASSERT_EQ(loaded.rows(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      EXPECT_NEAR(loaded.features(i, j), ref.features(i, j), 1e-9);
    }
  }
  EXPECT_THROW(LoadCovariates(path, {true, 2}), Error);
}

TEST(DatagenTest, GeneratedOutcomesSpanUnitInterval) {
  const CovariateTable cov = SynthCovariates(300, 2);
  GenConfig cfg;
  cfg.seed = 9;
  const GeneratedData g = GenerateDataset(cov, cfg);
  const auto [lo, hi] =
      std::minmax_element(g.data.outcomes.begin(), g.data.outcomes.end());
  EXPECT_EQ(*lo, 0.0);
  EXPECT_EQ(*hi, 1.0);
  ASSERT_TRUE(g.truth.frozen());
  for (double s : g.data.doses) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    EXPECT_EQ(g.data.groups[i], cov.features(i, 6) == 1.0 ? 1 : 0);
  }
}

TEST(DatagenTest, GenerationIsDeterministicPerSeed) {
  const CovariateTable cov = SynthCovariates(100, 2);
  GenConfig cfg;
  cfg.seed = 4;
  const GeneratedData a = GenerateDataset(cov, cfg);
  const GeneratedData b = GenerateDataset(cov, cfg);
  EXPECT_EQ(a.data.outcomes, b.data.outcomes);
  EXPECT_EQ(a.data.doses, b.data.doses);
  cfg.seed = 5;
  const GeneratedData c = GenerateDataset(cov, cfg);
  EXPECT_NE(a.data.outcomes, c.data.outcomes);
}

TEST(DatagenTest, NormalizationMatchesRawOutcomes) {
  const CovariateTable cov = SynthCovariates(120, 8);
  GenConfig cfg;
  cfg.seed = 1;
  const GeneratedData g = GenerateDataset(cov, cfg);
  const double lo = *g.truth.y_min;
  const double hi = *g.truth.y_max;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    EXPECT_NEAR(g.data.outcomes[i], (g.data.raw_outcomes[i] - lo) / (hi - lo),
                1e-12);
  }
}

TEST(DatagenTest, TrueCadrIsNoiselessNormalizedResponse) {
  const CovariateTable cov = SynthCovariates(80, 6);
  GenConfig cfg;
  cfg.seed = 2;
  cfg.gamma = 2.0;
  const GeneratedData g = GenerateDataset(cov, cfg);
  const double lo = *g.truth.y_min;
  const double hi = *g.truth.y_max;
  for (std::size_t i = 0; i < 10; ++i) {
    const std::vector<double> x(cov.row(i).begin(), cov.row(i).end());
    const int a = x[6] == 1.0 ? 1 : 0;
    const double factor = a == 1 ? 1.0 + 2.0 * 0.1 : 1.0;
    const double raw = BaseResponse(0.3, x, g.truth.c1) * factor;
    const double expected = std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
    EXPECT_NEAR(TrueCadr(g.truth, 0.3, x, a), expected, 1e-12);
  }
}

TEST(DatagenTest, GroupFactorIdentityAtZeroGamma) {
  GroundTruth gt;
  gt.gamma = 0.0;
  EXPECT_EQ(GroupFactor(gt, 1), 1.0);
  gt.gamma = 3.0;
  EXPECT_DOUBLE_EQ(GroupFactor(gt, 1), 1.3);
  EXPECT_EQ(GroupFactor(gt, 0), 1.0);
}

TEST(DatagenTest, CadeVectorStartsAtZero) {
  const CovariateTable cov = SynthCovariates(40, 6);
  GenConfig cfg;
  const GeneratedData g = GenerateDataset(cov, cfg);
  const auto tau = TrueCadeVector(g.truth, cov.row(0), g.data.groups[0], 10);
  ASSERT_EQ(tau.size(), 11u);
  EXPECT_EQ(tau[0], 0.0);
  for (double v : tau) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(DatagenTest, DoseGrid) {
  EXPECT_EQ(DoseGrid(1), (std::vector<double>{0.0, 1.0}));
  const auto g = DoseGrid(10);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g[3], 0.3);
  EXPECT_THROW(DoseGrid(0), Error);
}

TEST(DatagenTest, GenOutcomeRequiresFrozenTruth) {
  GroundTruth gt;
  EXPECT_THROW(GenOutcome(SampleRow(), 0.5, 0, gt, 0.0), Error);
}

TEST(DatagenTest, ValidateRejectsBadConfig) {
  GenConfig cfg;
  cfg.protected_feature = 0;  // Continuous column.
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = GenConfig();
  cfg.gamma = -1.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = GenConfig();
  cfg.outcome_noise_variance = -0.1;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(DatagenTest, UniformAssignmentIgnoresCovariates) {
  const CovariateTable cov = SynthCovariates(2000, 6);
  GenConfig cfg;
  cfg.dose_assignment = DoseAssignment::kUniform;
  const GeneratedData g = GenerateDataset(cov, cfg);
  double mean = 0.0;
  for (double s : g.data.doses) mean += s;
  mean /= g.data.size();
  EXPECT_NEAR(mean, 0.5, 0.03);
  EXPECT_EQ(g.data.guarded_rows, 0u);
}

TEST(DatagenTest, CsvRoundTrip) {
  const CovariateTable cov = SynthCovariates(30, 1);
  const GeneratedData g = GenerateDataset(cov, GenConfig{});
  const auto dir = std::filesystem::temp_directory_path() / "doseopt_dg_rt";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "data.csv").string();
  WriteTextFile(path, DatasetToCsv(g.data));
  const Dataset back = DatasetFromCsv(path);
  EXPECT_EQ(back.doses, g.data.doses);
  EXPECT_EQ(back.outcomes, g.data.outcomes);
  EXPECT_EQ(back.groups, g.data.groups);
  EXPECT_EQ(back.covariates.features, g.data.covariates.features);

  const GroundTruth t = GroundTruthFromText(GroundTruthToText(g.truth));
  EXPECT_EQ(t.c1, g.truth.c1);
  EXPECT_EQ(t.y_min, g.truth.y_min);
  EXPECT_EQ(t.protected_feature, g.truth.protected_feature);
}

TEST(DatagenTest, SubsetRowsSelects) {
  const CovariateTable cov = SynthCovariates(10, 1);
  const GeneratedData g = GenerateDataset(cov, GenConfig{});
  const std::vector<std::size_t> rows = {7, 2};
  const Dataset s = SubsetRows(g.data, rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.doses[0], g.data.doses[7]);
  EXPECT_EQ(s.covariates.features(1, 0), cov.features(2, 0));
  const std::vector<std::size_t> bad = {10};
  EXPECT_THROW(SubsetRows(g.data, bad), Error);
}

}  // namespace
}  // namespace doseopt
