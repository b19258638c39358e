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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doseopt/error.h"
#include "gtest/gtest.h"

namespace doseopt {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig cfg;
  cfg.synthetic_n = 120;
  cfg.seed = 3;
  cfg.delta = 4;
  cfg.rf.n_trees = 10;
  cfg.budgets = {2, 4, 6};
  cfg.auuc_caps = {4, 6};
  cfg.auuc_step = 2;
  cfg.eps_dt = {0.2, std::nullopt};
  cfg.eps_do = {0.5, std::nullopt};
  cfg.scal_factors = {1, 2};
  cfg.scal_budget = 5;
  cfg.sweep_deltas = {1, 2, 4};
  cfg.sweep_budget = 5;
  return cfg;
}

TEST(ExperimentsTest, SplitIsDisjointAndDeterministic) {
  const ExperimentConfig cfg = SmallConfig();
  const CovariateTable cov = LoadOrSynthCovariates(cfg);
  const PreparedData a = PrepareData(cfg, cov, 0.0);
  const PreparedData b = PrepareData(cfg, cov, 0.0);
  EXPECT_EQ(a.test_rows, b.test_rows);
  EXPECT_EQ(a.test_rows.size(), 36u);
  EXPECT_EQ(a.train_rows.size(), 84u);
  std::vector<std::size_t> all = a.test_rows;
  all.insert(all.end(), a.train_rows.begin(), a.train_rows.end());
  std::sort(all.begin(), all.end());
  EXPECT_TRUE(std::adjacent_find(all.begin(), all.end()) == all.end());
  EXPECT_EQ(a.test.doses[0], a.full.data.doses[a.test_rows[0]]);
}

TEST(ExperimentsTest, ZeroTestFractionAllocatesOnAllRows) {
  ExperimentConfig cfg = SmallConfig();
  cfg.test_fraction = 0.0;
  const PreparedData d = PrepareData(cfg, LoadOrSynthCovariates(cfg), 0.0);
  EXPECT_EQ(d.test.size(), 120u);
  EXPECT_EQ(d.train.size(), 120u);
}

TEST(ExperimentsTest, StreamsDiffer) {
  const ExperimentConfig cfg = SmallConfig();
  EXPECT_NE(StreamSeed(cfg, SeedStream::kSplit),
            StreamSeed(cfg, SeedStream::kGeneration));
}

TEST(ExperimentsTest, AuucGridSpansLargestCap) {
  const ExperimentConfig cfg = SmallConfig();
  EXPECT_EQ(AuucGrid(cfg), (std::vector<double>{2, 4, 6}));
}

TEST(ExperimentsTest, Exp1OracleRowsAreExact) {
  ExperimentConfig cfg = SmallConfig();
  cfg.estimators = {EstimatorKind::kOracle, EstimatorKind::kBinnedSLearner};
  const Exp1Result r = RunExp1(cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].estimator, "optimal");
  EXPECT_EQ(r.rows[1].estimator, "oracle");
  EXPECT_EQ(r.rows[1].mise, 0.0);
  for (const auto& pair : r.rows[1].auuc) {
    EXPECT_NEAR(pair[0], 1.0, 1e-12);
    EXPECT_NEAR(pair[1], 1.0, 1e-12);
  }
  for (double reg : r.rows[1].regret) EXPECT_NEAR(reg, 0.0, 1e-9);
  for (double reg : r.rows[2].regret) EXPECT_GE(reg, -1e-9);
  const std::string csv = r.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "estimator,mise,auuc4_greedy,auuc4_exact,auuc6_greedy,auuc6_exact,"
            "max_abs_regret");
}

TEST(ExperimentsTest, Exp2ObjectiveIsMonotoneInSlack) {
  ExperimentConfig cfg = SmallConfig();
  cfg.exp2_estimators = {EstimatorKind::kBinnedSLearner};
  const Exp2Result r = RunExp2(cfg);
  ASSERT_EQ(r.cells.size(), 4u);
  // Cells are ordered (eps_dt, eps_do) row-major.
  EXPECT_LE(r.cells[0].norm_exp, r.cells[1].norm_exp + 1e-9);
  EXPECT_LE(r.cells[0].norm_exp, r.cells[2].norm_exp + 1e-9);
  EXPECT_LE(r.cells[1].norm_exp, r.cells[3].norm_exp + 1e-9);
  EXPECT_LE(r.cells[2].norm_exp, r.cells[3].norm_exp + 1e-9);
  EXPECT_NEAR(r.cells[3].norm_exp, 1.0, 1e-9);
  const std::string fair = r.FairnessCsv(0.0, "binned");
  EXPECT_EQ(std::count(fair.begin(), fair.end(), '\n'), 5);
}

TEST(ExperimentsTest, Exp3DominanceHolds) {
  ExperimentConfig cfg = SmallConfig();
  const Exp3Result r = RunExp3(cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const Exp3Row& row : r.rows) {
    EXPECT_GE(row.u_of_uopt, row.u_of_vopt - 1e-9);
    EXPECT_GE(row.v_of_vopt, row.v_of_uopt - 1e-9);
  }
}

TEST(ExperimentsTest, DrawBenefits) {
  BenefitSpec spec;
  const auto a = DrawBenefits(spec, 100);
  EXPECT_EQ(a, DrawBenefits(spec, 100));
  for (double v : a) {
    EXPECT_GE(v, 0.5);
    EXPECT_LT(v, 1.5);
  }
  spec.uniform = false;
  EXPECT_EQ(DrawBenefits(spec, 3), (std::vector<double>{1, 1, 1}));
}

TEST(ExperimentsTest, OversampleKeepsOriginalsAndBinaryColumns) {
  const CovariateTable cov = SynthCovariates(30, 4);
  const CovariateTable big = OversampleCovariates(cov, 3, 0.01, 9);
  ASSERT_EQ(big.rows(), 90u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_TRUE(std::equal(cov.row(i).begin(), cov.row(i).end(),
                           big.row(i).begin()));
  }
  for (std::size_t i = 30; i < 90; ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      if (IsBinaryFeature(j)) {
        EXPECT_TRUE(big.features(i, j) == 0.0 || big.features(i, j) == 1.0);
      }
    }
  }
  EXPECT_THROW(OversampleCovariates(cov, 0, 0.0, 1), Error);
}

TEST(ExperimentsTest, ScalabilityAgreesAcrossExactSolvers) {
  const ScalabilityResult r = RunScalability(SmallConfig());
  ASSERT_EQ(r.rows.size(), 2u);
  for (const ScalabilityRow& row : r.rows) {
    ASSERT_TRUE(row.exact.has_value());
    EXPECT_EQ(row.entities, 120u * row.factor);
    EXPECT_LE(row.greedy_value, row.dp_value + 1e-9);
    if (row.exact->status == SolveStatus::kOptimal) {
      EXPECT_NEAR(row.exact->objective, row.dp_value,
                  1e-4 * std::abs(row.dp_value) + 1e-9);
    }
  }
}

TEST(ExperimentsTest, DeltaSweepRuns) {
  const DeltaSweepResult r = RunDeltaSweep(SmallConfig());
  ASSERT_EQ(r.rows.size(), 3u);
  for (const DeltaSweepRow& row : r.rows) {
    EXPECT_EQ(row.status, "optimal");
    EXPECT_NEAR(row.u_exp, row.u_presc, 1e-12);  // Oracle estimator.
  }
}

TEST(ExperimentsTest, WriteResultAddsMeta) {
  const ExperimentConfig cfg = SmallConfig();
  const auto dir = std::filesystem::temp_directory_path() / "doseopt_exp";
  WriteResult(dir.string(), "x.csv", "a\n1\n", cfg, "note = hi\n");
  std::ifstream in(dir / "x.csv.meta");
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_NE(text.str().find("config_hash = " + cfg.Hash()), std::string::npos);
  EXPECT_NE(text.str().find("budget_grid = 2,4,6"), std::string::npos);
  EXPECT_NE(text.str().find("note = hi"), std::string::npos);
}

TEST(ExperimentsTest, ErrorsNameTheExperiment) {
  ExperimentConfig cfg = SmallConfig();
  cfg.budgets = {};
  try {
    RunExp3(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("exp3"), std::string::npos);
  }
}

}  // namespace
}  // namespace doseopt
