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

#include "doseopt/config.h"

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doseopt/csv.h"
#include "doseopt/error.h"
#include "gtest/gtest.h"

namespace doseopt {
namespace {

TEST(ConfigTest, DefaultsValidate) {
  const ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  EXPECT_EQ(cfg.budgets.size(), 10u);
  EXPECT_EQ(cfg.budgets.front(), 25.0);
  EXPECT_EQ(cfg.budgets.back(), 250.0);
  EXPECT_EQ(cfg.gen.protected_feature, 6u);
}

TEST(ConfigTest, ParsesKeysAndComments) {
  const ExperimentConfig cfg = ParseConfig(
      "# comment\n"
      "seed = 17\n"
      "  delta=5  \n"
      "estimators = oracle, binned\n"
      "eps_dt = 0, 0.5, disabled\n"
      "benefits = uniform(0.2, 0.8, 3)\n"
      "protected_feature = 8\n"
      "rf_max_features = all\n"
      "solver = bnb\n");
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.delta, 5);
  EXPECT_EQ(cfg.estimators, (std::vector<EstimatorKind>{
                                EstimatorKind::kOracle,
                                EstimatorKind::kBinnedSLearner}));
  ASSERT_EQ(cfg.eps_dt.size(), 3u);
  EXPECT_FALSE(cfg.eps_dt[2].has_value());
  EXPECT_DOUBLE_EQ(cfg.benefits.lo, 0.2);
  EXPECT_EQ(cfg.benefits.seed, 3u);
  EXPECT_EQ(cfg.gen.protected_feature, 7u);
  EXPECT_EQ(cfg.rf.max_features, MaxFeatures::kAll);
  EXPECT_EQ(cfg.solver, SolverKind::kBnb);
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ParseConfig("colour = red\n"), Error);
  EXPECT_THROW(ParseConfig("seed\n"), Error);
  EXPECT_THROW(ParseConfig("delta = abc\n"), Error);
  EXPECT_THROW(ParseConfig("delta = 0\n"), Error);
  EXPECT_THROW(ParseConfig("estimators = forest\n"), Error);
  EXPECT_THROW(ParseConfig("eps_dt = 0.5, 0.1\n"), Error);
  EXPECT_THROW(ParseConfig("eps_dt = disabled, 0.1\n"), Error);
  EXPECT_THROW(ParseConfig("budgets = 50, 25\n"), Error);
  EXPECT_THROW(ParseConfig("auuc_caps = 145\n"), Error);
  EXPECT_THROW(ParseConfig("protected_feature = 1\n"), Error);
  EXPECT_THROW(ParseConfig("benefits = gaussian\n"), Error);
  try {
    ParseConfig("seed = 1\nbogus = 2\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ConfigTest, NumberListRanges) {
  EXPECT_EQ(ParseNumberList("1, 2,3"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(ParseNumberList("0:1:0.5"), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(ParseNumberList("10:35:10, 50"),
            (std::vector<double>{10, 20, 30, 50}));
  EXPECT_THROW(ParseNumberList("1:2"), Error);
  EXPECT_THROW(ParseNumberList("3:1:1"), Error);
  EXPECT_THROW(ParseNumberList("0:1:0"), Error);
}

TEST(ConfigTest, TextRoundTripPreservesHash) {
  ExperimentConfig cfg;
  SetConfigValue(cfg, "seed", "99");
  SetConfigValue(cfg, "eps_do", "0.2, disabled");
  SetConfigValue(cfg, "benefits", "ones");
  const ExperimentConfig back = ParseConfig(cfg.ToText());
  EXPECT_EQ(back.ToText(), cfg.ToText());
  EXPECT_EQ(back.Hash(), cfg.Hash());
  EXPECT_EQ(cfg.Hash().size(), 16u);
  EXPECT_NE(cfg.Hash(), ExperimentConfig().Hash());
}

TEST(ConfigTest, ToTextIsSortedByKey) {
  const std::string text = ExperimentConfig().ToText();
  std::vector<std::string> keys;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    keys.push_back(text.substr(pos, text.find(" = ", pos) - pos));
    pos = end + 1;
  }
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_GT(keys.size(), 30u);
}

TEST(ConfigTest, Fnv1aReferenceValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(ConfigTest, LoadConfigFromFile) {
  const auto dir = std::filesystem::temp_directory_path() / "doseopt_cfg";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.cfg").string();
  WriteTextFile(path, "delta = 4\n");
  EXPECT_EQ(LoadConfig(path).delta, 4);
  EXPECT_THROW(LoadConfig((dir / "nope.cfg").string()), Error);
}

}  // namespace
}  // namespace doseopt
