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

#ifndef DOSEOPT_RANDOM_FOREST_H_
#define DOSEOPT_RANDOM_FOREST_H_

// CART regression forest (variance-reduction splits, bootstrap bagging,
// per-node feature subsampling).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doseopt/matrix.h"

namespace doseopt {

enum class MaxFeatures { kSqrt, kLog2, kAll };

struct RfConfig {
  int n_trees = 200;
  int max_depth = 15;  // 0 means unlimited.
  int min_samples_leaf = 2;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void Validate() const;
  std::string ToString() const;
};

// Number of candidate features per split for a given feature count.
int FeaturesPerSplit(MaxFeatures mode, int num_features);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf.
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes)
      : nodes_(std::move(nodes)) {}

  double Predict(std::span<const double> features) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int Depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

class RegressionForest {
 public:
  // Rows of `features` are training examples. Training rows are put into a
  // canonical order first, so the fitted forest does not depend on the
  // order rows were supplied in. Per-tree random streams derive from
  // (seed, tree index).
  static RegressionForest Fit(const Matrix& features,
                              std::span<const double> targets,
                              const RfConfig& config);

  double Predict(std::span<const double> features) const;

  int num_features() const { return num_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  // Versioned text format; see README ("Model files").
  std::string Serialize() const;
  static RegressionForest Deserialize(const std::string& text);

 private:
  int num_features_ = 0;
  std::vector<RegressionTree> trees_;
};

// Deterministic 64-bit mixer used to derive independent seeds.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace doseopt

#endif  // DOSEOPT_RANDOM_FOREST_H_
