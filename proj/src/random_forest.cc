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

#include "doseopt/random_forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void RfConfig::Validate() const {
  if (n_trees < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  }
  if (min_samples_leaf < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_samples_leaf must be >= 1");
  }
  if (max_depth < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_depth must be >= 0 (0 = unlimited)");
  }
}

std::string RfConfig::ToString() const {
  std::ostringstream out;
  out << "trees=" << n_trees << " depth="
      << (max_depth == 0 ? std::string("none") : std::to_string(max_depth))
      << " leaf=" << min_samples_leaf << " features="
      << (max_features == MaxFeatures::kSqrt   ? "sqrt"
          : max_features == MaxFeatures::kLog2 ? "log2"
                                               : "all")
      << " bootstrap=" << (bootstrap ? 1 : 0);
  return out.str();
}

int FeaturesPerSplit(MaxFeatures mode, int num_features) {
  switch (mode) {
    case MaxFeatures::kSqrt:
      return std::max(1, static_cast<int>(std::sqrt(num_features)));
    case MaxFeatures::kLog2:
      return std::max(1, static_cast<int>(std::log2(num_features)));
    case MaxFeatures::kAll:
      return num_features;
  }
  return num_features;
}

double RegressionTree::Predict(std::span<const double> features) const {
  int node = 0;
  while (nodes_[node].feature >= 0) {
    const TreeNode& n = nodes_[node];
    node = features[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[node].value;
}

int RegressionTree::Depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[nodes_[i].left] = depth[i] + 1;
      depth[nodes_[i].right] = depth[i] + 1;
    }
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y,
              const RfConfig& config, std::mt19937_64& rng)
      : x_(x), y_(y), config_(config), rng_(rng) {
    features_per_split_ =
        FeaturesPerSplit(config.max_features, static_cast<int>(x.cols()));
  }

  RegressionTree Build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    nodes_.clear();
    struct Task {
      std::size_t begin, end;
      int depth;
      int node;
    };
    nodes_.emplace_back();
    std::vector<Task> stack = {{0, samples_.size(), 0, 0}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      double sum = 0.0;
      for (std::size_t k = task.begin; k < task.end; ++k) {
        sum += y_[samples_[k]];
      }
      const std::size_t count = task.end - task.begin;
      nodes_[task.node].value = sum / static_cast<double>(count);

      const bool depth_ok =
          config_.max_depth == 0 || task.depth < config_.max_depth;
      if (!depth_ok ||
          count < 2 * static_cast<std::size_t>(config_.min_samples_leaf) ||
          IsPure(task.begin, task.end)) {
        continue;
      }
      const Split split = FindSplit(task.begin, task.end, sum);
      if (split.feature < 0) continue;

      auto mid = std::stable_partition(
          samples_.begin() + task.begin, samples_.begin() + task.end,
          [&](std::size_t i) {
            return x_(i, split.feature) <= split.threshold;
          });
      const std::size_t mid_index = mid - samples_.begin();
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      const int right = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      TreeNode& node = nodes_[task.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = right;
      stack.push_back({mid_index, task.end, task.depth + 1, right});
      stack.push_back({task.begin, mid_index, task.depth + 1, left});
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  bool IsPure(std::size_t begin, std::size_t end) const {
    const double first = y_[samples_[begin]];
    for (std::size_t k = begin + 1; k < end; ++k) {
      if (y_[samples_[k]] != first) return false;
    }
    return true;
  }

  // Scans candidate features in random order until `features_per_split_`
  // non-constant ones were evaluated (or features run out).
  Split FindSplit(std::size_t begin, std::size_t end, double total) {
    const int num_features = static_cast<int>(x_.cols());
    std::vector<int> order(num_features);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    const std::size_t count = end - begin;
    const std::size_t min_leaf =
        static_cast<std::size_t>(config_.min_samples_leaf);
    pairs_.resize(count);
    Split best;
    int evaluated = 0;
    for (int f : order) {
      if (evaluated >= features_per_split_) break;
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = samples_[begin + k];
        pairs_[k] = {x_(i, f), y_[i]};
      }
      std::sort(pairs_.begin(), pairs_.end());
      if (pairs_.front().first == pairs_.back().first) continue;
      ++evaluated;
      double left_sum = 0.0;
      for (std::size_t k = 1; k < count; ++k) {
        left_sum += pairs_[k - 1].second;
        if (k < min_leaf || count - k < min_leaf) continue;
        if (pairs_[k - 1].first == pairs_[k].first) continue;
        const double right_sum = total - left_sum;
        const double score =
            left_sum * left_sum / static_cast<double>(k) +
            right_sum * right_sum / static_cast<double>(count - k);
        if (score > best.score) {
          best.score = score;
          best.feature = f;
          best.threshold = 0.5 * (pairs_[k - 1].first + pairs_[k].first);
          // Midpoints of adjacent doubles can round up to the larger value.
          if (!(best.threshold < pairs_[k].first)) {
            best.threshold = pairs_[k - 1].first;
          }
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const RfConfig& config_;
  std::mt19937_64& rng_;
  int features_per_split_ = 1;
  std::vector<std::size_t> samples_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

RegressionForest RegressionForest::Fit(const Matrix& features,
                                       std::span<const double> targets,
                                       const RfConfig& config) {
  config.Validate();
  const std::size_t n = features.rows();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (targets.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature rows and targets differ in length");
  }

  // Canonical row order: lexicographic on (features, target).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto ra = features.row(a);
                     const auto rb = features.row(b);
                     for (std::size_t j = 0; j < ra.size(); ++j) {
                       if (ra[j] != rb[j]) return ra[j] < rb[j];
                     }
                     return targets[a] < targets[b];
                   });
  Matrix x(n, features.cols());
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::copy(features.row(order[k]).begin(), features.row(order[k]).end(),
              x.row(k).begin());
    y[k] = targets[order[k]];
  }

  RegressionForest forest;
  forest.num_features_ = static_cast<int>(features.cols());
  forest.trees_.reserve(config.n_trees);
  for (int t = 0; t < config.n_trees; ++t) {
    std::mt19937_64 rng(MixSeed(config.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> samples(n);
    if (config.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : samples) s = pick(rng);
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder(x, y, config, rng);
    forest.trees_.push_back(builder.Build(std::move(samples)));
  }
  return forest;
}

double RegressionForest::Predict(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != num_features_) {
    throw Error(ErrorCode::kInvalidArgument,
                "forest expects " + std::to_string(num_features_) +
                    " features, got " + std::to_string(features.size()));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.Predict(features);
  return sum / static_cast<double>(trees_.size());
}

std::string RegressionForest::Serialize() const {
  std::ostringstream out;
  out << "doseopt-forest 1\n";
  out << "features " << num_features_ << '\n';
  out << "trees " << trees_.size() << '\n';
  for (const auto& tree : trees_) {
    out << "tree " << tree.nodes().size() << '\n';
    for (const auto& node : tree.nodes()) {
      out << node.feature << ' ' << FormatDouble(node.threshold) << ' '
          << node.left << ' ' << node.right << ' ' << FormatDouble(node.value)
          << '\n';
    }
  }
  return out.str();
}

RegressionForest RegressionForest::Deserialize(const std::string& text) {
  std::istringstream in(text);
  auto fail = [](const std::string& what) {
    return Error(ErrorCode::kParse, "forest model: " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "doseopt-forest") {
    throw fail("missing 'doseopt-forest' header");
  }
  if (version != 1) throw fail("unsupported version " + std::to_string(version));
  std::string key;
  RegressionForest forest;
  std::size_t num_trees = 0;
  if (!(in >> key >> forest.num_features_) || key != "features") {
    throw fail("expected 'features'");
  }
  if (!(in >> key >> num_trees) || key != "trees" || num_trees == 0) {
    throw fail("expected 'trees'");
  }
  for (std::size_t t = 0; t < num_trees; ++t) {
    std::size_t num_nodes = 0;
    if (!(in >> key >> num_nodes) || key != "tree" || num_nodes == 0) {
      throw fail("expected 'tree' block " + std::to_string(t));
    }
    std::vector<TreeNode> nodes(num_nodes);
    for (std::size_t idx = 0; idx < num_nodes; ++idx) {
      TreeNode& node = nodes[idx];
      std::string threshold, value;
      if (!(in >> node.feature >> threshold >> node.left >> node.right >>
            value)) {
        throw fail("truncated node list in tree " + std::to_string(t));
      }
      node.threshold = ParseCell(threshold, t + 1, 2);
      node.value = ParseCell(value, t + 1, 5);
      const int limit = static_cast<int>(num_nodes);
      if (node.feature >= forest.num_features_ ||
          (node.feature >= 0 &&
           (node.left <= static_cast<int>(idx) || node.left >= limit ||
            node.right <= static_cast<int>(idx) || node.right >= limit))) {
        throw fail("bad node in tree " + std::to_string(t));
      }
    }
    forest.trees_.emplace_back(std::move(nodes));
  }
  return forest;
}

}  // namespace doseopt
