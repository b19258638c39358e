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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "doseopt/csv.h"
#include "doseopt/error.h"

namespace doseopt {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseNumber(const std::string& text) {
  return ParseCell(Trim(text), 1, 1);
}

std::int64_t ParseInteger(const std::string& text) {
  const double v = ParseNumber(text);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw Error(ErrorCode::kParse, "expected an integer, got '" + text + "'");
  }
  return static_cast<std::int64_t>(v);
}

bool ParseBool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::kParse, "expected true/false, got '" + text + "'");
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  for (double v : ParseNumberList(text)) {
    if (v != std::floor(v)) {
      throw Error(ErrorCode::kParse, "expected integers in '" + text + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::optional<double>> ParseEpsList(const std::string& text) {
  std::vector<std::optional<double>> out;
  for (const std::string& item : SplitList(text)) {
    if (item == "disabled") {
      out.push_back(std::nullopt);
    } else {
      out.push_back(ParseNumber(item));
    }
  }
  return out;
}

template <typename T, typename F>
std::string JoinWith(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += format(items[i]);
  }
  return out;
}

std::string Num(double v) { return FormatDouble(v); }
std::string Int(std::int64_t v) { return std::to_string(v); }
std::string Bool(bool v) { return v ? "true" : "false"; }
std::string Eps(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "disabled";
}

MaxFeatures ParseMaxFeatures(const std::string& s) {
  if (s == "sqrt") return MaxFeatures::kSqrt;
  if (s == "log2") return MaxFeatures::kLog2;
  if (s == "all") return MaxFeatures::kAll;
  throw Error(ErrorCode::kParse, "max_features must be sqrt|log2|all");
}

const char* MaxFeaturesName(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::kSqrt:
      return "sqrt";
    case MaxFeatures::kLog2:
      return "log2";
    case MaxFeatures::kAll:
      return "all";
  }
  return "sqrt";
}

std::string BenefitText(const BenefitSpec& b) {
  if (!b.uniform) return "ones";
  return "uniform(" + Num(b.lo) + "," + Num(b.hi) + "," + Int(b.seed) + ")";
}

BenefitSpec ParseBenefits(const std::string& text) {
  BenefitSpec spec;
  if (text == "ones") {
    spec.uniform = false;
    return spec;
  }
  const std::string prefix = "uniform(";
  if (text.rfind(prefix, 0) != 0 || text.back() != ')') {
    throw Error(ErrorCode::kParse,
                "benefits must be 'ones' or 'uniform(lo,hi,seed)'");
  }
  const auto parts =
      SplitList(text.substr(prefix.size(), text.size() - prefix.size() - 1));
  if (parts.size() != 3) {
    throw Error(ErrorCode::kParse, "uniform benefits take lo,hi,seed");
  }
  spec.lo = ParseNumber(parts[0]);
  spec.hi = ParseNumber(parts[1]);
  spec.seed = static_cast<std::uint64_t>(ParseInteger(parts[2]));
  return spec;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, Field>& Fields() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const auto* fields = new std::map<std::string, Field>{
      {"data_csv", {[](C& c, S v) { c.data_csv = v; },
                    [](const C& c) { return c.data_csv; }}},
      {"data_has_header",
       {[](C& c, S v) { c.data_has_header = ParseBool(v); },
        [](const C& c) { return Bool(c.data_has_header); }}},
      {"data_first_column",
       {[](C& c, S v) { c.data_first_column = ParseInteger(v); },
        [](const C& c) { return Int(c.data_first_column); }}},
      {"synthetic_n", {[](C& c, S v) { c.synthetic_n = ParseInteger(v); },
                       [](const C& c) { return Int(c.synthetic_n); }}},
      {"seed", {[](C& c, S v) { c.seed = ParseInteger(v); },
                [](const C& c) { return Int(c.seed); }}},
      {"treatment_noise_variance",
       {[](C& c, S v) { c.gen.treatment_noise_variance = ParseNumber(v); },
        [](const C& c) { return Num(c.gen.treatment_noise_variance); }}},
      {"outcome_noise_variance",
       {[](C& c, S v) { c.gen.outcome_noise_variance = ParseNumber(v); },
        [](const C& c) { return Num(c.gen.outcome_noise_variance); }}},
      {"gamma_scale", {[](C& c, S v) { c.gen.gamma_scale = ParseNumber(v); },
                       [](const C& c) { return Num(c.gen.gamma_scale); }}},
      {"protected_feature",
       {[](C& c, S v) {
          const auto f = ParseInteger(v);
          if (f < 1) throw Error(ErrorCode::kParse, "protected_feature is 1-based");
          c.gen.protected_feature = static_cast<std::size_t>(f - 1);
        },
        [](const C& c) { return Int(c.gen.protected_feature + 1); }}},
      {"dose_assignment",
       {[](C& c, S v) {
          if (v == "confounded") {
            c.gen.dose_assignment = DoseAssignment::kConfounded;
          } else if (v == "uniform") {
            c.gen.dose_assignment = DoseAssignment::kUniform;
          } else {
            throw Error(ErrorCode::kParse,
                        "dose_assignment must be confounded|uniform");
          }
        },
        [](const C& c) {
          return std::string(c.gen.dose_assignment == DoseAssignment::kUniform
                                 ? "uniform"
                                 : "confounded");
        }}},
      {"test_fraction", {[](C& c, S v) { c.test_fraction = ParseNumber(v); },
                         [](const C& c) { return Num(c.test_fraction); }}},
      {"delta", {[](C& c, S v) { c.delta = ParseInteger(v); },
                 [](const C& c) { return Int(c.delta); }}},
      {"estimators",
       {[](C& c, S v) {
          c.estimators.clear();
          for (const auto& s : SplitList(v)) {
            c.estimators.push_back(ParseEstimatorKind(s));
          }
        },
        [](const C& c) {
          return JoinWith(c.estimators, [](EstimatorKind k) {
            return std::string(EstimatorKindName(k));
          });
        }}},
      {"rf_trees", {[](C& c, S v) { c.rf.n_trees = ParseInteger(v); },
                    [](const C& c) { return Int(c.rf.n_trees); }}},
      {"rf_max_depth", {[](C& c, S v) { c.rf.max_depth = ParseInteger(v); },
                        [](const C& c) { return Int(c.rf.max_depth); }}},
      {"rf_min_leaf",
       {[](C& c, S v) { c.rf.min_samples_leaf = ParseInteger(v); },
        [](const C& c) { return Int(c.rf.min_samples_leaf); }}},
      {"rf_max_features",
       {[](C& c, S v) { c.rf.max_features = ParseMaxFeatures(v); },
        [](const C& c) {
          return std::string(MaxFeaturesName(c.rf.max_features));
        }}},
      {"rf_bootstrap", {[](C& c, S v) { c.rf.bootstrap = ParseBool(v); },
                        [](const C& c) { return Bool(c.rf.bootstrap); }}},
      {"rf_grid_trees",
       {[](C& c, S v) { c.rf_grid_trees = ParseIntList(v); },
        [](const C& c) { return JoinWith(c.rf_grid_trees, Int); }}},
      {"rf_grid_depth",
       {[](C& c, S v) { c.rf_grid_depth = ParseIntList(v); },
        [](const C& c) { return JoinWith(c.rf_grid_depth, Int); }}},
      {"rf_grid_min_leaf",
       {[](C& c, S v) { c.rf_grid_min_leaf = ParseIntList(v); },
        [](const C& c) { return JoinWith(c.rf_grid_min_leaf, Int); }}},
      {"cv_folds", {[](C& c, S v) { c.cv_folds = ParseInteger(v); },
                    [](const C& c) { return Int(c.cv_folds); }}},
      {"binned_bins", {[](C& c, S v) { c.binned_bins = ParseInteger(v); },
                       [](const C& c) { return Int(c.binned_bins); }}},
      {"binned_k", {[](C& c, S v) { c.binned_k = ParseInteger(v); },
                    [](const C& c) { return Int(c.binned_k); }}},
      {"budgets", {[](C& c, S v) { c.budgets = ParseNumberList(v); },
                   [](const C& c) { return JoinWith(c.budgets, Num); }}},
      {"auuc_caps", {[](C& c, S v) { c.auuc_caps = ParseNumberList(v); },
                     [](const C& c) { return JoinWith(c.auuc_caps, Num); }}},
      {"auuc_step", {[](C& c, S v) { c.auuc_step = ParseNumber(v); },
                     [](const C& c) { return Num(c.auuc_step); }}},
      {"eps_dt", {[](C& c, S v) { c.eps_dt = ParseEpsList(v); },
                  [](const C& c) { return JoinWith(c.eps_dt, Eps); }}},
      {"eps_do", {[](C& c, S v) { c.eps_do = ParseEpsList(v); },
                  [](const C& c) { return JoinWith(c.eps_do, Eps); }}},
      {"gammas", {[](C& c, S v) { c.gammas = ParseNumberList(v); },
                  [](const C& c) { return JoinWith(c.gammas, Num); }}},
      {"exp2_estimators",
       {[](C& c, S v) {
          c.exp2_estimators.clear();
          for (const auto& s : SplitList(v)) {
            c.exp2_estimators.push_back(ParseEstimatorKind(s));
          }
        },
        [](const C& c) {
          return JoinWith(c.exp2_estimators, [](EstimatorKind k) {
            return std::string(EstimatorKindName(k));
          });
        }}},
      {"benefits", {[](C& c, S v) { c.benefits = ParseBenefits(v); },
                    [](const C& c) { return BenefitText(c.benefits); }}},
      {"exp3_estimator",
       {[](C& c, S v) { c.exp3_estimator = ParseEstimatorKind(v); },
        [](const C& c) {
          return std::string(EstimatorKindName(c.exp3_estimator));
        }}},
      {"solver", {[](C& c, S v) { c.solver = ParseSolverKind(v); },
                  [](const C& c) { return std::string(SolverKindName(c.solver)); }}},
      {"bnb_node_limit",
       {[](C& c, S v) { c.bnb_node_limit = ParseInteger(v); },
        [](const C& c) { return Int(c.bnb_node_limit); }}},
      {"bnb_relative_gap",
       {[](C& c, S v) { c.bnb_relative_gap = ParseNumber(v); },
        [](const C& c) { return Num(c.bnb_relative_gap); }}},
      {"bnb_time_limit",
       {[](C& c, S v) { c.bnb_time_limit = ParseNumber(v); },
        [](const C& c) { return Num(c.bnb_time_limit); }}},
      {"scal_factors", {[](C& c, S v) { c.scal_factors = ParseIntList(v); },
                        [](const C& c) { return JoinWith(c.scal_factors, Int); }}},
      {"scal_budget", {[](C& c, S v) { c.scal_budget = ParseNumber(v); },
                       [](const C& c) { return Num(c.scal_budget); }}},
      {"scal_jitter", {[](C& c, S v) { c.scal_jitter = ParseNumber(v); },
                       [](const C& c) { return Num(c.scal_jitter); }}},
      {"scal_exact_max_factor",
       {[](C& c, S v) { c.scal_exact_max_factor = ParseInteger(v); },
        [](const C& c) { return Int(c.scal_exact_max_factor); }}},
      {"scal_time_limit",
       {[](C& c, S v) { c.scal_time_limit = ParseNumber(v); },
        [](const C& c) { return Num(c.scal_time_limit); }}},
      {"sweep_deltas", {[](C& c, S v) { c.sweep_deltas = ParseIntList(v); },
                        [](const C& c) { return JoinWith(c.sweep_deltas, Int); }}},
      {"sweep_budget", {[](C& c, S v) { c.sweep_budget = ParseNumber(v); },
                        [](const C& c) { return Num(c.sweep_budget); }}},
      {"sweep_estimator",
       {[](C& c, S v) { c.sweep_estimator = ParseEstimatorKind(v); },
        [](const C& c) {
          return std::string(EstimatorKindName(c.sweep_estimator));
        }}},
  };
  return *fields;
}

}  // namespace

std::vector<double> ParseNumberList(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) {
    if (item.find(':') == std::string::npos) {
      out.push_back(ParseNumber(item));
      continue;
    }
    std::vector<std::string> parts;
    std::stringstream in(item);
    std::string p;
    while (std::getline(in, p, ':')) parts.push_back(p);
    if (parts.size() != 3) {
      throw Error(ErrorCode::kParse, "range must be start:stop:step");
    }
    const double start = ParseNumber(parts[0]);
    const double stop = ParseNumber(parts[1]);
    const double step = ParseNumber(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw Error(ErrorCode::kParse, "bad range '" + item + "'");
    }
    const auto count =
        static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
    for (std::int64_t j = 0; j <= count; ++j) {
      out.push_back(start + static_cast<double>(j) * step);
    }
  }
  return out;
}

EstimatorKind ParseEstimatorKind(const std::string& name) {
  if (name == "oracle") return EstimatorKind::kOracle;
  if (name == "rf") return EstimatorKind::kRfSLearner;
  if (name == "binned") return EstimatorKind::kBinnedSLearner;
  throw Error(ErrorCode::kParse,
              "unknown estimator '" + name + "' (oracle|rf|binned)");
}

std::uint64_t Fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig::ExperimentConfig() {
  budgets = ParseNumberList("25:250:25");
  eps_dt = {0.0, 0.1, 0.2, 0.5, 1.0};
  eps_do = {0.0, 0.1, 0.2, 0.5, 1.0};
}

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kValidation, "config: " + what);
  };
  gen.Validate();
  rf.Validate();
  if (delta < 1) fail("delta must be >= 1");
  if (data_csv.empty() && synthetic_n < 2) fail("synthetic_n must be >= 2");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    fail("test_fraction must lie in [0, 1)");
  }
  if (estimators.empty()) fail("estimators must not be empty");
  if (cv_folds == 1 || cv_folds < 0) fail("cv_folds must be 0 or >= 2");
  if (binned_bins < 1 || binned_k < 1) fail("binned_bins and binned_k >= 1");
  auto ascending = [&](const std::vector<double>& v, const char* name) {
    if (v.empty()) fail(std::string(name) + " must not be empty");
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < 0.0) fail(std::string(name) + " must be non-negative");
      if (j > 0 && !(v[j] > v[j - 1])) {
        fail(std::string(name) + " must be strictly ascending");
      }
    }
  };
  ascending(budgets, "budgets");
  ascending(auuc_caps, "auuc_caps");
  if (!(auuc_step > 0.0)) fail("auuc_step must be positive");
  for (double cap : auuc_caps) {
    const double k = cap / auuc_step;
    if (std::abs(k - std::round(k)) > 1e-9 || cap <= 0.0) {
      fail("every auuc cap must be a positive multiple of auuc_step");
    }
  }
  for (const auto* list : {&eps_dt, &eps_do}) {
    if (list->empty()) fail("eps grids must not be empty");
    for (std::size_t j = 0; j < list->size(); ++j) {
      const auto& e = (*list)[j];
      if (e && !(*e >= 0.0 && *e <= 1.0)) fail("eps values must be in [0, 1]");
      if (j > 0 && (!(*list)[j - 1] || (e && !(*e > *(*list)[j - 1])))) {
        fail("eps grids must be strictly ascending with 'disabled' last");
      }
    }
  }
  if (gammas.empty()) fail("gammas must not be empty");
  if (benefits.uniform && !(benefits.lo <= benefits.hi)) {
    fail("uniform benefits need lo <= hi");
  }
  if (bnb_node_limit < 1) fail("bnb_node_limit must be >= 1");
  if (bnb_relative_gap < 0.0) fail("bnb_relative_gap must be >= 0");
  if (bnb_time_limit < 0.0 || scal_time_limit < 0.0) {
    fail("time limits must be >= 0");
  }
  for (int f : scal_factors) {
    if (f < 1) fail("scal_factors must be >= 1");
  }
  if (scal_jitter < 0.0) fail("scal_jitter must be >= 0");
  for (int d : sweep_deltas) {
    if (d < 1) fail("sweep_deltas must be >= 1");
  }
  if (scal_budget < 0.0 || sweep_budget < 0.0) fail("budgets must be >= 0");
}

std::string ExperimentConfig::ToText() const {
  std::string out;
  for (const auto& [key, field] : Fields()) {
    out += key + " = " + field.get(*this) + "\n";
  }
  return out;
}

std::string ExperimentConfig::Hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(ToText())));
  return buf;
}

void SetConfigValue(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  const auto it = Fields().find(key);
  if (it == Fields().end()) {
    throw Error(ErrorCode::kParse, "unknown config key '" + key + "'");
  }
  try {
    it->second.set(cfg, value);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, key + ": " + e.what());
  }
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      SetConfigValue(cfg, Trim(trimmed.substr(0, eq)),
                     Trim(trimmed.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

}  // namespace doseopt
