// Copyright 2026 The timbreid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace timbreid {

/// Per-class probabilities, indexed by class id. Entries are non-negative
/// and sum to 1 within 1e-9.
using ProbabilityVector = std::vector<double>;

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;          // 0 = unlimited
  std::size_t min_samples_split = 2;
  // 0 selects the task rule: floor(sqrt(d)) for classification,
  // floor(d/3) for regression, never fewer than one feature.
  std::size_t features_per_split = 0;
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;
};

/// One node of a decision tree, stored in a flat arena. Internal nodes have
/// feature >= 0 and route via `x[feature] <= threshold` to `left`, else
/// `right`. Leaves hold either per-class training counts or a mean target.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> counts;  // classifier leaf: per-class sample counts
  double value = 0.0;          // regressor leaf: mean target

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ClassifierModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::string feature_convention;
  ForestConfig config;
};

struct RegressorModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  std::string feature_convention;
  ForestConfig config;
};

/// Gini impurity sum p_i * (1 - p_i) of a probability vector.
double gini(const ProbabilityVector& probs);

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Best axis-aligned split among the candidate features, with thresholds at
/// midpoints between consecutive distinct sorted values. Split quality is
/// the impurity decrease
///   gini(parent) - (n_L * gini(left) + n_R * gini(right)) / n
/// and ties are broken toward the lowest feature index, then the lowest
/// threshold. Returns nullopt when no split has positive gain.
std::optional<SplitChoice> best_split_classify(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::size_t>& candidate_features, std::size_t n_classes);

/// Regression counterpart scoring by variance reduction,
///   (sse(parent) - sse(left) - sse(right)) / n.
std::optional<SplitChoice> best_split_regress(
    const std::vector<std::vector<double>>& X, const std::vector<double>& y,
    const std::vector<std::size_t>& candidate_features);

/// Fits a classification forest. Labels must be dense ids 0..C-1 with at
/// least two classes present. Tree t draws its bootstrap resample and all
/// per-node feature subsets from an independent RNG stream derived from
/// rng_seed and t, so refits are bit-identical regardless of scheduling.
ClassifierModel fit_classifier(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& y,
                               const ForestConfig& cfg,
                               std::string feature_convention = "");

/// Mean over trees of each tree's leaf class-proportion vector.
ProbabilityVector predict_proba(const ClassifierModel& model,
                                const std::vector<double>& x);

RegressorModel fit_regressor(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y,
                             const ForestConfig& cfg,
                             std::string feature_convention = "");

/// Mean over trees of the reached leaf's training-target mean.
double predict(const RegressorModel& model, const std::vector<double>& x);

// Serialization. One canonical JSON container; loading a file whose
// format_version is unknown raises VersionMismatch, anything structurally
// wrong raises CorruptModel. Round-tripped models predict bit-identically.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);
nlohmann::json regressor_to_json(const RegressorModel& model);
RegressorModel regressor_from_json(const nlohmann::json& j);

void save_classifier(const ClassifierModel& model, const std::string& path);
ClassifierModel load_classifier(const std::string& path);
void save_regressor(const RegressorModel& model, const std::string& path);
RegressorModel load_regressor(const std::string& path);

// Shared by the other model containers.
nlohmann::json load_model_json(const std::string& path,
                               const std::string& expected_kind);
void save_model_json(const nlohmann::json& j, const std::string& path);

}  // namespace timbreid
