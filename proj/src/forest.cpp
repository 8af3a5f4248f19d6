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

#include "timbreid/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "timbreid/error.hpp"
#include "timbreid/rng.hpp"

namespace timbreid {
namespace {

double gini_from_counts(const std::vector<double>& counts, double n) {
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += (c / n) * (c / n);
  return 1.0 - sum_sq;
}

// Scans one feature for the best threshold over the given rows. `update`
// folds candidates into `best` with the (gain, feature, threshold) ordering
// used everywhere, so sweep order cannot affect the outcome.
struct BestTracker {
  bool found = false;
  SplitChoice best;

  void offer(double gain, std::size_t feature, double threshold) {
    if (gain <= 0.0) return;
    if (!found || gain > best.gain ||
        (gain == best.gain && (feature < best.feature ||
                               (feature == best.feature &&
                                threshold < best.threshold)))) {
      best = SplitChoice{feature, threshold, gain};
      found = true;
    }
  }
};

void scan_feature_classify(const std::vector<std::vector<double>>& X,
                           const std::vector<int>& y,
                           const std::vector<std::size_t>& rows,
                           std::size_t feature, std::size_t n_classes,
                           double parent_gini, BestTracker& tracker) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, int>> ordered(n);
  for (std::size_t i = 0; i < n; ++i) {
    ordered[i] = {X[rows[i]][feature], y[rows[i]]};
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> left_counts(n_classes, 0.0);
  std::vector<double> right_counts(n_classes, 0.0);
  for (const auto& [v, label] : ordered) right_counts[label] += 1.0;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_counts[ordered[i].second] += 1.0;
    right_counts[ordered[i].second] -= 1.0;
    if (ordered[i].first == ordered[i + 1].first) continue;
    const double threshold = (ordered[i].first + ordered[i + 1].first) / 2.0;
    const auto n_left = static_cast<double>(i + 1);
    const auto n_right = static_cast<double>(n - i - 1);
    const double child_impurity =
        (n_left * gini_from_counts(left_counts, n_left) +
         n_right * gini_from_counts(right_counts, n_right)) /
        static_cast<double>(n);
    tracker.offer(parent_gini - child_impurity, feature, threshold);
  }
}

void scan_feature_regress(const std::vector<std::vector<double>>& X,
                          const std::vector<double>& y,
                          const std::vector<std::size_t>& rows,
                          std::size_t feature, double parent_sse,
                          BestTracker& tracker) {
  const std::size_t n = rows.size();
  // Targets are shifted by the first one so a constant-target node produces
  // exactly zero sums and therefore exactly zero gain.
  const double shift = y[rows[0]];
  std::vector<std::pair<double, double>> ordered(n);
  for (std::size_t i = 0; i < n; ++i) {
    ordered[i] = {X[rows[i]][feature], y[rows[i]] - shift};
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double right_sum = 0.0, right_sumsq = 0.0;
  for (const auto& [v, t] : ordered) {
    right_sum += t;
    right_sumsq += t * t;
  }
  double left_sum = 0.0, left_sumsq = 0.0;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t = ordered[i].second;
    left_sum += t;
    left_sumsq += t * t;
    right_sum -= t;
    right_sumsq -= t * t;
    if (ordered[i].first == ordered[i + 1].first) continue;
    const double threshold = (ordered[i].first + ordered[i + 1].first) / 2.0;
    const auto n_left = static_cast<double>(i + 1);
    const auto n_right = static_cast<double>(n - i - 1);
    const double sse_left = std::max(0.0, left_sumsq - left_sum * left_sum / n_left);
    const double sse_right =
        std::max(0.0, right_sumsq - right_sum * right_sum / n_right);
    const double gain =
        (parent_sse - sse_left - sse_right) / static_cast<double>(n);
    tracker.offer(gain, feature, threshold);
  }
}

double node_sse(const std::vector<double>& y,
                const std::vector<std::size_t>& rows) {
  const double shift = y[rows[0]];
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r : rows) {
    const double t = y[r] - shift;
    sum += t;
    sumsq += t * t;
  }
  return std::max(0.0, sumsq - sum * sum / static_cast<double>(rows.size()));
}

void check_matrix(const std::vector<std::vector<double>>& X,
                  std::size_t expected_cols) {
  for (const auto& row : X) {
    if (row.size() != expected_cols) {
      throw DimensionMismatch("ragged feature matrix");
    }
  }
}

void check_config(const ForestConfig& cfg) {
  if (cfg.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (cfg.min_samples_split < 2) {
    throw ConfigError("min_samples_split must be >= 2");
  }
}

// Shared recursive grower. `Payload` fills in the leaf.
template <class ScanFn, class LeafFn, class PureFn>
class TreeGrower {
 public:
  TreeGrower(const std::vector<std::vector<double>>& X, std::size_t n_features,
             const ForestConfig& cfg, std::size_t features_per_split, Rng& rng,
             ScanFn scan, LeafFn make_leaf, PureFn is_pure)
      : X_(X),
        n_features_(n_features),
        cfg_(cfg),
        features_per_split_(features_per_split),
        rng_(rng),
        scan_(scan),
        make_leaf_(make_leaf),
        is_pure_(is_pure) {}

  DecisionTree grow(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow_node(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow_node(std::vector<std::size_t> rows, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const bool depth_capped = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
    if (rows.size() < cfg_.min_samples_split || depth_capped ||
        is_pure_(rows)) {
      make_leaf_(tree_.nodes[index], rows);
      return index;
    }

    std::vector<std::size_t> candidates;
    if (features_per_split_ >= n_features_) {
      candidates.resize(n_features_);
      for (std::size_t f = 0; f < n_features_; ++f) candidates[f] = f;
    } else {
      candidates =
          rng_.sample_without_replacement(n_features_, features_per_split_);
    }

    const auto choice = scan_(rows, candidates);
    if (!choice) {
      make_leaf_(tree_.nodes[index], rows);
      return index;
    }

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows) {
      (X_[r][choice->feature] <= choice->threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::int32_t left = grow_node(std::move(left_rows), depth + 1);
    const std::int32_t right = grow_node(std::move(right_rows), depth + 1);
    TreeNode& node = tree_.nodes[index];
    node.feature = static_cast<std::int32_t>(choice->feature);
    node.threshold = choice->threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  const std::vector<std::vector<double>>& X_;
  std::size_t n_features_;
  const ForestConfig& cfg_;
  std::size_t features_per_split_;
  Rng& rng_;
  ScanFn scan_;
  LeafFn make_leaf_;
  PureFn is_pure_;
  DecisionTree tree_;
};

std::vector<std::size_t> bootstrap_rows(std::size_t n, bool bootstrap,
                                        Rng& rng) {
  std::vector<std::size_t> rows(n);
  if (bootstrap) {
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = static_cast<std::size_t>(rng.bounded(n));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  }
  return rows;
}

const TreeNode& descend(const DecisionTree& tree,
                        const std::vector<double>& x) {
  const TreeNode* node = &tree.nodes.front();
  while (!node->is_leaf()) {
    node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &tree.nodes[static_cast<std::size_t>(node->left)]
               : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

std::size_t resolve_features_per_split(const ForestConfig& cfg, std::size_t d,
                                       bool classify) {
  if (cfg.features_per_split != 0) return std::min(cfg.features_per_split, d);
  const auto dd = static_cast<double>(d);
  const auto k = classify ? static_cast<std::size_t>(std::sqrt(dd))
                          : d / 3;
  return std::max<std::size_t>(1, std::min(k, d));
}

// --- JSON helpers ---------------------------------------------------------

nlohmann::json tree_to_json(const DecisionTree& tree, bool classify) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes) {
    nlohmann::json n;
    if (node.is_leaf()) {
      if (classify) {
        n["counts"] = node.counts;
      } else {
        n["v"] = node.value;
      }
    } else {
      n["f"] = node.feature;
      n["t"] = node.threshold;
      n["l"] = node.left;
      n["r"] = node.right;
    }
    nodes.push_back(std::move(n));
  }
  return nlohmann::json{{"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const nlohmann::json& j, bool classify,
                            std::size_t n_classes) {
  DecisionTree tree;
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) {
    throw CorruptModel("tree without nodes");
  }
  tree.nodes.reserve(nodes.size());
  for (const auto& n : nodes) {
    TreeNode node;
    if (n.contains("f")) {
      node.feature = n.at("f").get<std::int32_t>();
      node.threshold = n.at("t").get<double>();
      node.left = n.at("l").get<std::int32_t>();
      node.right = n.at("r").get<std::int32_t>();
      const auto size = static_cast<std::int32_t>(nodes.size());
      if (node.feature < 0 || node.left < 0 || node.right < 0 ||
          node.left >= size || node.right >= size) {
        throw CorruptModel("node index out of range");
      }
    } else if (classify) {
      node.counts = n.at("counts").get<std::vector<double>>();
      if (node.counts.size() != n_classes) {
        throw CorruptModel("leaf count vector has wrong class count");
      }
    } else {
      node.value = n.at("v").get<double>();
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

nlohmann::json config_to_json(const ForestConfig& cfg) {
  return nlohmann::json{{"n_trees", cfg.n_trees},
                        {"max_depth", cfg.max_depth},
                        {"min_samples_split", cfg.min_samples_split},
                        {"features_per_split", cfg.features_per_split},
                        {"bootstrap", cfg.bootstrap},
                        {"rng_seed", cfg.rng_seed}};
}

ForestConfig config_from_json(const nlohmann::json& j) {
  ForestConfig cfg;
  cfg.n_trees = j.at("n_trees").get<std::size_t>();
  cfg.max_depth = j.at("max_depth").get<std::size_t>();
  cfg.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  cfg.features_per_split = j.at("features_per_split").get<std::size_t>();
  cfg.bootstrap = j.at("bootstrap").get<bool>();
  cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

double gini(const ProbabilityVector& probs) {
  double g = 0.0;
  for (double p : probs) g += p * (1.0 - p);
  return g;
}

std::optional<SplitChoice> best_split_classify(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::size_t>& candidate_features,
    std::size_t n_classes) {
  std::vector<std::size_t> rows(X.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;

  std::vector<double> counts(n_classes, 0.0);
  for (std::size_t r : rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
  const double parent = gini_from_counts(counts, static_cast<double>(rows.size()));

  std::vector<std::size_t> features = candidate_features;
  std::sort(features.begin(), features.end());
  BestTracker tracker;
  for (std::size_t f : features) {
    scan_feature_classify(X, y, rows, f, n_classes, parent, tracker);
  }
  if (!tracker.found) return std::nullopt;
  return tracker.best;
}

std::optional<SplitChoice> best_split_regress(
    const std::vector<std::vector<double>>& X, const std::vector<double>& y,
    const std::vector<std::size_t>& candidate_features) {
  std::vector<std::size_t> rows(X.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const double parent = node_sse(y, rows);

  std::vector<std::size_t> features = candidate_features;
  std::sort(features.begin(), features.end());
  BestTracker tracker;
  for (std::size_t f : features) {
    scan_feature_regress(X, y, rows, f, parent, tracker);
  }
  if (!tracker.found) return std::nullopt;
  return tracker.best;
}

ClassifierModel fit_classifier(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& y,
                               const ForestConfig& cfg,
                               std::string feature_convention) {
  check_config(cfg);
  if (X.empty()) throw EmptyTrainingSet("no training samples");
  if (X.size() != y.size()) {
    throw DimensionMismatch("feature rows and labels differ in length");
  }
  const std::size_t d = X.front().size();
  check_matrix(X, d);

  std::set<int> distinct(y.begin(), y.end());
  if (*distinct.begin() < 0) throw DimensionMismatch("negative class id");
  if (distinct.size() < 2) {
    throw SingleClass("training labels contain a single class");
  }
  const auto n_classes = static_cast<std::size_t>(*distinct.rbegin()) + 1;

  ClassifierModel model;
  model.n_features = d;
  model.n_classes = n_classes;
  model.feature_convention = std::move(feature_convention);
  model.config = cfg;
  model.trees.reserve(cfg.n_trees);

  const std::size_t k = resolve_features_per_split(cfg, d, /*classify=*/true);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.rng_seed, t));
    auto rows = bootstrap_rows(X.size(), cfg.bootstrap, rng);

    auto scan = [&](const std::vector<std::size_t>& node_rows,
                    const std::vector<std::size_t>& features)
        -> std::optional<SplitChoice> {
      std::vector<double> counts(n_classes, 0.0);
      for (std::size_t r : node_rows) {
        counts[static_cast<std::size_t>(y[r])] += 1.0;
      }
      const double parent =
          gini_from_counts(counts, static_cast<double>(node_rows.size()));
      BestTracker tracker;
      for (std::size_t f : features) {
        scan_feature_classify(X, y, node_rows, f, n_classes, parent, tracker);
      }
      if (!tracker.found) return std::nullopt;
      return tracker.best;
    };
    auto make_leaf = [&](TreeNode& node,
                         const std::vector<std::size_t>& node_rows) {
      node.counts.assign(n_classes, 0.0);
      for (std::size_t r : node_rows) {
        node.counts[static_cast<std::size_t>(y[r])] += 1.0;
      }
    };
    auto is_pure = [&](const std::vector<std::size_t>& node_rows) {
      for (std::size_t i = 1; i < node_rows.size(); ++i) {
        if (y[node_rows[i]] != y[node_rows[0]]) return false;
      }
      return true;
    };

    TreeGrower grower(X, d, cfg, k, rng, scan, make_leaf, is_pure);
    model.trees.push_back(grower.grow(std::move(rows)));
  }
  return model;
}

ProbabilityVector predict_proba(const ClassifierModel& model,
                                const std::vector<double>& x) {
  if (x.size() != model.n_features) {
    throw DimensionMismatch("expected " + std::to_string(model.n_features) +
                            " features, got " + std::to_string(x.size()));
  }
  ProbabilityVector probs(model.n_classes, 0.0);
  for (const auto& tree : model.trees) {
    const TreeNode& leaf = descend(tree, x);
    double total = 0.0;
    for (double c : leaf.counts) total += c;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      probs[i] += leaf.counts[i] / total;
    }
  }
  for (double& p : probs) p /= static_cast<double>(model.trees.size());
  return probs;
}

RegressorModel fit_regressor(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y,
                             const ForestConfig& cfg,
                             std::string feature_convention) {
  check_config(cfg);
  if (X.empty()) throw EmptyTrainingSet("no training samples");
  if (X.size() != y.size()) {
    throw DimensionMismatch("feature rows and targets differ in length");
  }
  const std::size_t d = X.front().size();
  check_matrix(X, d);

  RegressorModel model;
  model.n_features = d;
  model.feature_convention = std::move(feature_convention);
  model.config = cfg;
  model.trees.reserve(cfg.n_trees);

  const std::size_t k = resolve_features_per_split(cfg, d, /*classify=*/false);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.rng_seed, t));
    auto rows = bootstrap_rows(X.size(), cfg.bootstrap, rng);

    auto scan = [&](const std::vector<std::size_t>& node_rows,
                    const std::vector<std::size_t>& features)
        -> std::optional<SplitChoice> {
      const double parent = node_sse(y, node_rows);
      BestTracker tracker;
      for (std::size_t f : features) {
        scan_feature_regress(X, y, node_rows, f, parent, tracker);
      }
      if (!tracker.found) return std::nullopt;
      return tracker.best;
    };
    auto make_leaf = [&](TreeNode& node,
                         const std::vector<std::size_t>& node_rows) {
      double sum = 0.0;
      for (std::size_t r : node_rows) sum += y[r];
      node.value = sum / static_cast<double>(node_rows.size());
    };
    auto is_pure = [&](const std::vector<std::size_t>& node_rows) {
      for (std::size_t i = 1; i < node_rows.size(); ++i) {
        if (y[node_rows[i]] != y[node_rows[0]]) return false;
      }
      return true;
    };

    TreeGrower grower(X, d, cfg, k, rng, scan, make_leaf, is_pure);
    model.trees.push_back(grower.grow(std::move(rows)));
  }
  return model;
}

double predict(const RegressorModel& model, const std::vector<double>& x) {
  if (x.size() != model.n_features) {
    throw DimensionMismatch("expected " + std::to_string(model.n_features) +
                            " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += descend(tree, x).value;
  return sum / static_cast<double>(model.trees.size());
}

nlohmann::json classifier_to_json(const ClassifierModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    trees.push_back(tree_to_json(tree, /*classify=*/true));
  }
  return nlohmann::json{{"format", "timbreid-forest"},
                        {"format_version", kModelFormatVersion},
                        {"task", "classify"},
                        {"n_features", model.n_features},
                        {"n_classes", model.n_classes},
                        {"feature_convention", model.feature_convention},
                        {"config", config_to_json(model.config)},
                        {"trees", std::move(trees)}};
}

ClassifierModel classifier_from_json(const nlohmann::json& j) {
  try {
    if (j.at("task").get<std::string>() != "classify") {
      throw CorruptModel("not a classifier model");
    }
    ClassifierModel model;
    model.n_features = j.at("n_features").get<std::size_t>();
    model.n_classes = j.at("n_classes").get<std::size_t>();
    model.feature_convention = j.at("feature_convention").get<std::string>();
    model.config = config_from_json(j.at("config"));
    for (const auto& tj : j.at("trees")) {
      model.trees.push_back(
          tree_from_json(tj, /*classify=*/true, model.n_classes));
    }
    if (model.trees.empty()) throw CorruptModel("model has no trees");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  }
}

nlohmann::json regressor_to_json(const RegressorModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    trees.push_back(tree_to_json(tree, /*classify=*/false));
  }
  return nlohmann::json{{"format", "timbreid-forest"},
                        {"format_version", kModelFormatVersion},
                        {"task", "regress"},
                        {"n_features", model.n_features},
                        {"feature_convention", model.feature_convention},
                        {"config", config_to_json(model.config)},
                        {"trees", std::move(trees)}};
}

RegressorModel regressor_from_json(const nlohmann::json& j) {
  try {
    if (j.at("task").get<std::string>() != "regress") {
      throw CorruptModel("not a regressor model");
    }
    RegressorModel model;
    model.n_features = j.at("n_features").get<std::size_t>();
    model.feature_convention = j.at("feature_convention").get<std::string>();
    model.config = config_from_json(j.at("config"));
    for (const auto& tj : j.at("trees")) {
      model.trees.push_back(tree_from_json(tj, /*classify=*/false, 0));
    }
    if (model.trees.empty()) throw CorruptModel("model has no trees");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  }
}

nlohmann::json load_model_json(const std::string& path,
                               const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("format") || !j.contains("format_version")) {
    throw CorruptModel(path + ": missing format header");
  }
  if (j["format"].get<std::string>() != expected_kind) {
    throw CorruptModel(path + ": expected a '" + expected_kind + "' file");
  }
  if (j["format_version"].get<int>() != kModelFormatVersion) {
    throw VersionMismatch(path + ": unsupported format_version");
  }
  return j;
}

void save_model_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump();
  out << '\n';
  if (!out) throw IoError("write failure on " + path);
}

void save_classifier(const ClassifierModel& model, const std::string& path) {
  save_model_json(classifier_to_json(model), path);
}

ClassifierModel load_classifier(const std::string& path) {
  return classifier_from_json(load_model_json(path, "timbreid-forest"));
}

void save_regressor(const RegressorModel& model, const std::string& path) {
  save_model_json(regressor_to_json(model), path);
}

RegressorModel load_regressor(const std::string& path) {
  return regressor_from_json(load_model_json(path, "timbreid-forest"));
}

}  // namespace timbreid
