// Copyright 2026 The beacon_recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beacon_recon/random_forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beacon_recon/common.h"
#include "json.hpp"

namespace beacon_recon {
namespace {

struct TreeBuilder {
  const FeatureMatrix& x;
  std::span<const int> y;
  const ForestOptions& options;
  std::size_t mtry;
  Rng& rng;
  RandomForest::Tree tree;

  double Gini(double positives, double total) const {
    if (total <= 0.0) return 0.0;
    const double p = positives / total;
    return 2.0 * p * (1.0 - p);
  }

  std::size_t Build(std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t id = tree.size();
    tree.emplace_back();
    double positives = 0.0;
    for (std::size_t r : rows) positives += y[r];
    const double total = static_cast<double>(rows.size());
    tree[id].probability = positives / total;
    if (depth >= options.max_depth || rows.size() < options.min_samples_split ||
        positives == 0.0 || positives == total) {
      return id;
    }

    const std::size_t num_features = x[rows[0]].size();
    std::vector<std::size_t> candidates(num_features);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    // Partial Fisher-Yates for the first mtry features.
    for (std::size_t i = 0; i < mtry && i < num_features; ++i) {
      std::swap(candidates[i], candidates[i + rng.Below(num_features - i)]);
    }

    double best_impurity = Gini(positives, total);
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t c = 0; c < std::min(mtry, num_features); ++c) {
      const std::size_t f = candidates[c];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {x[rows[i]][f], y[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double left_n = static_cast<double>(i + 1);
        const double right_n = total - left_n;
        const double impurity =
            (left_n * Gini(left_pos, left_n) +
             right_n * Gini(positives - left_pos, right_n)) /
            total;
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (x[r][static_cast<std::size_t>(best_feature)] <= best_threshold
           ? left_rows
           : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree[id].feature = best_feature;
    tree[id].threshold = best_threshold;
    const std::size_t left = Build(left_rows, depth + 1);
    const std::size_t right = Build(right_rows, depth + 1);
    tree[id].left = left;
    tree[id].right = right;
    return id;
  }
};

}  // namespace

void RandomForest::Fit(const FeatureMatrix& features, std::span<const int> labels,
                       std::uint64_t seed, const ForestOptions& options) {
  if (features.empty() || features.size() != labels.size()) {
    throw Error("random forest needs aligned, non-empty training data");
  }
  num_features_ = features[0].size();
  for (const auto& row : features) {
    if (row.size() != num_features_) throw Error("ragged feature matrix");
  }
  const std::size_t mtry =
      options.features_per_split > 0
          ? options.features_per_split
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::lround(
                       std::sqrt(static_cast<double>(num_features_)))));
  trees_.clear();
  trees_.reserve(options.num_trees);
  Rng rng(seed);
  const std::size_t n = features.size();
  for (std::size_t t = 0; t < options.num_trees; ++t) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.Below(n);
    TreeBuilder builder{features, labels, options, mtry, rng, {}};
    if (num_features_ == 0) {
      builder.tree.emplace_back();
      double positives = 0.0;
      for (std::size_t r : rows) positives += labels[r];
      builder.tree[0].probability = positives / static_cast<double>(n);
    } else {
      builder.Build(rows, 0);
    }
    trees_.push_back(std::move(builder.tree));
  }
}

double RandomForest::PredictProbability(std::span<const double> x) const {
  if (trees_.empty()) throw Error("random forest is not trained");
  if (x.size() != num_features_) throw Error("feature vector length mismatch");
  double total = 0.0;
  for (const Tree& tree : trees_) {
    std::size_t node = 0;
    while (tree[node].feature >= 0) {
      node = x[static_cast<std::size_t>(tree[node].feature)] <= tree[node].threshold
                 ? tree[node].left
                 : tree[node].right;
    }
    total += tree[node].probability;
  }
  return total / static_cast<double>(trees_.size());
}

std::string RandomForest::Serialize() const {
  nlohmann::json doc;
  doc["num_features"] = num_features_;
  auto& trees = doc["trees"] = nlohmann::json::array();
  for (const Tree& tree : trees_) {
    auto nodes = nlohmann::json::array();
    for (const Node& n : tree) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.probability});
    }
    trees.push_back(std::move(nodes));
  }
  return doc.dump();
}

RandomForest RandomForest::Deserialize(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    RandomForest forest;
    forest.num_features_ = doc.at("num_features").get<std::size_t>();
    for (const auto& nodes : doc.at("trees")) {
      Tree tree;
      for (const auto& n : nodes) {
        tree.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                        n.at(2).get<std::size_t>(), n.at(3).get<std::size_t>(),
                        n.at(4).get<double>()});
      }
      forest.trees_.push_back(std::move(tree));
    }
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed forest: ") + e.what());
  }
}

}  // namespace beacon_recon
