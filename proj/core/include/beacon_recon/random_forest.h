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

// Random forest for binary classification: bootstrap-sampled CART trees with
// Gini splits over a random feature subset at every node.

#ifndef BEACON_RECON_RANDOM_FOREST_H_
#define BEACON_RECON_RANDOM_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace beacon_recon {

using FeatureMatrix = std::vector<std::vector<double>>;

struct ForestOptions {
  std::size_t num_trees = 50;
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  // 0 selects round(sqrt(feature count)).
  std::size_t features_per_split = 0;
};

class RandomForest {
 public:
  struct Node {
    // Internal when feature >= 0: go left iff x[feature] <= threshold.
    int feature = -1;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double probability = 0.0;  // P(label 1) at leaves
  };
  using Tree = std::vector<Node>;

  RandomForest() = default;

  void Fit(const FeatureMatrix& features, std::span<const int> labels,
           std::uint64_t seed, const ForestOptions& options = {});

  // Mean leaf probability of label 1 across trees.
  double PredictProbability(std::span<const double> x) const;
  int Predict(std::span<const double> x) const {
    return PredictProbability(x) >= 0.5 ? 1 : 0;
  }

  std::size_t num_features() const { return num_features_; }
  const std::vector<Tree>& trees() const { return trees_; }

  std::string Serialize() const;
  static RandomForest Deserialize(const std::string& text);

 private:
  std::size_t num_features_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace beacon_recon

#endif  // BEACON_RECON_RANDOM_FOREST_H_
