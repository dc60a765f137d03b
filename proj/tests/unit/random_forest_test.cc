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

#include <gtest/gtest.h>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

struct Data {
  FeatureMatrix x;
  std::vector<int> y;
};

// Label = feature 2, other features noise.
Data OneBitRule(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(6);
    for (auto& v : row) v = rng.Bernoulli(0.5) ? 1.0 : 0.0;
    d.x.push_back(row);
    d.y.push_back(static_cast<int>(row[2]));
  }
  return d;
}

TEST(RandomForestTest, LearnsSingleFeatureRule) {
  const Data train = OneBitRule(200, 1);
  RandomForest forest;
  forest.Fit(train.x, train.y, 3);
  EXPECT_EQ(forest.num_features(), 6u);
  EXPECT_EQ(forest.trees().size(), 50u);
  const Data test = OneBitRule(100, 2);
  for (std::size_t i = 0; i < test.x.size(); ++i) {
    EXPECT_EQ(forest.Predict(test.x[i]), test.y[i]);
  }
}

TEST(RandomForestTest, ProbabilitiesInUnitInterval) {
  Rng rng(4);
  Data d;
  for (int i = 0; i < 80; ++i) {
    d.x.push_back({rng.Uniform(), rng.Uniform()});
    d.y.push_back(rng.Bernoulli(0.5));
  }
  RandomForest forest;
  ForestOptions options;
  options.num_trees = 7;
  forest.Fit(d.x, d.y, 5, options);
  for (const auto& row : d.x) {
    const double p = forest.PredictProbability(row);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(RandomForestTest, DeterministicAndSerializable) {
  const Data d = OneBitRule(60, 8);
  RandomForest a, b;
  a.Fit(d.x, d.y, 11);
  b.Fit(d.x, d.y, 11);
  EXPECT_EQ(a.Serialize(), b.Serialize());
  const RandomForest c = RandomForest::Deserialize(a.Serialize());
  EXPECT_EQ(c.Serialize(), a.Serialize());
  for (const auto& row : d.x) {
    EXPECT_DOUBLE_EQ(c.PredictProbability(row), a.PredictProbability(row));
  }
  EXPECT_THROW(RandomForest::Deserialize("not json"), Error);
}

TEST(RandomForestTest, ConstantLabelsGiveConstantPrediction) {
  FeatureMatrix x{{0.0}, {1.0}, {0.5}};
  const std::vector<int> y{1, 1, 1};
  RandomForest forest;
  forest.Fit(x, y, 1);
  EXPECT_DOUBLE_EQ(forest.PredictProbability(std::vector<double>{0.2}), 1.0);
}

TEST(RandomForestTest, RejectsBadInput) {
  RandomForest forest;
  const std::vector<int> y{0, 1};
  EXPECT_THROW(forest.Fit({}, {}, 1), Error);
  EXPECT_THROW(forest.Fit({{0.0}}, y, 1), Error);
  EXPECT_THROW(forest.Fit({{0.0}, {1.0, 2.0}}, y, 1), Error);
  forest.Fit({{0.0}, {1.0}}, y, 1);
  EXPECT_THROW(forest.PredictProbability(std::vector<double>{0.0, 1.0}), Error);
}

}  // namespace
}  // namespace beacon_recon
