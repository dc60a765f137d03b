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

#include "beacon_recon/correlation.h"

#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

using Bits = std::vector<std::uint8_t>;

// Columns of minor-presence bits become a reference dataset (1 -> genotype 1).
PopulationDataset FromColumns(const std::vector<Bits>& columns) {
  std::vector<SnpDef> panel;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    panel.push_back({"s" + std::to_string(j), "1", j + 1, 0.1});
  }
  std::vector<Genotype> rows;
  const std::size_t donors = columns.empty() ? 0 : columns[0].size();
  for (std::size_t i = 0; i < donors; ++i) {
    Genotype g{"r" + std::to_string(i), {}};
    for (const Bits& c : columns) g.values.push_back(static_cast<std::int8_t>(c[i]));
    rows.push_back(std::move(g));
  }
  return PopulationDataset(std::move(panel), std::move(rows));
}

TEST(SokalMichenerTest, Examples) {
  EXPECT_DOUBLE_EQ(SokalMichener(Bits{1, 0, 1, 0}, Bits{1, 1, 1, 0}), 0.75);
  EXPECT_DOUBLE_EQ(SokalMichener(Bits{1, 0, 1}, Bits{1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(SokalMichener(Bits{1, 0, 1}, Bits{0, 1, 0}), 0.0);
  EXPECT_THROW(SokalMichener(Bits{1}, Bits{1, 0}), Error);
  EXPECT_THROW(SokalMichener(Bits{}, Bits{}), Error);
}

TEST(SokalMichenerTest, SymmetricReflexivePermutationInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.Below(70);
    Bits u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.Bernoulli(0.4);
      v[i] = rng.Bernoulli(0.4);
    }
    const double s = SokalMichener(u, v);
    EXPECT_DOUBLE_EQ(s, SokalMichener(v, u));
    EXPECT_DOUBLE_EQ(SokalMichener(u, u), 1.0);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < n; ++i) matches += u[i] == v[i];
    EXPECT_DOUBLE_EQ(s, static_cast<double>(matches) / static_cast<double>(n));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.Shuffle(perm);
    Bits pu(n), pv(n);
    for (std::size_t i = 0; i < n; ++i) {
      pu[i] = u[perm[i]];
      pv[i] = v[perm[i]];
    }
    EXPECT_DOUBLE_EQ(SokalMichener(pu, pv), s);
  }
}

TEST(BuildCorrelationModelTest, HandCountedPairs) {
  const auto ref = FromColumns({{1, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 0}});
  const std::vector<std::size_t> loci{0, 1, 2, 3};
  const CorrelationModel model = BuildCorrelationModel(ref, loci);
  EXPECT_NEAR(model.Similarity(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(model.Similarity(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(model.Similarity(0, 3), 0.0);
  for (std::size_t a : loci) {
    EXPECT_DOUBLE_EQ(model.Similarity(a, a), 1.0);
    for (std::size_t b : loci) {
      EXPECT_DOUBLE_EQ(model.Similarity(a, b), model.Similarity(b, a));
    }
  }
  EXPECT_THROW(model.Similarity(0, 9), Error);
}

TEST(BuildCorrelationModelTest, OneDonorReferenceGivesBinaryEntries) {
  const auto ref = FromColumns({{1}, {0}, {1}, {0}, {0}});
  const std::vector<std::size_t> loci{0, 1, 2, 3, 4};
  const CorrelationModel model = BuildCorrelationModel(ref, loci);
  for (std::size_t a : loci) {
    for (std::size_t b : loci) {
      const double s = model.Similarity(a, b);
      EXPECT_TRUE(s == 0.0 || s == 1.0);
    }
  }
}

TEST(BuildCorrelationModelTest, MatchesDirectSimilarityOnRandomReference) {
  Rng rng(8);
  std::vector<Bits> columns(9, Bits(150));
  for (auto& c : columns) {
    for (auto& b : c) b = rng.Bernoulli(0.3);
  }
  const auto ref = FromColumns(columns);
  const std::vector<std::size_t> loci{8, 0, 3, 5};
  const CorrelationModel model = BuildCorrelationModel(ref, loci);
  for (std::size_t a : loci) {
    for (std::size_t b : loci) {
      EXPECT_DOUBLE_EQ(model.Similarity(a, b), SokalMichener(columns[a], columns[b]));
    }
  }
}

TEST(BuildCorrelationModelTest, RejectsEmptyAndOverlappingReferences) {
  const auto ref = FromColumns({{1, 0}, {0, 1}});
  const std::vector<std::size_t> loci{0, 1};
  EXPECT_THROW(BuildCorrelationModel(ref.Subset({}), loci), Error);
  CorrelationOptions options;
  options.excluded_donors = {"r1"};
  EXPECT_THROW(BuildCorrelationModel(ref, loci, options), Error);
  options.allow_overlap = true;
  EXPECT_NO_THROW(BuildCorrelationModel(ref, loci, options));
}

TEST(MarkovTransitionTest, Examples) {
  // Bit at locus 0 = 1 is always followed by bit 1 at locus 1.
  const auto ref = FromColumns({{1, 1, 0, 0}, {1, 1, 0, 1}, {0, 0, 0, 0}});
  EXPECT_DOUBLE_EQ(MarkovTransition(ref, 1, Bits{1}, 1), 1.0);
  EXPECT_DOUBLE_EQ(MarkovTransition(ref, 1, Bits{0}, 1), 0.5);
  // Locus 2 is always 0.
  EXPECT_DOUBLE_EQ(MarkovTransition(ref, 2, Bits{1}, 0), 1.0);
  EXPECT_DOUBLE_EQ(MarkovTransition(ref, 2, Bits{1}, 1), 0.0);
  EXPECT_DOUBLE_EQ(MarkovTransition(ref, 1, Bits{}, 1), 0.75);
  EXPECT_THROW(MarkovTransition(ref, 0, Bits{1}, 1), Error);
  EXPECT_THROW(MarkovTransition(ref, 7, Bits{}, 1), Error);
}

TEST(MarkovTransitionTest, MatchesBruteForceCounting) {
  Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t donors = 1 + rng.Below(8);
    const std::size_t loci = 1 + rng.Below(6);
    std::vector<Bits> columns(loci, Bits(donors));
    for (auto& c : columns) {
      for (auto& b : c) b = rng.Bernoulli(0.5);
    }
    const auto ref = FromColumns(columns);
    for (std::size_t j = 0; j < loci; ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        for (unsigned pattern = 0; pattern < (1u << (k + 1)); ++pattern) {
          Bits context(k);
          for (std::size_t c = 0; c < k; ++c) context[c] = (pattern >> c) & 1u;
          const std::uint8_t outcome = (pattern >> k) & 1u;
          std::size_t with_context = 0, with_sequence = 0;
          for (std::size_t i = 0; i < donors; ++i) {
            bool match = true;
            for (std::size_t c = 0; c < k; ++c) {
              match = match && columns[j - k + c][i] == context[c];
            }
            with_context += match;
            with_sequence += match && columns[j][i] == outcome;
          }
          const double expected =
              with_context == 0 ? 0.0
                                : static_cast<double>(with_sequence) /
                                      static_cast<double>(with_context);
          const double got = MarkovTransition(ref, j, context, outcome);
          ASSERT_DOUBLE_EQ(got, expected);
          ASSERT_GE(got, 0.0);
          ASSERT_LE(got, 1.0);
        }
      }
    }
  }
}

TEST(CorrelationModelTest, FirstOrderTableMatchesMarkovTransition) {
  Rng rng(4);
  std::vector<Bits> columns(6, Bits(40));
  for (auto& c : columns) {
    for (auto& b : c) b = rng.Bernoulli(0.35);
  }
  const auto ref = FromColumns(columns);
  const std::vector<std::size_t> loci{0, 2, 3, 5};
  const CorrelationModel model = BuildCorrelationModel(ref, loci);
  EXPECT_EQ(model.markov_order(), 1);
  for (std::size_t l : loci) {
    for (std::uint8_t ctx : {0, 1}) {
      double row = 0.0;
      for (std::uint8_t out : {0, 1}) {
        const double expected = l == 0 ? MarkovTransition(ref, 0, Bits{}, out)
                                       : MarkovTransition(ref, l, Bits{ctx}, out);
        EXPECT_DOUBLE_EQ(model.Transition(l, ctx, out), expected);
        row += model.Transition(l, ctx, out);
      }
      EXPECT_TRUE(row == 0.0 || std::abs(row - 1.0) < 1e-12);
    }
  }
}

TEST(CorrelationModelTest, CacheRoundTripAndKeying) {
  Rng rng(6);
  std::vector<Bits> columns(5, Bits(30));
  for (auto& c : columns) {
    for (auto& b : c) b = rng.Bernoulli(0.4);
  }
  const auto ref = FromColumns(columns);
  const std::vector<std::size_t> loci{1, 2, 4};
  const auto path = std::filesystem::temp_directory_path() /
                    ("corr_cache_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + ".bin");
  std::filesystem::remove(path);
  CorrelationOptions options;
  options.cache_path = path;
  const CorrelationModel built = BuildCorrelationModel(ref, loci, options);
  ASSERT_TRUE(std::filesystem::exists(path));
  const auto loaded = CorrelationModel::Load(path, built.reference_hash(), loci);
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->loci(), built.loci());
  for (std::size_t a : loci) {
    for (std::size_t b : loci) {
      EXPECT_DOUBLE_EQ(loaded->Similarity(a, b), built.Similarity(a, b));
    }
  }
  const std::vector<std::size_t> other{1, 2};
  EXPECT_FALSE(CorrelationModel::Load(path, built.reference_hash(), other).has_value());
  EXPECT_FALSE(CorrelationModel::Load(path, built.reference_hash() + 1, loci).has_value());
  const CorrelationModel again = BuildCorrelationModel(ref, loci, options);
  EXPECT_DOUBLE_EQ(again.Similarity(1, 4), built.Similarity(1, 4));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace beacon_recon
