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

#include "beacon_recon/scenario.h"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

constexpr char kSmallSource[] =
    "synthetic:donors=300,blocks=20,block_size=3,maf_min=0.01,maf_max=0.1,"
    "agreement=0.9,traits=2";

TEST(SyntheticSourceTest, ParsesKeys) {
  const SyntheticSourceSpec s = ParseSyntheticSource(kSmallSource);
  EXPECT_EQ(s.donors, 300u);
  EXPECT_EQ(s.blocks, 20u);
  EXPECT_EQ(s.block_size, 3u);
  EXPECT_DOUBLE_EQ(s.maf_min, 0.01);
  EXPECT_DOUBLE_EQ(s.agreement, 0.9);
  EXPECT_EQ(s.traits, 2u);
  EXPECT_TRUE(IsSyntheticSource(kSmallSource));
  EXPECT_FALSE(IsSyntheticSource("data/pop.tsv"));
  const SyntheticSourceSpec defaults = ParseSyntheticSource("synthetic:");
  EXPECT_EQ(defaults.donors, 3000u);
}

TEST(SyntheticSourceTest, RejectsMalformedSpecs) {
  EXPECT_THROW(ParseSyntheticSource("synthetic:color=red"), Error);
  EXPECT_THROW(ParseSyntheticSource("synthetic:donors"), Error);
  EXPECT_THROW(ParseSyntheticSource("synthetic:donors=many"), Error);
  EXPECT_THROW(ParseSyntheticSource("synthetic:blocks=2,traits=3"), Error);
  EXPECT_THROW(ParseSyntheticSource("pop.tsv"), Error);
}

TEST(LoadPopulationTest, SyntheticIsDeterministicWithTraits) {
  const PopulationDataset a = LoadPopulation(kSmallSource, 3);
  const PopulationDataset b = LoadPopulation(kSmallSource, 3);
  EXPECT_EQ(a.num_donors(), 300u);
  EXPECT_EQ(a.num_snps(), 60u);
  EXPECT_EQ(a.Fingerprint(), b.Fingerprint());
  EXPECT_NE(a.Fingerprint(), LoadPopulation(kSmallSource, 4).Fingerprint());
  const Genotype& d = a.donor(17);
  const auto& p = a.phenotypes().at(d.donor_id);
  EXPECT_EQ(p.at("trait0"), HasMinorAllele(d.values[0]));
  EXPECT_EQ(p.at("trait1"), HasMinorAllele(d.values[3]));
  EXPECT_THROW(LoadPopulation("/nonexistent/pop.tsv", 1), Error);
}

TEST(PlantSingleLocusTraitsTest, TraitEqualsPresenceBit) {
  const PopulationDataset d = LoadPopulation(kSmallSource, 5);
  const std::vector<std::size_t> loci{4, 9};
  const PhenotypeTable t = PlantSingleLocusTraits(d, loci, "x");
  ASSERT_EQ(t.size(), d.num_donors());
  for (const Genotype& g : d.genotypes()) {
    EXPECT_EQ(t.at(g.donor_id).at("x0"), HasMinorAllele(g.values[4]));
    EXPECT_EQ(t.at(g.donor_id).at("x1"), HasMinorAllele(g.values[9]));
  }
}

TEST(RandomUpdateTest, RolesAreDisjointAndCoverPopulation) {
  const PopulationDataset d = LoadPopulation(kSmallSource, 5);
  const UpdateScenario u = RandomUpdate(d, 50, 4, 8);
  EXPECT_EQ(u.base.size(), 50u);
  EXPECT_EQ(u.newcomers.size(), 4u);
  EXPECT_EQ(u.reference.size(), 246u);
  EXPECT_TRUE(std::is_sorted(u.reference.begin(), u.reference.end()));
  std::set<std::size_t> all(u.base.begin(), u.base.end());
  all.insert(u.newcomers.begin(), u.newcomers.end());
  all.insert(u.reference.begin(), u.reference.end());
  EXPECT_EQ(all.size(), 300u);
  EXPECT_EQ(u.after.version, u.before.version + 1);
  EXPECT_THROW(RandomUpdate(d, 296, 4, 1), Error);
  EXPECT_NO_THROW(RandomUpdate(d, 295, 4, 1));
}

TEST(RandomUpdateTest, FlipsAreNewcomerMinorAllelesAbsentFromBase) {
  const PopulationDataset d = LoadPopulation(kSmallSource, 6);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const UpdateScenario u = RandomUpdate(d, 20, 2, seed);
    std::vector<std::size_t> expected;
    for (std::size_t j = 0; j < d.num_snps(); ++j) {
      bool in_base = false;
      for (std::size_t i : u.base) in_base |= HasMinorAllele(d.donor(i).values[j]);
      bool in_new = false;
      for (std::size_t i : u.newcomers) in_new |= HasMinorAllele(d.donor(i).values[j]);
      if (!in_base && in_new) expected.push_back(j);
    }
    EXPECT_EQ(u.flips.loci, expected);
  }
}

TEST(RandomUpdateTest, SingleNewcomerFlipsBelongToVictim) {
  const PopulationDataset d = LoadPopulation(kSmallSource, 7);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const UpdateScenario u = RandomUpdate(d, 30, 1, seed);
    const Genotype& victim = d.donor(u.newcomers[0]);
    for (std::size_t l : u.flips.loci) EXPECT_TRUE(HasMinorAllele(victim.values[l]));
  }
}

TEST(PlantedScenarioTest, FlipsArePlantedBlocksAtFullAgreement) {
  PlantedScenarioSpec spec;
  spec.traits_per_block = 2;
  const PlantedScenario p = MakePlantedScenario(spec, 11);
  ASSERT_EQ(p.newcomer_blocks.size(), 3u);
  std::vector<std::size_t> planted;
  for (const auto& block : p.newcomer_blocks) {
    EXPECT_GE(block.size(), spec.min_block_size);
    EXPECT_LE(block.size(), spec.max_block_size);
    planted.insert(planted.end(), block.begin(), block.end());
  }
  std::sort(planted.begin(), planted.end());
  EXPECT_EQ(p.update.flips.loci, planted);
  for (std::size_t i = 0; i < 3; ++i) {
    const Genotype& g = p.population.donor(p.update.newcomers[i]);
    for (std::size_t l : p.newcomer_blocks[i]) EXPECT_TRUE(HasMinorAllele(g.values[l]));
  }
  EXPECT_EQ(p.traits.size(), 6u);
  EXPECT_EQ(p.update.base.size(), spec.base_members);
  EXPECT_EQ(p.update.reference.size(), spec.reference_donors);
}

TEST(PlantedScenarioTest, Errors) {
  PlantedScenarioSpec spec;
  spec.newcomers = 0;
  EXPECT_THROW(MakePlantedScenario(spec, 1), Error);
  spec.newcomers = 2;
  spec.min_block_size = 5;
  spec.max_block_size = 3;
  EXPECT_THROW(MakePlantedScenario(spec, 1), Error);
}

TEST(OracleIdentifyTest, MaximumJaccardWithLowestIndexTies) {
  Genotype victim{"v", {1, 1, 0, 0, 2, 0}};
  const std::vector<std::size_t> universe{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(TruthOver(victim, universe),
            (std::vector<std::uint8_t>{1, 1, 0, 0, 1, 0}));
  ReconstructionResult r;
  r.bins = {{2, 3}, {0, 1, 2}, {0, 1, 4}};
  EXPECT_EQ(OracleIdentify(r, victim, universe), 2u);
  r.bins = {{0}, {1}, {}};
  EXPECT_EQ(OracleIdentify(r, victim, universe), 0u);
  r.bins.clear();
  EXPECT_THROW(OracleIdentify(r, victim, universe), Error);
}

TEST(RunAttackTest, FewerFlipsThanBinsYieldsRequestedBinCount) {
  PlantedScenarioSpec spec;
  spec.newcomers = 1;
  spec.min_block_size = 2;
  spec.max_block_size = 2;
  const PlantedScenario p = MakePlantedScenario(spec, 3);
  ASSERT_EQ(p.update.flips.beta(), 2u);
  for (AttackKind kind : {AttackKind::kBaseline, AttackKind::kGreedy,
                          AttackKind::kSpectral, AttackKind::kFuzzy}) {
    AttackOptions options;
    options.kind = kind;
    options.m_prime = 4;
    const ReconstructionResult r = RunAttack(p.population, p.update, options, 9);
    EXPECT_EQ(r.bins.size(), 4u) << AttackName(kind);
    EXPECT_TRUE(CoversFlipSet(r, p.update.flips)) << AttackName(kind);
    EXPECT_EQ(r.parameters.kind, kind);
    EXPECT_EQ(r.parameters.m, 1u);
  }
}

TEST(RunAttackTest, SpectralRecoversPlantedBlocks) {
  const PlantedScenario p = MakePlantedScenario({}, 21);
  AttackOptions options;
  options.m_prime = 3;
  const ReconstructionResult r = RunAttack(p.population, p.update, options, 1);
  std::set<std::vector<std::size_t>> got(r.bins.begin(), r.bins.end());
  std::set<std::vector<std::size_t>> want(p.newcomer_blocks.begin(),
                                          p.newcomer_blocks.end());
  EXPECT_EQ(got, want);
}

}  // namespace
}  // namespace beacon_recon
