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

// Simulation scaffolding shared by the experiment harness, the CLI and the
// acceptance suite: population sources, beacon update scenarios, attack
// dispatch and oracle victim identification.

#ifndef BEACON_RECON_SCENARIO_H_
#define BEACON_RECON_SCENARIO_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beacon_recon/beacon.h"
#include "beacon_recon/correlation.h"
#include "beacon_recon/genotype.h"
#include "beacon_recon/reconstruction.h"

namespace beacon_recon {

// Parsed form of "synthetic:donors=3000,blocks=200,block_size=5,
// maf_min=0.002,maf_max=0.05,agreement=0.9,traits=0". Block MAFs step
// linearly from maf_min to maf_max. traits=T plants T binary traits, trait k
// being the minor-presence bit of the lead SNP of block k.
struct SyntheticSourceSpec {
  std::size_t donors = 3000;
  std::size_t blocks = 200;
  std::size_t block_size = 5;
  double maf_min = 0.002;
  double maf_max = 0.05;
  double agreement = 0.9;
  std::size_t traits = 0;
};

SyntheticSourceSpec ParseSyntheticSource(const std::string& source);
bool IsSyntheticSource(const std::string& source);
PopulationDataset GenerateFromSource(const SyntheticSourceSpec& spec,
                                     std::uint64_t seed);

// Reads a genotype matrix file, or generates a synthetic population when
// `source` starts with "synthetic:". Optional sidecars supply MAFs and
// phenotypes.
PopulationDataset LoadPopulation(const std::string& source, std::uint64_t seed,
                                 const std::optional<std::string>& maf_path = {},
                                 const std::optional<std::string>& phenotype_path = {});

// Trait "<prefix><k>" equals the minor-presence bit at loci[k] for every donor.
PhenotypeTable PlantSingleLocusTraits(const PopulationDataset& dataset,
                                      std::span<const std::size_t> loci,
                                      const std::string& prefix = "trait");

// One beacon update: base members at time t, newcomers joining before t+delta,
// and the attacker's reference panel (disjoint from both).
struct UpdateScenario {
  std::vector<std::size_t> base;
  std::vector<std::size_t> newcomers;
  std::vector<std::size_t> reference;
  Snapshot before;
  Snapshot after;
  FlipSet flips;
};

// Applies the update to a beacon of `base` donors and extracts the no->yes
// flip set.
UpdateScenario SimulateUpdate(const PopulationDataset& population,
                              std::vector<std::size_t> base,
                              std::vector<std::size_t> newcomers,
                              std::vector<std::size_t> reference);

// Random split of the population into n base members, m newcomers and the
// remaining donors as reference.
UpdateScenario RandomUpdate(const PopulationDataset& population, std::size_t n,
                            std::size_t m, std::uint64_t seed);

struct AttackOptions {
  AttackKind kind = AttackKind::kSpectral;
  std::size_t m_prime = 1;
  GreedyOptions greedy;
  FuzzyOptions fuzzy;
  SpectralOptions spectral;
  SnpGraphOptions graph;
  bool allow_reference_overlap = false;
  std::optional<std::string> correlation_cache;
};

// Runs one reconstruction attack on the scenario's flip set. When the flip
// set has fewer loci than m', clustering runs with one bin per locus and the
// remaining bins stay empty.
ReconstructionResult RunAttack(const PopulationDataset& population,
                               const UpdateScenario& scenario,
                               const AttackOptions& options, std::uint64_t seed);

// Minor-presence bits of one donor over an ordered locus universe.
std::vector<std::uint8_t> TruthOver(const Genotype& donor,
                                    std::span<const std::size_t> universe);

// Bin with the highest Jaccard overlap with the donor's flip-set minor
// alleles; lowest index on ties.
std::size_t OracleIdentify(const ReconstructionResult& result,
                           const Genotype& donor,
                           std::span<const std::size_t> universe);

// Planted structure: each newcomer privately carries one correlation block
// that is absent from the base beacon, blocks are mutually independent in the
// reference, and background blocks are common enough to be answered yes
// before the update.
struct PlantedScenarioSpec {
  std::size_t newcomers = 3;
  std::size_t base_members = 50;
  std::size_t reference_donors = 1000;
  std::size_t min_block_size = 2;
  std::size_t max_block_size = 4;
  std::size_t background_blocks = 10;
  std::size_t background_block_size = 4;
  double planted_maf = 0.1;
  double background_maf = 0.3;
  double agreement = 1.0;
  // Traits per planted block, on its first SNPs.
  std::size_t traits_per_block = 0;
};

struct PlantedScenario {
  PopulationDataset population;
  UpdateScenario update;
  std::vector<std::vector<std::size_t>> newcomer_blocks;  // planted loci
  std::vector<std::string> traits;
};

PlantedScenario MakePlantedScenario(const PlantedScenarioSpec& spec,
                                    std::uint64_t seed);

}  // namespace beacon_recon

#endif  // BEACON_RECON_SCENARIO_H_
