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
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "beacon_recon/common.h"
#include "beacon_recon/phenotype.h"

namespace beacon_recon {
namespace {

constexpr std::string_view kSyntheticPrefix = "synthetic:";

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("invalid value '" + text + "' for synthetic key '" + key + "'");
  }
  return value;
}

std::vector<std::size_t> Range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v(end - begin);
  std::iota(v.begin(), v.end(), begin);
  return v;
}

}  // namespace

bool IsSyntheticSource(const std::string& source) {
  return source.rfind(kSyntheticPrefix, 0) == 0;
}

SyntheticSourceSpec ParseSyntheticSource(const std::string& source) {
  if (!IsSyntheticSource(source)) {
    throw Error("synthetic source must start with 'synthetic:'");
  }
  SyntheticSourceSpec spec;
  std::stringstream items(source.substr(kSyntheticPrefix.size()));
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error("synthetic spec item '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "donors") {
      spec.donors = ParseNumber<std::size_t>(key, value);
    } else if (key == "blocks") {
      spec.blocks = ParseNumber<std::size_t>(key, value);
    } else if (key == "block_size") {
      spec.block_size = ParseNumber<std::size_t>(key, value);
    } else if (key == "maf_min") {
      spec.maf_min = ParseNumber<double>(key, value);
    } else if (key == "maf_max") {
      spec.maf_max = ParseNumber<double>(key, value);
    } else if (key == "agreement") {
      spec.agreement = ParseNumber<double>(key, value);
    } else if (key == "traits") {
      spec.traits = ParseNumber<std::size_t>(key, value);
    } else {
      throw Error("unknown synthetic key '" + key + "'");
    }
  }
  if (spec.traits > spec.blocks) throw Error("more traits than blocks");
  return spec;
}

PopulationDataset GenerateFromSource(const SyntheticSourceSpec& spec,
                                     std::uint64_t seed) {
  SyntheticPopulationSpec gen;
  gen.num_donors = spec.donors;
  gen.block_sizes.assign(spec.blocks, spec.block_size);
  gen.per_block_maf.resize(spec.blocks);
  for (std::size_t b = 0; b < spec.blocks; ++b) {
    const double t = spec.blocks > 1
                         ? static_cast<double>(b) / static_cast<double>(spec.blocks - 1)
                         : 0.0;
    gen.per_block_maf[b] = spec.maf_min + t * (spec.maf_max - spec.maf_min);
  }
  gen.within_block_agreement = spec.agreement;
  PopulationDataset population = GenerateSyntheticPopulation(gen, seed);
  if (spec.traits == 0) return population;
  std::vector<std::size_t> leads;
  for (std::size_t b = 0; b < spec.traits; ++b) leads.push_back(b * spec.block_size);
  return population.WithPhenotypes(PlantSingleLocusTraits(population, leads));
}

PopulationDataset LoadPopulation(const std::string& source, std::uint64_t seed,
                                 const std::optional<std::string>& maf_path,
                                 const std::optional<std::string>& phenotype_path) {
  PopulationDataset population;
  if (IsSyntheticSource(source)) {
    population = GenerateFromSource(ParseSyntheticSource(source), seed);
  } else {
    std::ifstream matrix(source);
    if (!matrix) throw Error("cannot open population file '" + source + "'");
    if (maf_path) {
      std::ifstream mafs(*maf_path);
      if (!mafs) throw Error("cannot open maf file '" + *maf_path + "'");
      population = ParseGenotypeMatrix(matrix, &mafs);
    } else {
      population = ParseGenotypeMatrix(matrix);
    }
  }
  if (phenotype_path) {
    std::ifstream in(*phenotype_path);
    if (!in) throw Error("cannot open phenotype file '" + *phenotype_path + "'");
    population = population.WithPhenotypes(ParsePhenotypeTable(in));
  }
  return population;
}

PhenotypeTable PlantSingleLocusTraits(const PopulationDataset& dataset,
                                      std::span<const std::size_t> loci,
                                      const std::string& prefix) {
  PhenotypeTable table;
  for (const Genotype& g : dataset.genotypes()) {
    auto& traits = table[g.donor_id];
    for (std::size_t k = 0; k < loci.size(); ++k) {
      traits[prefix + std::to_string(k)] = HasMinorAllele(g.values.at(loci[k]));
    }
  }
  return table;
}

UpdateScenario SimulateUpdate(const PopulationDataset& population,
                              std::vector<std::size_t> base,
                              std::vector<std::size_t> newcomers,
                              std::vector<std::size_t> reference) {
  UpdateScenario scenario;
  const BeaconState before = BeaconState::FromDataset(population, base, 0);
  std::vector<Genotype> joining;
  joining.reserve(newcomers.size());
  for (std::size_t i : newcomers) joining.push_back(population.donor(i));
  const BeaconState after = before.Update(joining, {});
  scenario.before = before.TakeSnapshot();
  scenario.after = after.TakeSnapshot();
  scenario.flips =
      ComputeFlipSet(scenario.before, scenario.after, FlipDirection::kNoToYes);
  scenario.base = std::move(base);
  scenario.newcomers = std::move(newcomers);
  scenario.reference = std::move(reference);
  return scenario;
}

UpdateScenario RandomUpdate(const PopulationDataset& population, std::size_t n,
                            std::size_t m, std::uint64_t seed) {
  if (n + m + 1 > population.num_donors()) {
    throw Error("insufficient donors: need " + std::to_string(n + m + 1) +
                " (beacon, newcomers and at least one reference donor), have " +
                std::to_string(population.num_donors()));
  }
  std::vector<std::size_t> order = Range(0, population.num_donors());
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<std::size_t> base(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> newcomers(order.begin() + static_cast<std::ptrdiff_t>(n),
                                     order.begin() + static_cast<std::ptrdiff_t>(n + m));
  std::vector<std::size_t> reference(order.begin() + static_cast<std::ptrdiff_t>(n + m),
                                     order.end());
  std::sort(reference.begin(), reference.end());
  return SimulateUpdate(population, std::move(base), std::move(newcomers),
                        std::move(reference));
}

ReconstructionResult RunAttack(const PopulationDataset& population,
                               const UpdateScenario& scenario,
                               const AttackOptions& options, std::uint64_t seed) {
  const std::vector<double> mafs = population.Mafs();
  const FlipSet& flips = scenario.flips;
  ReconstructionResult result;
  if (options.kind == AttackKind::kBaseline) {
    result = BaselineReconstruct(flips, mafs, options.m_prime, seed);
  } else {
    const PopulationDataset reference = population.Subset(scenario.reference);
    CorrelationOptions corr;
    corr.allow_overlap = options.allow_reference_overlap;
    if (options.correlation_cache) corr.cache_path = *options.correlation_cache;
    for (std::size_t i : scenario.base) corr.excluded_donors.push_back(population.donor(i).donor_id);
    for (std::size_t i : scenario.newcomers) corr.excluded_donors.push_back(population.donor(i).donor_id);
    const CorrelationModel model = BuildCorrelationModel(reference, flips.loci, corr);
    if (options.kind == AttackKind::kGreedy) {
      result = GreedyReconstruct(flips, model, mafs, options.m_prime, seed,
                                 options.greedy);
    } else {
      const std::size_t clusters = std::min(options.m_prime, flips.loci.size());
      if (clusters == 0) {
        result.bins.assign(options.m_prime, {});
      } else {
        const SnpGraph graph = BuildSnpGraph(flips, model, options.graph);
        if (options.kind == AttackKind::kSpectral) {
          result = SpectralReconstruct(graph, clusters, seed, options.spectral);
        } else {
          FuzzyOptions fuzzy = options.fuzzy;
          if (fuzzy.threshold <= 0.0) {
            fuzzy.threshold = 1.0 / static_cast<double>(options.m_prime);
          }
          result = FuzzyReconstruct(graph, clusters, seed, fuzzy);
        }
        result.bins.resize(options.m_prime);
      }
    }
  }
  result.parameters.kind = options.kind;
  result.parameters.m = scenario.newcomers.size();
  result.parameters.m_prime = options.m_prime;
  result.parameters.tau = options.kind == AttackKind::kGreedy ? options.greedy.tau : 0.0;
  result.parameters.seed = seed;
  return result;
}

std::vector<std::uint8_t> TruthOver(const Genotype& donor,
                                    std::span<const std::size_t> universe) {
  std::vector<std::uint8_t> bits(universe.size());
  for (std::size_t u = 0; u < universe.size(); ++u) {
    bits[u] = HasMinorAllele(donor.values.at(universe[u]));
  }
  return bits;
}

std::size_t OracleIdentify(const ReconstructionResult& result,
                           const Genotype& donor,
                           std::span<const std::size_t> universe) {
  if (result.bins.empty()) throw Error("no bins to identify");
  const auto truth = TruthOver(donor, universe);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t b = 0; b < result.bins.size(); ++b) {
    const auto predicted = result.BinIndicator(b, universe);
    std::size_t both = 0, either = 0;
    for (std::size_t u = 0; u < universe.size(); ++u) {
      both += truth[u] && predicted[u];
      either += truth[u] || predicted[u];
    }
    const double jaccard =
        either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
    if (jaccard > best_score) {
      best_score = jaccard;
      best = b;
    }
  }
  return best;
}

PlantedScenario MakePlantedScenario(const PlantedScenarioSpec& spec,
                                    std::uint64_t seed) {
  if (spec.newcomers == 0) throw Error("planted scenario needs newcomers");
  if (spec.min_block_size == 0 || spec.min_block_size > spec.max_block_size) {
    throw Error("invalid planted block size range");
  }
  Rng rng(seed);
  SyntheticPopulationSpec gen;
  gen.within_block_agreement = spec.agreement;
  std::vector<std::size_t> block_start;
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < spec.newcomers; ++b) {
    const std::size_t size =
        spec.min_block_size + rng.Below(spec.max_block_size - spec.min_block_size + 1);
    block_start.push_back(cursor);
    gen.block_sizes.push_back(size);
    gen.per_block_maf.push_back(spec.planted_maf);
    cursor += size;
  }
  for (std::size_t b = 0; b < spec.background_blocks; ++b) {
    gen.block_sizes.push_back(spec.background_block_size);
    gen.per_block_maf.push_back(spec.background_maf);
  }

  gen.num_donors = spec.reference_donors;
  gen.donor_prefix = "r";
  const PopulationDataset reference = GenerateSyntheticPopulation(gen, rng.Fork());

  SyntheticPopulationSpec absent = gen;
  for (std::size_t b = 0; b < spec.newcomers; ++b) absent.per_block_maf[b] = 0.0;
  absent.num_donors = spec.base_members;
  absent.donor_prefix = "b";
  const PopulationDataset base = GenerateSyntheticPopulation(absent, rng.Fork());
  absent.num_donors = spec.newcomers;
  absent.donor_prefix = "n";
  const PopulationDataset joining = GenerateSyntheticPopulation(absent, rng.Fork());

  const double maf = spec.planted_maf;
  const double carrier = 1.0 - (1.0 - maf) * (1.0 - maf);
  std::vector<Genotype> rows = base.genotypes();
  PlantedScenario out;
  for (std::size_t i = 0; i < spec.newcomers; ++i) {
    Genotype g = joining.donor(i);
    std::vector<std::size_t> block;
    for (std::size_t j = block_start[i]; j < block_start[i] + gen.block_sizes[i]; ++j) {
      const bool present = rng.Bernoulli(spec.agreement) || rng.Bernoulli(carrier);
      g.values[j] = present ? (rng.Bernoulli(maf * maf / carrier) ? 2 : 1) : 0;
      block.push_back(j);
    }
    out.newcomer_blocks.push_back(std::move(block));
    rows.push_back(std::move(g));
  }
  rows.insert(rows.end(), reference.genotypes().begin(), reference.genotypes().end());
  PopulationDataset population(reference.panel(), std::move(rows));

  if (spec.traits_per_block > 0) {
    std::vector<std::size_t> loci;
    for (std::size_t b = 0; b < spec.newcomers; ++b) {
      for (std::size_t t = 0; t < std::min(spec.traits_per_block, gen.block_sizes[b]); ++t) {
        loci.push_back(block_start[b] + t);
      }
    }
    PhenotypeTable table = PlantSingleLocusTraits(population, loci);
    for (std::size_t k = 0; k < loci.size(); ++k) {
      out.traits.push_back("trait" + std::to_string(k));
    }
    population = population.WithPhenotypes(std::move(table));
  }

  const std::size_t n = spec.base_members;
  const std::size_t m = spec.newcomers;
  out.update = SimulateUpdate(population, Range(0, n), Range(n, n + m),
                              Range(n + m, population.num_donors()));
  out.population = std::move(population);
  return out;
}

}  // namespace beacon_recon
