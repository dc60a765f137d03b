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

// Genotype data model: SNP panels, per-donor genotype rows, minor-presence
// bits, TSV ingestion and a synthetic population generator with planted
// correlation blocks.

#ifndef BEACON_RECON_GENOTYPE_H_
#define BEACON_RECON_GENOTYPE_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace beacon_recon {

// Genotype value encoding: number of minor alleles, or kMissing.
inline constexpr std::int8_t kMissing = -1;

struct SnpDef {
  std::string id;
  std::string chromosome;
  std::uint64_t position = 0;
  double maf = 0.0;  // in [0, 0.5]

  friend bool operator==(const SnpDef&, const SnpDef&) = default;
};

struct Genotype {
  std::string donor_id;
  std::vector<std::int8_t> values;  // aligned to the panel

  friend bool operator==(const Genotype&, const Genotype&) = default;
};

// One bit per panel locus: 1 iff the genotype carries at least one minor
// allele there. Missing calls map to 0.
using MinorPresenceVector = std::vector<std::uint8_t>;

// donor id -> trait name -> 0/1. Unreported traits are absent.
using PhenotypeTable = std::map<std::string, std::map<std::string, int>>;

inline bool HasMinorAllele(std::int8_t value) {
  return value == 1 || value == 2;
}

MinorPresenceVector MinorPresence(const Genotype& genotype);

// Orders chromosome labels numerically when both are integers ("2" < "10"),
// lexicographically otherwise, with numeric labels first.
bool ChromosomeLess(const std::string& a, const std::string& b);

// Immutable after construction. All genotypes share one panel, donor ids are
// unique, and the panel is ordered by (chromosome, position).
class PopulationDataset {
 public:
  PopulationDataset() = default;
  // Validates alignment, donor-id uniqueness, panel id uniqueness, MAF range
  // and panel ordering; throws Error on violation.
  PopulationDataset(std::vector<SnpDef> panel, std::vector<Genotype> genotypes,
                    PhenotypeTable phenotypes = {});

  const std::vector<SnpDef>& panel() const { return panel_; }
  const std::vector<Genotype>& genotypes() const { return genotypes_; }
  const PhenotypeTable& phenotypes() const { return phenotypes_; }

  std::size_t num_snps() const { return panel_.size(); }
  std::size_t num_donors() const { return genotypes_.size(); }
  const Genotype& donor(std::size_t i) const { return genotypes_[i]; }

  std::optional<std::size_t> FindDonor(const std::string& donor_id) const;
  std::optional<std::size_t> FindLocus(const std::string& chromosome,
                                       std::uint64_t position) const;

  // New dataset with the given donor rows (in order). Phenotypes of the
  // retained donors are carried over.
  PopulationDataset Subset(std::span<const std::size_t> donor_indices) const;
  PopulationDataset WithPhenotypes(PhenotypeTable phenotypes) const;
  // Same donors, panel MAFs replaced.
  PopulationDataset WithMafs(std::span<const double> mafs) const;

  std::vector<double> Mafs() const;

  // Order-sensitive content hash over panel and genotypes.
  std::uint64_t Fingerprint() const;

  friend bool operator==(const PopulationDataset& a,
                         const PopulationDataset& b) {
    return a.panel_ == b.panel_ && a.genotypes_ == b.genotypes_ &&
           a.phenotypes_ == b.phenotypes_;
  }

 private:
  std::vector<SnpDef> panel_;
  std::vector<Genotype> genotypes_;
  PhenotypeTable phenotypes_;
  std::unordered_map<std::string, std::size_t> donor_index_;
};

// Parses the genotype matrix TSV (header "snp<TAB>id...", then one donor per
// line). With a MAF sidecar the panel takes chromosome, position and MAF from
// it and is sorted by (chromosome, position); without one, chromosome is
// empty, positions are column ordinals and MAFs come from ComputeMaf.
PopulationDataset ParseGenotypeMatrix(std::istream& text,
                                      std::istream* maf_source = nullptr);

void WriteGenotypeMatrix(const PopulationDataset& dataset, std::ostream& out);
void WriteMafSidecar(const PopulationDataset& dataset, std::ostream& out);

// Folded minor allele frequency of one column over non-missing donors.
// Throws if every value at the column is missing.
double ComputeMaf(const PopulationDataset& dataset, std::size_t snp_index);

// Folds a frequency into [0, 0.5].
inline double FoldFrequency(double f) { return f > 0.5 ? 1.0 - f : f; }

struct SyntheticPopulationSpec {
  std::size_t num_donors = 0;
  std::vector<std::size_t> block_sizes;
  std::vector<double> per_block_maf;
  double within_block_agreement = 1.0;
  std::string chromosome = "1";
  std::string donor_prefix = "d";
};

// Each donor draws one latent minor-presence bit per block with probability
// 1-(1-maf)^2. Each SNP of the block copies the latent bit with probability
// within_block_agreement and otherwise draws an independent bit with the same
// marginal, so per-SNP presence frequency matches the block MAF. Carriers are
// homozygous minor with probability maf^2 / (1-(1-maf)^2).
PopulationDataset GenerateSyntheticPopulation(
    const SyntheticPopulationSpec& spec, std::uint64_t seed);

}  // namespace beacon_recon

#endif  // BEACON_RECON_GENOTYPE_H_
