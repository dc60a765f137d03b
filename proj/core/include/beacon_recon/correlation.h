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

// Attacker-side SNP correlation model built from a reference population:
// pairwise Sokal-Michener similarity over minor-presence columns and a
// first-order Markov transition table over panel order.

#ifndef BEACON_RECON_CORRELATION_H_
#define BEACON_RECON_CORRELATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "beacon_recon/genotype.h"

namespace beacon_recon {

// Simple matching similarity (n11 + n00) / length.
double SokalMichener(std::span<const std::uint8_t> u,
                     std::span<const std::uint8_t> v);

// Probability that the bit at panel locus j equals `outcome` given the k
// preceding bits (context[0] at j-k ... context[k-1] at j-1), estimated by
// sequence counting over the reference. Returns 0 when the context never
// occurs. k = 0 gives the marginal frequency.
double MarkovTransition(const PopulationDataset& reference, std::size_t j,
                        std::span<const std::uint8_t> context,
                        std::uint8_t outcome);

class CorrelationModel {
 public:
  CorrelationModel() = default;
  CorrelationModel(std::vector<std::size_t> loci, std::vector<double> pairwise,
                   std::vector<std::array<double, 4>> transitions,
                   std::uint64_t reference_hash);

  const std::vector<std::size_t>& loci() const { return loci_; }
  std::size_t size() const { return loci_.size(); }
  int markov_order() const { return 1; }
  // Fingerprint of the reference panel; 0 when built without a cache path.
  std::uint64_t reference_hash() const { return reference_hash_; }
  std::uint64_t loci_hash() const;

  bool Contains(std::size_t locus) const { return slot_.count(locus) != 0; }
  std::optional<std::size_t> Slot(std::size_t locus) const;

  // Similarity between two panel loci; throws if either is absent.
  double Similarity(std::size_t locus_a, std::size_t locus_b) const;
  double SimilarityAtSlots(std::size_t a, std::size_t b) const {
    return pairwise_[a * loci_.size() + b];
  }

  // P(bit_j = outcome | bit_{j-1} = context) for a locus of the model. Loci
  // at panel index 0 have no predecessor and report the marginal.
  double Transition(std::size_t locus, std::uint8_t context,
                    std::uint8_t outcome) const;

  // Binary cache keyed by (reference hash, loci hash).
  void Save(const std::filesystem::path& path) const;
  static std::optional<CorrelationModel> Load(
      const std::filesystem::path& path, std::uint64_t reference_hash,
      std::span<const std::size_t> loci);

 private:
  std::vector<std::size_t> loci_;
  std::vector<double> pairwise_;  // row-major |loci| x |loci|
  std::vector<std::array<double, 4>> transitions_;  // [ctx*2 + outcome]
  std::unordered_map<std::size_t, std::size_t> slot_;
  std::uint64_t reference_hash_ = 0;
};

struct CorrelationOptions {
  // Donor ids that must not appear in the reference (beacon members,
  // newcomers, victims).
  std::vector<std::string> excluded_donors;
  // Downgrades an overlap from an error to a warning on stderr.
  bool allow_overlap = false;
  // Optional cache file; read when the key matches, written otherwise.
  std::optional<std::filesystem::path> cache_path;
};

std::uint64_t HashLoci(std::span<const std::size_t> loci);

CorrelationModel BuildCorrelationModel(const PopulationDataset& reference,
                                       std::span<const std::size_t> loci,
                                       const CorrelationOptions& options = {});

}  // namespace beacon_recon

#endif  // BEACON_RECON_CORRELATION_H_
