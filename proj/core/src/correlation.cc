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
#include <bit>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

constexpr char kCacheMagic[4] = {'B', 'R', 'C', 'M'};
constexpr std::uint32_t kCacheVersion = 1;

using BitColumn = std::vector<std::uint64_t>;

BitColumn PackColumn(const PopulationDataset& reference, std::size_t locus) {
  BitColumn words((reference.num_donors() + 63) / 64, 0);
  for (std::size_t i = 0; i < reference.num_donors(); ++i) {
    if (HasMinorAllele(reference.donor(i).values[locus])) {
      words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  return words;
}

std::size_t CountMismatches(const BitColumn& a, const BitColumn& b) {
  std::size_t mismatches = 0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    mismatches += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  }
  return mismatches;
}

}  // namespace

double SokalMichener(std::span<const std::uint8_t> u,
                     std::span<const std::uint8_t> v) {
  if (u.size() != v.size()) throw Error("length mismatch");
  if (u.empty()) throw Error("zero length");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    matches += (u[i] != 0) == (v[i] != 0);
  }
  return static_cast<double>(matches) / static_cast<double>(u.size());
}

double MarkovTransition(const PopulationDataset& reference, std::size_t j,
                        std::span<const std::uint8_t> context,
                        std::uint8_t outcome) {
  const std::size_t k = context.size();
  if (j >= reference.num_snps()) throw Error("invalid locus index");
  if (j < k) throw Error("markov order exceeds locus index");
  std::size_t context_count = 0;
  std::size_t sequence_count = 0;
  for (const Genotype& g : reference.genotypes()) {
    bool match = true;
    for (std::size_t c = 0; c < k && match; ++c) {
      match = HasMinorAllele(g.values[j - k + c]) == (context[c] != 0);
    }
    if (!match) continue;
    ++context_count;
    if (HasMinorAllele(g.values[j]) == (outcome != 0)) ++sequence_count;
  }
  if (context_count == 0) return 0.0;
  return static_cast<double>(sequence_count) /
         static_cast<double>(context_count);
}

CorrelationModel::CorrelationModel(
    std::vector<std::size_t> loci, std::vector<double> pairwise,
    std::vector<std::array<double, 4>> transitions,
    std::uint64_t reference_hash)
    : loci_(std::move(loci)),
      pairwise_(std::move(pairwise)),
      transitions_(std::move(transitions)),
      reference_hash_(reference_hash) {
  if (pairwise_.size() != loci_.size() * loci_.size() ||
      transitions_.size() != loci_.size()) {
    throw Error("correlation model tables do not match loci");
  }
  for (std::size_t s = 0; s < loci_.size(); ++s) {
    if (!slot_.emplace(loci_[s], s).second) {
      throw Error("duplicate locus in correlation model");
    }
  }
}

std::uint64_t CorrelationModel::loci_hash() const { return HashLoci(loci_); }

std::optional<std::size_t> CorrelationModel::Slot(std::size_t locus) const {
  auto it = slot_.find(locus);
  if (it == slot_.end()) return std::nullopt;
  return it->second;
}

double CorrelationModel::Similarity(std::size_t locus_a,
                                    std::size_t locus_b) const {
  const auto a = Slot(locus_a);
  const auto b = Slot(locus_b);
  if (!a || !b) throw Error("locus missing from correlation model");
  return SimilarityAtSlots(*a, *b);
}

double CorrelationModel::Transition(std::size_t locus, std::uint8_t context,
                                    std::uint8_t outcome) const {
  const auto s = Slot(locus);
  if (!s) throw Error("locus missing from correlation model");
  return transitions_[*s][(context != 0) * 2 + (outcome != 0)];
}

void CorrelationModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write correlation cache " + path.string());
  const std::uint64_t n = loci_.size();
  const std::uint64_t lh = loci_hash();
  out.write(kCacheMagic, sizeof(kCacheMagic));
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof(kCacheVersion));
  out.write(reinterpret_cast<const char*>(&reference_hash_), sizeof(reference_hash_));
  out.write(reinterpret_cast<const char*>(&lh), sizeof(lh));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (std::size_t locus : loci_) {
    const std::uint64_t l = locus;
    out.write(reinterpret_cast<const char*>(&l), sizeof(l));
  }
  out.write(reinterpret_cast<const char*>(pairwise_.data()),
            static_cast<std::streamsize>(pairwise_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(transitions_.data()),
            static_cast<std::streamsize>(transitions_.size() *
                                         sizeof(std::array<double, 4>)));
}

std::optional<CorrelationModel> CorrelationModel::Load(
    const std::filesystem::path& path, std::uint64_t reference_hash,
    std::span<const std::size_t> loci) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t ref = 0, lh = 0, n = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&ref), sizeof(ref));
  in.read(reinterpret_cast<char*>(&lh), sizeof(lh));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || !std::equal(magic, magic + 4, kCacheMagic) ||
      version != kCacheVersion || ref != reference_hash ||
      lh != HashLoci(loci) || n != loci.size()) {
    return std::nullopt;
  }
  std::vector<std::size_t> stored(n);
  for (auto& locus : stored) {
    std::uint64_t l = 0;
    in.read(reinterpret_cast<char*>(&l), sizeof(l));
    locus = l;
  }
  if (!std::equal(stored.begin(), stored.end(), loci.begin())) return std::nullopt;
  std::vector<double> pairwise(n * n);
  std::vector<std::array<double, 4>> transitions(n);
  in.read(reinterpret_cast<char*>(pairwise.data()),
          static_cast<std::streamsize>(pairwise.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(transitions.data()),
          static_cast<std::streamsize>(transitions.size() *
                                       sizeof(std::array<double, 4>)));
  if (!in) return std::nullopt;
  return CorrelationModel(std::move(stored), std::move(pairwise),
                          std::move(transitions), reference_hash);
}

std::uint64_t HashLoci(std::span<const std::size_t> loci) {
  Fnv1a h;
  h.AddValue(loci.size());
  for (std::size_t l : loci) h.AddValue(static_cast<std::uint64_t>(l));
  return h.digest();
}

CorrelationModel BuildCorrelationModel(const PopulationDataset& reference,
                                       std::span<const std::size_t> loci,
                                       const CorrelationOptions& options) {
  if (reference.num_donors() == 0) throw Error("empty reference");
  std::vector<std::string> overlap;
  for (const std::string& id : options.excluded_donors) {
    if (reference.FindDonor(id)) overlap.push_back(id);
  }
  if (!overlap.empty()) {
    const std::string msg = "reference population shares " +
                            std::to_string(overlap.size()) +
                            " donor(s) with the beacon, e.g. '" + overlap[0] +
                            "'";
    if (!options.allow_overlap) throw Error(msg);
    std::cerr << "warning: " << msg << '\n';
  }
  for (std::size_t l : loci) {
    if (l >= reference.num_snps()) throw Error("locus outside panel");
  }

  const std::uint64_t reference_hash =
      options.cache_path ? reference.Fingerprint() : 0;
  if (options.cache_path) {
    if (auto cached =
            CorrelationModel::Load(*options.cache_path, reference_hash, loci)) {
      return std::move(*cached);
    }
  }

  const std::size_t n = loci.size();
  const double donors = static_cast<double>(reference.num_donors());
  std::vector<BitColumn> columns;
  columns.reserve(n);
  for (std::size_t l : loci) columns.push_back(PackColumn(reference, l));

  std::vector<double> pairwise(n * n, 1.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double sim =
          (donors - static_cast<double>(CountMismatches(columns[a], columns[b]))) /
          donors;
      pairwise[a * n + b] = sim;
      pairwise[b * n + a] = sim;
    }
  }

  std::vector<std::array<double, 4>> transitions(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t j = loci[s];
    if (j == 0) {
      const double p1 = MarkovTransition(reference, 0, {}, 1);
      transitions[s] = {1.0 - p1, p1, 1.0 - p1, p1};
      continue;
    }
    for (std::uint8_t ctx = 0; ctx < 2; ++ctx) {
      const std::uint8_t context[1] = {ctx};
      for (std::uint8_t out = 0; out < 2; ++out) {
        transitions[s][ctx * 2 + out] =
            MarkovTransition(reference, j, context, out);
      }
    }
  }

  CorrelationModel model({loci.begin(), loci.end()}, std::move(pairwise),
                         std::move(transitions), reference_hash);
  if (options.cache_path) model.Save(*options.cache_path);
  return model;
}

}  // namespace beacon_recon
