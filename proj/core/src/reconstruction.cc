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

#include "beacon_recon/reconstruction.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "beacon_recon/common.h"
#include "json.hpp"

namespace beacon_recon {
namespace {

double CarrierProbability(double maf) {
  return 1.0 - (1.0 - maf) * (1.0 - maf);
}

double LookupMaf(std::span<const double> mafs, std::size_t locus) {
  if (locus >= mafs.size() || std::isnan(mafs[locus])) {
    throw Error("locus " + std::to_string(locus) + " is missing a MAF");
  }
  return mafs[locus];
}

void SortBins(ReconstructionResult& result) {
  for (auto& bin : result.bins) std::sort(bin.begin(), bin.end());
}

ReconstructionResult BinsFromLabels(const SnpGraph& graph,
                                    const std::vector<std::size_t>& labels,
                                    std::size_t m_prime) {
  ReconstructionResult result;
  result.bins.resize(m_prime);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    result.bins[labels[v]].push_back(graph.vertices()[v]);
  }
  SortBins(result);
  return result;
}

}  // namespace

std::string_view AttackName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kBaseline:
      return "baseline";
    case AttackKind::kGreedy:
      return "greedy";
    case AttackKind::kSpectral:
      return "spectral";
    case AttackKind::kFuzzy:
      return "fuzzy";
  }
  return "unknown";
}

AttackKind ParseAttackKind(std::string_view name) {
  if (name == "baseline") return AttackKind::kBaseline;
  if (name == "greedy") return AttackKind::kGreedy;
  if (name == "spectral") return AttackKind::kSpectral;
  if (name == "fuzzy") return AttackKind::kFuzzy;
  throw Error("unknown attack '" + std::string(name) + "'");
}

std::vector<std::uint8_t> ReconstructionResult::BinIndicator(
    std::size_t bin, std::span<const std::size_t> universe) const {
  std::vector<std::uint8_t> bits(universe.size(), 0);
  const auto& loci = bins.at(bin);
  for (std::size_t u = 0; u < universe.size(); ++u) {
    bits[u] = std::binary_search(loci.begin(), loci.end(), universe[u]);
  }
  return bits;
}

std::string ReconstructionToJson(const ReconstructionResult& result) {
  nlohmann::json doc;
  const auto& p = result.parameters;
  doc["parameters"] = {{"attack", std::string(AttackName(p.kind))},
                       {"m", p.m},
                       {"m_prime", p.m_prime},
                       {"tau", p.tau},
                       {"seed", p.seed}};
  doc["bins"] = result.bins;
  return doc.dump();
}

ReconstructionResult ReconstructionFromJson(std::string_view json) {
  try {
    const auto doc = nlohmann::json::parse(json);
    ReconstructionResult result;
    const auto& p = doc.at("parameters");
    result.parameters.kind = ParseAttackKind(p.at("attack").get<std::string>());
    result.parameters.m = p.at("m").get<std::size_t>();
    result.parameters.m_prime = p.at("m_prime").get<std::size_t>();
    result.parameters.tau = p.at("tau").get<double>();
    result.parameters.seed = p.at("seed").get<std::uint64_t>();
    result.bins = doc.at("bins").get<std::vector<std::vector<std::size_t>>>();
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed reconstruction json: ") + e.what());
  }
}

bool CoversFlipSet(const ReconstructionResult& result, const FlipSet& flips) {
  std::unordered_set<std::size_t> flip_loci(flips.loci.begin(), flips.loci.end());
  std::unordered_set<std::size_t> seen;
  for (const auto& bin : result.bins) {
    for (std::size_t locus : bin) {
      if (!flip_loci.count(locus)) return false;
      seen.insert(locus);
    }
  }
  return seen.size() == flip_loci.size();
}

bool BinsDisjoint(const ReconstructionResult& result) {
  std::unordered_set<std::size_t> seen;
  for (const auto& bin : result.bins) {
    for (std::size_t locus : bin) {
      if (!seen.insert(locus).second) return false;
    }
  }
  return true;
}

ReconstructionResult BaselineReconstruct(const FlipSet& flips,
                                         std::span<const double> mafs,
                                         std::size_t m_prime,
                                         std::uint64_t seed) {
  if (m_prime == 0) throw Error("m' must be at least 1");
  Rng rng(seed);
  ReconstructionResult result;
  result.parameters = {AttackKind::kBaseline, 0, m_prime, 0.0, seed};
  result.bins.resize(m_prime);
  for (std::size_t locus : flips.loci) {
    const double p = CarrierProbability(LookupMaf(mafs, locus));
    bool assigned = false;
    for (std::size_t bin = 0; bin < m_prime; ++bin) {
      if (rng.Bernoulli(p)) {
        result.bins[bin].push_back(locus);
        assigned = true;
      }
    }
    if (!assigned) result.bins[rng.Below(m_prime)].push_back(locus);
  }
  SortBins(result);
  return result;
}

ReconstructionResult GreedyReconstruct(const FlipSet& flips,
                                       const CorrelationModel& model,
                                       std::span<const double> mafs,
                                       std::size_t m_prime, std::uint64_t seed,
                                       const GreedyOptions& options) {
  if (m_prime == 0) throw Error("m' must be at least 1");
  struct Item {
    std::size_t locus;
    std::size_t slot;
    double maf;
  };
  std::vector<Item> items;
  items.reserve(flips.loci.size());
  for (std::size_t locus : flips.loci) {
    const double maf = LookupMaf(mafs, locus);
    const auto slot = model.Slot(locus);
    if (!slot) {
      throw Error("locus " + std::to_string(locus) +
                  " missing from correlation model");
    }
    items.push_back({locus, *slot, maf});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.maf < b.maf;
  });

  ReconstructionResult result;
  result.parameters = {AttackKind::kGreedy, 0, m_prime, options.tau, seed};
  result.bins.resize(m_prime);
  std::vector<std::vector<std::size_t>> bin_slots(m_prime);
  std::vector<double> similarity_sum(m_prime, 0.0);

  // Seeds: the rarest loci, one per bin. When there are fewer rare loci than
  // bins the lowest-MAF loci fill in; surplus rare loci fall through to the
  // main loop.
  const std::size_t seeds = std::min(m_prime, items.size());
  for (std::size_t b = 0; b < seeds; ++b) {
    result.bins[b].push_back(items[b].locus);
    bin_slots[b].push_back(items[b].slot);
  }

  Rng rng(seed);
  std::vector<double> mean(m_prime);
  for (std::size_t i = seeds; i < items.size(); ++i) {
    const Item& item = items[i];
    for (std::size_t b = 0; b < m_prime; ++b) {
      double total = 0.0;
      for (std::size_t s : bin_slots[b]) {
        total += model.SimilarityAtSlots(item.slot, s);
      }
      mean[b] = bin_slots[b].empty()
                    ? 0.0
                    : total / static_cast<double>(bin_slots[b].size());
    }
    std::size_t chosen = 0;
    if (options.probabilistic) {
      const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
      if (total <= 0.0) {
        chosen = rng.Below(m_prime);
      } else {
        double target = rng.Uniform() * total;
        chosen = m_prime - 1;
        for (std::size_t b = 0; b < m_prime; ++b) {
          target -= mean[b];
          if (target < 0.0) {
            chosen = b;
            break;
          }
        }
      }
    } else {
      chosen = static_cast<std::size_t>(
          std::max_element(mean.begin(), mean.end()) - mean.begin());
    }
    result.bins[chosen].push_back(item.locus);
    bin_slots[chosen].push_back(item.slot);
  }
  SortBins(result);
  return result;
}

SnpGraph::SnpGraph(std::vector<std::size_t> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    if (e.a == e.b) throw Error("snp graph cannot contain self-loops");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.b >= vertices_.size()) throw Error("edge endpoint out of range");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
}

double SnpGraph::Weight(std::size_t a, std::size_t b) const {
  if (a == b) return 0.0;
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b, 0.0},
                             [](const Edge& x, const Edge& y) {
                               return x.a != y.a ? x.a < y.a : x.b < y.b;
                             });
  if (it == edges_.end() || it->a != a || it->b != b) return 0.0;
  return it->weight;
}

Eigen::MatrixXd SnpGraph::Affinity() const {
  const auto n = static_cast<Eigen::Index>(vertices_.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : edges_) {
    w(static_cast<Eigen::Index>(e.a), static_cast<Eigen::Index>(e.b)) = e.weight;
    w(static_cast<Eigen::Index>(e.b), static_cast<Eigen::Index>(e.a)) = e.weight;
  }
  return w;
}

SnpGraph BuildSnpGraph(const FlipSet& flips, const CorrelationModel& model,
                       const SnpGraphOptions& options) {
  std::vector<std::size_t> slots;
  slots.reserve(flips.loci.size());
  for (std::size_t locus : flips.loci) {
    const auto slot = model.Slot(locus);
    if (!slot) {
      throw Error("locus " + std::to_string(locus) + " absent from model");
    }
    slots.push_back(*slot);
  }
  const bool sparse = flips.loci.size() > options.dense_vertex_cap;
  std::vector<SnpGraph::Edge> edges;
  if (!sparse) edges.reserve(slots.size() * (slots.size() - (slots.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < slots.size(); ++a) {
    for (std::size_t b = a + 1; b < slots.size(); ++b) {
      const double w = model.SimilarityAtSlots(slots[a], slots[b]);
      if (sparse && w < options.weight_floor) continue;
      edges.push_back({a, b, w});
    }
  }
  return SnpGraph(flips.loci, std::move(edges));
}

ReconstructionResult SpectralReconstruct(const SnpGraph& graph,
                                         std::size_t m_prime,
                                         std::uint64_t seed,
                                         const SpectralOptions& options) {
  if (m_prime == 0) throw Error("m' must be at least 1");
  if (graph.num_vertices() < m_prime) {
    throw Error("vertex count below m'");
  }
  const Eigen::MatrixXd embedding =
      SpectralEmbedding(graph.Affinity(), m_prime);
  const KMeansResult clusters = KMeans(embedding, m_prime, seed, options.kmeans);
  ReconstructionResult result = BinsFromLabels(graph, clusters.labels, m_prime);
  result.parameters = {AttackKind::kSpectral, 0, m_prime, 0.0, seed};
  return result;
}

ReconstructionResult FuzzyReconstruct(const SnpGraph& graph,
                                      std::size_t m_prime, std::uint64_t seed,
                                      const FuzzyOptions& options) {
  if (m_prime == 0) throw Error("m' must be at least 1");
  if (graph.num_vertices() < m_prime) {
    throw Error("vertex count below m'");
  }
  const double threshold = options.threshold > 0.0
                               ? options.threshold
                               : 1.0 / static_cast<double>(m_prime);
  const Eigen::MatrixXd embedding =
      SpectralEmbedding(graph.Affinity(), m_prime);
  const KMeansResult init = KMeans(embedding, m_prime, seed, options.kmeans);
  FuzzyCMeansOptions fcm;
  fcm.fuzzifier = options.fuzzifier;
  fcm.max_iterations = options.max_iterations;
  fcm.tolerance = options.tolerance;
  const Eigen::MatrixXd membership = FuzzyCMeans(embedding, init.centers, fcm);

  ReconstructionResult result;
  result.parameters = {AttackKind::kFuzzy, 0, m_prime, 0.0, seed};
  result.bins.resize(m_prime);
  for (Eigen::Index v = 0; v < membership.rows(); ++v) {
    Eigen::Index best = 0;
    membership.row(v).maxCoeff(&best);
    const std::size_t locus = graph.vertices()[static_cast<std::size_t>(v)];
    for (Eigen::Index b = 0; b < membership.cols(); ++b) {
      // Small slack so that exact memberships of 1.0 survive rounding.
      if (b == best || membership(v, b) >= threshold - 1e-12) {
        result.bins[static_cast<std::size_t>(b)].push_back(locus);
      }
    }
  }
  SortBins(result);
  return result;
}

}  // namespace beacon_recon
