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

// Genome reconstruction attacks. Each attack partitions (or, for the fuzzy
// variant, covers) the no->yes flip set into m' bins; each bin is the set of
// loci inferred to carry a minor allele in one candidate newcomer genome.

#ifndef BEACON_RECON_RECONSTRUCTION_H_
#define BEACON_RECON_RECONSTRUCTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "beacon_recon/beacon.h"
#include "beacon_recon/clustering.h"
#include "beacon_recon/correlation.h"

namespace beacon_recon {

enum class AttackKind { kBaseline, kGreedy, kSpectral, kFuzzy };

std::string_view AttackName(AttackKind kind);
AttackKind ParseAttackKind(std::string_view name);

struct ReconstructionParameters {
  AttackKind kind = AttackKind::kBaseline;
  std::size_t m = 0;  // newcomers, when known; informational
  std::size_t m_prime = 1;
  double tau = 0.05;
  std::uint64_t seed = 0;
};

struct ReconstructionResult {
  ReconstructionParameters parameters;
  std::vector<std::vector<std::size_t>> bins;  // ascending panel loci

  // Indicator of one bin over an ordered locus universe.
  std::vector<std::uint8_t> BinIndicator(std::size_t bin,
                                         std::span<const std::size_t> universe) const;
};

// {"parameters": {...}, "bins": [[locus, ...], ...]}
std::string ReconstructionToJson(const ReconstructionResult& result);
ReconstructionResult ReconstructionFromJson(std::string_view json);

// Every flip locus appears in at least one bin and bins only hold flip loci.
bool CoversFlipSet(const ReconstructionResult& result, const FlipSet& flips);
bool BinsDisjoint(const ReconstructionResult& result);

// Independent per-bin draws with probability 1-(1-MAF)^2; uncovered loci go to
// one uniformly chosen bin. `mafs` is indexed by panel locus. Bins may
// overlap.
ReconstructionResult BaselineReconstruct(const FlipSet& flips,
                                         std::span<const double> mafs,
                                         std::size_t m_prime,
                                         std::uint64_t seed);

struct GreedyOptions {
  double tau = 0.05;
  // Draw the bin with probability proportional to mean similarity instead of
  // taking the argmax.
  bool probabilistic = false;
};

ReconstructionResult GreedyReconstruct(const FlipSet& flips,
                                       const CorrelationModel& model,
                                       std::span<const double> mafs,
                                       std::size_t m_prime, std::uint64_t seed,
                                       const GreedyOptions& options = {});

struct SnpGraphOptions {
  // Above this many vertices, edges lighter than weight_floor are dropped.
  std::size_t dense_vertex_cap = 20000;
  double weight_floor = 0.01;
};

// Weighted undirected graph over flip loci, without self-loops.
class SnpGraph {
 public:
  struct Edge {
    std::size_t a;  // vertex slots, a < b
    std::size_t b;
    double weight;
  };

  SnpGraph() = default;
  SnpGraph(std::vector<std::size_t> vertices, std::vector<Edge> edges);

  const std::vector<std::size_t>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }

  // Weight between two vertex slots; 0 for absent edges and self pairs.
  double Weight(std::size_t a, std::size_t b) const;
  Eigen::MatrixXd Affinity() const;

 private:
  std::vector<std::size_t> vertices_;
  std::vector<Edge> edges_;  // sorted by (a, b)
};

SnpGraph BuildSnpGraph(const FlipSet& flips, const CorrelationModel& model,
                       const SnpGraphOptions& options = {});

struct SpectralOptions {
  KMeansOptions kmeans;
};

ReconstructionResult SpectralReconstruct(const SnpGraph& graph,
                                         std::size_t m_prime,
                                         std::uint64_t seed,
                                         const SpectralOptions& options = {});

struct FuzzyOptions {
  // Membership threshold; non-positive means the default 1/m'.
  double threshold = 0.0;
  double fuzzifier = 2.0;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;
  KMeansOptions kmeans;
};

// Fuzzy c-means on the spectral embedding. A locus joins every bin whose
// membership reaches the threshold and always joins its argmax bin.
ReconstructionResult FuzzyReconstruct(const SnpGraph& graph,
                                      std::size_t m_prime, std::uint64_t seed,
                                      const FuzzyOptions& options = {});

}  // namespace beacon_recon

#endif  // BEACON_RECON_RECONSTRUCTION_H_
