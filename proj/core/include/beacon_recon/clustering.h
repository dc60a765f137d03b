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

// Clustering primitives used by the reconstruction attacks: normalized
// Laplacian spectral embedding, k-means with spread seeding, and fuzzy
// c-means.

#ifndef BEACON_RECON_CLUSTERING_H_
#define BEACON_RECON_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace beacon_recon {

// Rows of the returned matrix are the embedded vertices: the eigenvectors of
// D^-1/2 W D^-1/2 for the `dims` largest eigenvalues (equivalently the
// smallest of the symmetric normalized Laplacian), each row scaled to unit
// length. Isolated vertices embed at the origin.
Eigen::MatrixXd SpectralEmbedding(const Eigen::MatrixXd& affinity,
                                  std::size_t dims);

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // max center movement
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  Eigen::MatrixXd centers;  // k x dims
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds; the restart with the lowest inertia
// wins (earliest on ties). Empty clusters are kept.
KMeansResult KMeans(const Eigen::MatrixXd& points, std::size_t k,
                    std::uint64_t seed, const KMeansOptions& options = {});

struct FuzzyCMeansOptions {
  double fuzzifier = 2.0;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // max membership change
};

// Returns the n x c membership matrix. Rows sum to 1.
Eigen::MatrixXd FuzzyCMeans(const Eigen::MatrixXd& points,
                            const Eigen::MatrixXd& initial_centers,
                            const FuzzyCMeansOptions& options = {});

}  // namespace beacon_recon

#endif  // BEACON_RECON_CLUSTERING_H_
