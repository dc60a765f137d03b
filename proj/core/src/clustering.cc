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

#include "beacon_recon/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

Eigen::MatrixXd SeedCenters(const Eigen::MatrixXd& points, std::size_t k,
                            Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), points.cols());
  std::vector<double> nearest(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
  Eigen::Index pick = static_cast<Eigen::Index>(rng.Below(static_cast<std::uint64_t>(n)));
  for (std::size_t c = 0; c < k; ++c) {
    centers.row(static_cast<Eigen::Index>(c)) = points.row(pick);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - points.row(pick)).squaredNorm();
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], d);
      total += nearest[static_cast<std::size_t>(i)];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.Below(static_cast<std::uint64_t>(n)));
      continue;
    }
    double target = rng.Uniform() * total;
    pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= nearest[static_cast<std::size_t>(i)];
      if (target < 0.0 && nearest[static_cast<std::size_t>(i)] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

KMeansResult Lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers,
                   const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centers.rows();
  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t label = 0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          label = static_cast<std::size_t>(c);
        }
      }
      result.labels[static_cast<std::size_t>(i)] = label;
    }
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(result.labels[static_cast<std::size_t>(i)]);
      next.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    double movement = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        next.row(c) = centers.row(c);  // empty cluster keeps its center
      } else {
        next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      movement = std::max(movement, (next.row(c) - centers.row(c)).norm());
    }
    centers = std::move(next);
    if (movement < options.tolerance) break;
  }
  // Final assignment against the settled centers.
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t label = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        label = static_cast<std::size_t>(c);
      }
    }
    result.labels[static_cast<std::size_t>(i)] = label;
    result.inertia += best;
  }
  result.centers = std::move(centers);
  return result;
}

}  // namespace

Eigen::MatrixXd SpectralEmbedding(const Eigen::MatrixXd& affinity,
                                  std::size_t dims) {
  const Eigen::Index n = affinity.rows();
  if (affinity.cols() != n) throw Error("affinity matrix must be square");
  if (dims == 0 || static_cast<Eigen::Index>(dims) > n) {
    throw Error("embedding dimension must be in [1, vertex count]");
  }
  Eigen::VectorXd inv_sqrt_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = affinity.row(i).sum();
    inv_sqrt_degree(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  const Eigen::MatrixXd normalized =
      inv_sqrt_degree.asDiagonal() * affinity * inv_sqrt_degree.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized);
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition failed");
  }
  // Eigenvalues come back ascending; keep the largest `dims`.
  const auto d = static_cast<Eigen::Index>(dims);
  Eigen::MatrixXd embedding = solver.eigenvectors().rightCols(d).rowwise().reverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return embedding;
}

KMeansResult KMeans(const Eigen::MatrixXd& points, std::size_t k,
                    std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0 || static_cast<Eigen::Index>(k) > points.rows()) {
    throw Error("k must be in [1, point count]");
  }
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng restart_rng(rng.Fork());
    KMeansResult candidate =
        Lloyd(points, SeedCenters(points, k, restart_rng), options);
    if (candidate.inertia < best.inertia - 1e-12) best = std::move(candidate);
  }
  return best;
}

Eigen::MatrixXd FuzzyCMeans(const Eigen::MatrixXd& points,
                            const Eigen::MatrixXd& initial_centers,
                            const FuzzyCMeansOptions& options) {
  if (options.fuzzifier <= 1.0) throw Error("fuzzifier must exceed 1");
  const Eigen::Index n = points.rows();
  const Eigen::Index c = initial_centers.rows();
  if (c == 0 || initial_centers.cols() != points.cols()) {
    throw Error("fuzzy c-means centers do not match points");
  }
  const double exponent = 2.0 / (options.fuzzifier - 1.0);
  Eigen::MatrixXd centers = initial_centers;
  Eigen::MatrixXd membership = Eigen::MatrixXd::Zero(n, c);

  auto update_membership = [&](Eigen::MatrixXd& u) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd dist(c);
      Eigen::Index zeros = 0;
      for (Eigen::Index j = 0; j < c; ++j) {
        dist(j) = (points.row(i) - centers.row(j)).norm();
        if (dist(j) < 1e-12) ++zeros;
      }
      if (zeros > 0) {
        // Points on a center split membership among coincident centers.
        for (Eigen::Index j = 0; j < c; ++j) {
          u(i, j) = dist(j) < 1e-12 ? 1.0 / static_cast<double>(zeros) : 0.0;
        }
        continue;
      }
      for (Eigen::Index j = 0; j < c; ++j) {
        double denom = 0.0;
        for (Eigen::Index l = 0; l < c; ++l) {
          denom += std::pow(dist(j) / dist(l), exponent);
        }
        u(i, j) = 1.0 / denom;
      }
    }
  };

  update_membership(membership);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd weights =
        membership.array().pow(options.fuzzifier).matrix();
    for (Eigen::Index j = 0; j < c; ++j) {
      const double total = weights.col(j).sum();
      if (total > 0.0) {
        centers.row(j) = (weights.col(j).transpose() * points) / total;
      }
    }
    Eigen::MatrixXd next(n, c);
    update_membership(next);
    const double change = (next - membership).cwiseAbs().maxCoeff();
    membership = std::move(next);
    if (change < options.tolerance) break;
  }
  return membership;
}

}  // namespace beacon_recon
