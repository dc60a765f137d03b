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

// Likelihood-ratio membership inference against a beacon (the "Optimal"
// attack) driven by reconstructed genomes, with empirical null calibration
// and power curves.

#ifndef BEACON_RECON_MEMBERSHIP_H_
#define BEACON_RECON_MEMBERSHIP_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace beacon_recon {

// D terms are clamped into [kDClamp, 1 - kDClamp] before taking logs.
inline constexpr double kDClamp = 1e-12;

struct LrtConfig {
  double delta = 1e-6;          // mismatch probability, in (0, 1)
  std::size_t beacon_size = 1;  // N
  double alpha = 0.05;          // false-positive rate
  std::size_t null_cohort_size = 20;

  void Validate() const;
};

struct DTerms {
  double d_n = 1.0;          // (1-f)^(2N)
  double d_n_minus_1 = 1.0;  // (1-f)^(2N-2)
};

DTerms ComputeDTerms(double maf, std::size_t beacon_size);

// Contribution of one response (x = 1 for yes) to the statistic, natural log.
// `clamped` is set when a D term had to be clamped.
double LrtIncrement(double maf, int answer, const LrtConfig& config,
                    bool* clamped = nullptr);

struct LrtResponse {
  std::size_t locus = 0;
  double maf = 0.0;
  int answer = 0;
};

struct LrtState {
  double lambda = 0.0;
  std::vector<LrtResponse> log;
  std::size_t clamp_events = 0;

  std::size_t queries() const { return log.size(); }
};

LrtState LrtUpdate(LrtState state, std::size_t locus, double maf, int answer,
                   const LrtConfig& config);

// Sum of increments over the response log, recomputed from scratch.
double RecomputeLambda(const LrtState& state, const LrtConfig& config);

// Answers "does the target beacon carry a minor allele at this panel locus".
using BeaconQueryFn = std::function<bool(std::size_t locus)>;

struct AttackTrace {
  std::vector<std::size_t> loci;   // query order
  std::vector<int> answers;
  std::vector<double> lambda;      // statistic after each query
  std::vector<int> member_calls;   // 1 = H0 rejected; empty without thresholds
  std::size_t clamp_events = 0;

  // Statistic after q queries; traces shorter than q hold their last value.
  double LambdaAt(std::size_t q) const;
};

// Queries the inferred minor-allele loci from lowest MAF upwards (ties by
// locus) and records the statistic. With thresholds, the call at step q is
// lambda < thresholds[q-1].
AttackTrace OptimalAttack(std::span<const std::size_t> inferred_loci,
                          std::span<const double> mafs,
                          const BeaconQueryFn& query, const LrtConfig& config,
                          std::size_t max_queries,
                          std::span<const double> thresholds = {});

// Lower-tail empirical quantile with linear interpolation between order
// statistics (position (n-1) * alpha).
double LowerQuantile(std::vector<double> values, double alpha);

// t_alpha for query counts 1..max_queries from null-cohort traces.
std::vector<double> CalibrateNull(std::span<const AttackTrace> null_traces,
                                  double alpha, std::size_t max_queries);

struct PowerCurve {
  std::vector<double> power;  // index q-1 for q queries
  std::size_t m = 0;
  double p = 1.0;  // identification accuracy used for cohort mixing
  double alpha = 0.05;
  double delta = 1e-6;
};

// Fraction of alternate traces with lambda(q) < t_alpha(q), per q.
PowerCurve ComputePowerCurve(std::span<const AttackTrace> alternate_traces,
                             std::span<const double> thresholds);

// queries,power,m,p,alpha,delta
void WritePowerCurveCsv(const PowerCurve& curve, std::ostream& out,
                        bool header = true);

// delta_base + measured mismatch, kept strictly below 0.5.
double EffectiveDelta(double delta_base, double mismatch_rate);

}  // namespace beacon_recon

#endif  // BEACON_RECON_MEMBERSHIP_H_
