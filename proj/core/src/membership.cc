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

#include "beacon_recon/membership.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

double Clamp(double d, bool& clamped) {
  if (d < kDClamp) {
    clamped = true;
    return kDClamp;
  }
  if (d > 1.0 - kDClamp) {
    clamped = true;
    return 1.0 - kDClamp;
  }
  return d;
}

}  // namespace

void LrtConfig::Validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (beacon_size == 0) throw Error("beacon size must be at least 1");
}

DTerms ComputeDTerms(double maf, std::size_t beacon_size) {
  const double n = static_cast<double>(beacon_size);
  return {std::pow(1.0 - maf, 2.0 * n), std::pow(1.0 - maf, 2.0 * n - 2.0)};
}

double LrtIncrement(double maf, int answer, const LrtConfig& config,
                    bool* clamped) {
  const DTerms d = ComputeDTerms(maf, config.beacon_size);
  bool hit = false;
  const double dn = Clamp(d.d_n, hit);
  const double dn1 = Clamp(d.d_n_minus_1, hit);
  if (clamped != nullptr) *clamped = hit;
  const double delta_dn1 = config.delta * dn1;
  double increment = std::log(dn / delta_dn1);
  if (answer != 0) {
    increment += std::log(delta_dn1 * (1.0 - dn) / (dn * (1.0 - delta_dn1)));
  }
  return increment;
}

LrtState LrtUpdate(LrtState state, std::size_t locus, double maf, int answer,
                   const LrtConfig& config) {
  bool clamped = false;
  state.lambda += LrtIncrement(maf, answer, config, &clamped);
  state.clamp_events += clamped;
  state.log.push_back({locus, maf, answer != 0});
  return state;
}

double RecomputeLambda(const LrtState& state, const LrtConfig& config) {
  double lambda = 0.0;
  for (const LrtResponse& r : state.log) {
    lambda += LrtIncrement(r.maf, r.answer, config);
  }
  return lambda;
}

double AttackTrace::LambdaAt(std::size_t q) const {
  if (q == 0 || lambda.empty()) return 0.0;
  return lambda[std::min(q, lambda.size()) - 1];
}

AttackTrace OptimalAttack(std::span<const std::size_t> inferred_loci,
                          std::span<const double> mafs,
                          const BeaconQueryFn& query, const LrtConfig& config,
                          std::size_t max_queries,
                          std::span<const double> thresholds) {
  config.Validate();
  AttackTrace trace;
  if (max_queries == 0) return trace;
  if (inferred_loci.empty()) throw Error("no loci to query");
  std::vector<std::size_t> order(inferred_loci.begin(), inferred_loci.end());
  for (std::size_t l : order) {
    if (l >= mafs.size()) throw Error("locus without MAF");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mafs[a] != mafs[b] ? mafs[a] < mafs[b] : a < b;
  });
  if (order.size() > max_queries) order.resize(max_queries);

  LrtState state;
  for (std::size_t locus : order) {
    const int answer = query(locus) ? 1 : 0;
    state = LrtUpdate(std::move(state), locus, mafs[locus], answer, config);
    trace.loci.push_back(locus);
    trace.answers.push_back(answer);
    trace.lambda.push_back(state.lambda);
    const std::size_t q = trace.lambda.size();
    if (!thresholds.empty() && q <= thresholds.size()) {
      trace.member_calls.push_back(state.lambda < thresholds[q - 1]);
    }
  }
  trace.clamp_events = state.clamp_events;
  return trace;
}

double LowerQuantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw Error("empty cohort");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * alpha;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> CalibrateNull(std::span<const AttackTrace> null_traces,
                                  double alpha, std::size_t max_queries) {
  if (null_traces.empty()) throw Error("empty cohort");
  if (null_traces.size() < 2) throw Error("null cohort needs at least 2 members");
  std::vector<double> thresholds(max_queries);
  std::vector<double> column(null_traces.size());
  for (std::size_t q = 1; q <= max_queries; ++q) {
    for (std::size_t i = 0; i < null_traces.size(); ++i) {
      column[i] = null_traces[i].LambdaAt(q);
    }
    thresholds[q - 1] = LowerQuantile(column, alpha);
  }
  return thresholds;
}

PowerCurve ComputePowerCurve(std::span<const AttackTrace> alternate_traces,
                             std::span<const double> thresholds) {
  if (alternate_traces.empty()) throw Error("empty alternate cohort");
  PowerCurve curve;
  curve.power.resize(thresholds.size());
  for (std::size_t q = 1; q <= thresholds.size(); ++q) {
    std::size_t hits = 0;
    for (const AttackTrace& t : alternate_traces) {
      hits += t.LambdaAt(q) < thresholds[q - 1];
    }
    curve.power[q - 1] =
        static_cast<double>(hits) / static_cast<double>(alternate_traces.size());
  }
  return curve;
}

void WritePowerCurveCsv(const PowerCurve& curve, std::ostream& out,
                        bool header) {
  if (header) out << "queries,power,m,p,alpha,delta\n";
  for (std::size_t q = 0; q < curve.power.size(); ++q) {
    out << (q + 1) << ',' << curve.power[q] << ',' << curve.m << ',' << curve.p
        << ',' << curve.alpha << ',' << curve.delta << '\n';
  }
}

double EffectiveDelta(double delta_base, double mismatch_rate) {
  return std::min(delta_base + std::max(0.0, mismatch_rate),
                  std::nextafter(0.5, 0.0));
}

}  // namespace beacon_recon
