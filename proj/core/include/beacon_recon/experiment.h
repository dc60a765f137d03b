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

// Experiment harness: attack sweeps with precision/recall metrics, the
// chained reconstruction + membership attack, and per-donor risk
// quantification.

#ifndef BEACON_RECON_EXPERIMENT_H_
#define BEACON_RECON_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "beacon_recon/genotype.h"
#include "beacon_recon/membership.h"
#include "beacon_recon/phenotype.h"
#include "beacon_recon/reconstruction.h"
#include "beacon_recon/scenario.h"

namespace beacon_recon {

enum class Identification { kOracle, kPhenotype };
std::string_view IdentificationName(Identification mode);

struct MetricsRow {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::optional<double> precision;  // empty when TP + FP = 0
  std::optional<double> recall;     // empty when TP + FN = 0

  // Configuration echo.
  std::string attack;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t m_prime = 0;
  double tau = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Identification identification = Identification::kOracle;
  std::size_t flips = 0;
  bool identified_correctly = true;
};

// Confusion counts of a predicted indicator against the truth, both over the
// same flip-locus universe.
MetricsRow PrecisionRecall(std::span<const std::uint8_t> truth,
                           std::span<const std::uint8_t> predicted);

struct ChainConfig {
  std::vector<std::string> b1_ids;  // empty: drawn at random
  std::vector<std::string> b2_ids;
  std::size_t b1_size = 50;
  std::size_t b2_size = 60;
  std::size_t cohort_size = 20;
  std::size_t filler_pool = 50;
  std::size_t max_queries = 40;
  double alpha = 0.05;
  double delta = 1e-6;
  // Oracle mode: share of the alternate cohort attacked with its own bin.
  double identification_accuracy = 1.0;
  bool alternate_from_nonmembers = false;
};

struct ExperimentConfig {
  std::size_t n = 50;
  std::size_t m = 3;
  std::size_t m_prime = 3;
  AttackKind attack = AttackKind::kSpectral;
  double tau = 0.05;
  bool greedy_probabilistic = false;
  double fuzzy_threshold = 0.0;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  Identification identification = Identification::kOracle;
  TraitTrainingConfig training;
  ChainConfig chain;
  std::size_t risk_cohort = 20;  // s

  void Validate() const;
  AttackOptions MakeAttackOptions() const;
};

// Seed of one trial; depends only on the base seed and the trial index so
// every sweep value sees the same random splits.
std::uint64_t TrialSeed(std::uint64_t seed, std::size_t trial);

// Trains the phenotype ensemble on the reference donors over the flip loci
// and returns the victim's bin.
std::size_t PhenotypeIdentify(const PopulationDataset& population,
                              const UpdateScenario& scenario,
                              const ReconstructionResult& result,
                              const Genotype& victim,
                              const TraitTrainingConfig& training);

// One trial: random update, attack, victim identification and metrics.
MetricsRow RunTrial(const PopulationDataset& population,
                    const ExperimentConfig& config, std::size_t trial);

enum class SweepAxis { kM, kMPrime, kN };
std::string_view SweepAxisName(SweepAxis axis);
SweepAxis ParseSweepAxis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kM;
  std::vector<std::size_t> values;
  // When sweeping m, m' follows m.
  bool tie_m_prime = true;
};

// Rows ordered by (value, trial). Trials run on a thread pool.
std::vector<MetricsRow> RunSweep(const PopulationDataset& population,
                                 const ExperimentConfig& config,
                                 const SweepSpec& sweep,
                                 std::size_t threads = 0);

struct SweepSummary {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t m_prime = 0;
  std::string attack;
  std::size_t trials = 0;
  double mean_precision = 0.0;  // over rows with a defined value
  double mean_recall = 0.0;
  std::size_t precision_na = 0;
  std::size_t recall_na = 0;
};

// One summary per distinct (attack, n, m, m') in first-appearance order.
std::vector<SweepSummary> Summarize(std::span<const MetricsRow> rows);

void WriteMetricsCsv(std::span<const MetricsRow> rows, std::ostream& out);
void WriteSummaryCsv(std::span<const SweepSummary> summaries, std::ostream& out);

struct ChainedAttackResult {
  PowerCurve curve;  // mean over trials
  std::vector<PowerCurve> per_trial;
  double measured_p = 0.0;
  double mismatch_rate = 0.0;
  double effective_delta = 0.0;
};

ChainedAttackResult RunChainedAttack(const PopulationDataset& population,
                                     const ExperimentConfig& config);

struct RiskResult {
  double reconstruction_fraction = 0.0;
  std::vector<double> baseline_fractions;
  double percentile = 0.0;
};

// Midrank percentile of `value` among `baseline`, in [0, 100].
double MidrankPercentile(double value, std::span<const double> baseline);

// Share of the donor's flip-set minor alleles found in the donor's oracle bin
// when the donor joins `beacon` together with `batch`; 0 without flips.
double ReconstructionFraction(const PopulationDataset& population,
                              std::size_t donor,
                              std::span<const std::size_t> beacon,
                              std::span<const std::size_t> batch,
                              std::span<const std::size_t> reference,
                              const AttackOptions& options, std::uint64_t seed);

RiskResult QuantifyRisk(const PopulationDataset& population, std::size_t donor,
                        std::span<const std::size_t> beacon,
                        std::span<const std::size_t> batch,
                        std::span<const std::size_t> baseline_pool,
                        std::span<const std::size_t> reference,
                        const AttackOptions& options, std::uint64_t seed);

}  // namespace beacon_recon

#endif  // BEACON_RECON_EXPERIMENT_H_
