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

#include "beacon_recon/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "beacon_recon/beacon.h"
#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

std::string FormatDouble(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string FormatOptional(const std::optional<double>& value) {
  return value ? FormatDouble(*value) : "NA";
}

std::vector<std::size_t> ResolveIds(const PopulationDataset& population,
                                    const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  for (const std::string& id : ids) {
    const auto index = population.FindDonor(id);
    if (!index) throw Error("unknown donor '" + id + "'");
    out.push_back(*index);
  }
  return out;
}

// Draws disjoint donor groups from a shuffled pool.
class DonorPool {
 public:
  DonorPool(std::size_t num_donors, const std::vector<char>& taken, Rng& rng) {
    for (std::size_t i = 0; i < num_donors; ++i) {
      if (!taken[i]) free_.push_back(i);
    }
    rng.Shuffle(free_);
  }
  std::vector<std::size_t> Take(std::size_t k) {
    if (k > free_.size() - next_) {
      throw Error("insufficient donors in source population");
    }
    std::vector<std::size_t> out(free_.begin() + static_cast<std::ptrdiff_t>(next_),
                                 free_.begin() + static_cast<std::ptrdiff_t>(next_ + k));
    next_ += k;
    return out;
  }
  std::vector<std::size_t> Rest() {
    std::vector<std::size_t> out = Take(free_.size() - next_);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::size_t> free_;
  std::size_t next_ = 0;
};

struct CohortAttack {
  std::vector<std::size_t> inferred;
  bool correct = true;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

}  // namespace

std::string_view IdentificationName(Identification mode) {
  return mode == Identification::kOracle ? "oracle" : "phenotype";
}

MetricsRow PrecisionRecall(std::span<const std::uint8_t> truth,
                           std::span<const std::uint8_t> predicted) {
  if (truth.size() != predicted.size()) throw Error("universe mismatch");
  MetricsRow row;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] && predicted[i]) {
      ++row.tp;
    } else if (predicted[i]) {
      ++row.fp;
    } else if (truth[i]) {
      ++row.fn;
    } else {
      ++row.tn;
    }
  }
  if (row.tp + row.fp > 0) {
    row.precision = static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp);
  }
  if (row.tp + row.fn > 0) {
    row.recall = static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn);
  }
  return row;
}

void ExperimentConfig::Validate() const {
  if (m < 1) throw Error("m must be at least 1");
  if (m_prime < 1) throw Error("m' must be at least 1");
  if (trials < 1) throw Error("trials must be at least 1");
  if (tau < 0.0) throw Error("tau must be non-negative");
  if (chain.identification_accuracy < 0.0 || chain.identification_accuracy > 1.0) {
    throw Error("identification accuracy must lie in [0, 1]");
  }
}

AttackOptions ExperimentConfig::MakeAttackOptions() const {
  AttackOptions options;
  options.kind = attack;
  options.m_prime = m_prime;
  options.greedy.tau = tau;
  options.greedy.probabilistic = greedy_probabilistic;
  options.fuzzy.threshold = fuzzy_threshold;
  return options;
}

std::uint64_t TrialSeed(std::uint64_t seed, std::size_t trial) {
  Fnv1a h;
  h.AddValue(seed);
  h.AddValue(static_cast<std::uint64_t>(trial));
  return Rng(h.digest()).Fork();
}

std::size_t PhenotypeIdentify(const PopulationDataset& population,
                              const UpdateScenario& scenario,
                              const ReconstructionResult& result,
                              const Genotype& victim,
                              const TraitTrainingConfig& training) {
  std::set<std::string> names;
  for (const auto& [donor, traits] : population.phenotypes()) {
    for (const auto& [trait, value] : traits) names.insert(trait);
  }
  const std::vector<std::string> traits(names.begin(), names.end());
  const PopulationDataset reference = population.Subset(scenario.reference);
  const EnsembleClassifier ensemble =
      TrainEnsemble(reference, traits, scenario.flips.loci, training);
  const PhenotypeProfile profile = ProfileOf(population.phenotypes(), victim.donor_id);
  bool usable = false;
  for (const TraitModel& model : ensemble.models()) {
    usable = usable || profile.count(model.trait) != 0;
  }
  // Without a usable model every bin scores zero and the tie rule applies.
  if (!usable) return 0;
  return IdentifyVictim(result, profile, ensemble);
}

MetricsRow RunTrial(const PopulationDataset& population,
                    const ExperimentConfig& config, std::size_t trial) {
  config.Validate();
  const std::uint64_t seed = TrialSeed(config.seed, trial);
  const UpdateScenario scenario = RandomUpdate(population, config.n, config.m, seed);
  Rng rng(seed ^ 0x5bd1e995ULL);
  const Genotype& victim = population.donor(scenario.newcomers[rng.Below(config.m)]);
  const ReconstructionResult result =
      RunAttack(population, scenario, config.MakeAttackOptions(), seed);
  const auto& universe = scenario.flips.loci;
  const std::size_t oracle = OracleIdentify(result, victim, universe);
  const std::size_t bin =
      config.identification == Identification::kOracle
          ? oracle
          : PhenotypeIdentify(population, scenario, result, victim, config.training);
  MetricsRow row =
      PrecisionRecall(TruthOver(victim, universe), result.BinIndicator(bin, universe));
  row.attack = std::string(AttackName(config.attack));
  row.n = config.n;
  row.m = config.m;
  row.m_prime = config.m_prime;
  row.tau = config.tau;
  row.trial = trial;
  row.seed = seed;
  row.identification = config.identification;
  row.flips = universe.size();
  row.identified_correctly = bin == oracle;
  return row;
}

std::string_view SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kM:
      return "m";
    case SweepAxis::kMPrime:
      return "m_prime";
    case SweepAxis::kN:
      return "n";
  }
  return "?";
}

SweepAxis ParseSweepAxis(std::string_view name) {
  if (name == "m") return SweepAxis::kM;
  if (name == "m_prime" || name == "m-prime" || name == "m'") return SweepAxis::kMPrime;
  if (name == "n") return SweepAxis::kN;
  throw Error("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<MetricsRow> RunSweep(const PopulationDataset& population,
                                 const ExperimentConfig& config,
                                 const SweepSpec& sweep, std::size_t threads) {
  config.Validate();
  if (sweep.values.empty()) throw Error("empty sweep");
  std::vector<ExperimentConfig> points;
  for (std::size_t value : sweep.values) {
    ExperimentConfig point = config;
    switch (sweep.axis) {
      case SweepAxis::kM:
        point.m = value;
        if (sweep.tie_m_prime) point.m_prime = value;
        break;
      case SweepAxis::kMPrime:
        point.m_prime = value;
        break;
      case SweepAxis::kN:
        point.n = value;
        break;
    }
    point.Validate();
    if (point.n + point.m + 1 > population.num_donors()) {
      throw Error("insufficient donors in source population");
    }
    points.push_back(point);
  }

  const std::size_t total = points.size() * config.trials;
  std::vector<MetricsRow> rows(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      try {
        rows[task] = RunTrial(population, points[task / config.trials],
                              task % config.trials);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<SweepSummary> Summarize(std::span<const MetricsRow> rows) {
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;
  std::vector<SweepSummary> out;
  std::map<Key, std::size_t> slot;
  std::vector<std::size_t> precision_count, recall_count;
  for (const MetricsRow& row : rows) {
    const Key key{row.attack, row.n, row.m, row.m_prime};
    auto [it, inserted] = slot.try_emplace(key, out.size());
    if (inserted) {
      SweepSummary s;
      s.attack = row.attack;
      s.n = row.n;
      s.m = row.m;
      s.m_prime = row.m_prime;
      out.push_back(s);
      precision_count.push_back(0);
      recall_count.push_back(0);
    }
    SweepSummary& s = out[it->second];
    ++s.trials;
    if (row.precision) {
      s.mean_precision += *row.precision;
      ++precision_count[it->second];
    } else {
      ++s.precision_na;
    }
    if (row.recall) {
      s.mean_recall += *row.recall;
      ++recall_count[it->second];
    } else {
      ++s.recall_na;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (precision_count[i]) out[i].mean_precision /= static_cast<double>(precision_count[i]);
    if (recall_count[i]) out[i].mean_recall /= static_cast<double>(recall_count[i]);
  }
  return out;
}

void WriteMetricsCsv(std::span<const MetricsRow> rows, std::ostream& out) {
  out << "attack,n,m,m_prime,tau,trial,seed,identification,flips,tp,fp,tn,fn,"
         "precision,recall,identified_correctly\n";
  for (const MetricsRow& r : rows) {
    out << r.attack << ',' << r.n << ',' << r.m << ',' << r.m_prime << ','
        << FormatDouble(r.tau) << ',' << r.trial << ',' << r.seed << ','
        << IdentificationName(r.identification) << ',' << r.flips << ',' << r.tp
        << ',' << r.fp << ',' << r.tn << ',' << r.fn << ','
        << FormatOptional(r.precision) << ',' << FormatOptional(r.recall) << ','
        << (r.identified_correctly ? 1 : 0) << '\n';
  }
}

void WriteSummaryCsv(std::span<const SweepSummary> summaries, std::ostream& out) {
  out << "attack,n,m,m_prime,trials,mean_precision,mean_recall,precision_na,"
         "recall_na\n";
  for (const SweepSummary& s : summaries) {
    out << s.attack << ',' << s.n << ',' << s.m << ',' << s.m_prime << ','
        << s.trials << ',' << FormatDouble(s.mean_precision) << ','
        << FormatDouble(s.mean_recall) << ',' << s.precision_na << ','
        << s.recall_na << '\n';
  }
}

ChainedAttackResult RunChainedAttack(const PopulationDataset& population,
                                     const ExperimentConfig& config) {
  config.Validate();
  const ChainConfig& chain = config.chain;
  if (chain.cohort_size < 2) throw Error("cohort size must be at least 2");
  if (chain.max_queries == 0) throw Error("max queries must be positive");
  const AttackOptions options = config.MakeAttackOptions();
  const std::vector<double> mafs = population.Mafs();

  const std::vector<std::size_t> fixed_b1 = ResolveIds(population, chain.b1_ids);
  const std::vector<std::size_t> fixed_b2 = ResolveIds(population, chain.b2_ids);
  {
    std::set<std::size_t> b1(fixed_b1.begin(), fixed_b1.end());
    for (std::size_t i : fixed_b2) {
      if (b1.count(i)) throw Error("B1 and B2 overlap");
    }
  }

  ChainedAttackResult out;
  out.curve.power.assign(chain.max_queries, 0.0);
  double p_sum = 0.0, mismatch_sum = 0.0, delta_sum = 0.0;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t seed = TrialSeed(config.seed, trial);
    Rng rng(seed);
    std::vector<char> taken(population.num_donors(), 0);
    for (std::size_t i : fixed_b1) taken[i] = 1;
    for (std::size_t i : fixed_b2) taken[i] = 1;
    DonorPool pool(population.num_donors(), taken, rng);
    std::vector<std::size_t> b1 = fixed_b1.empty() ? pool.Take(chain.b1_size) : fixed_b1;
    std::vector<std::size_t> b2 = fixed_b2.empty() ? pool.Take(chain.b2_size) : fixed_b2;
    const std::vector<std::size_t> nulls = pool.Take(chain.cohort_size);
    std::vector<std::size_t> alternates;
    if (chain.alternate_from_nonmembers) {
      alternates = pool.Take(chain.cohort_size);
    } else {
      if (b2.size() < chain.cohort_size) throw Error("B2 smaller than the cohort");
      alternates = b2;
      rng.Shuffle(alternates);
      alternates.resize(chain.cohort_size);
    }
    const std::vector<std::size_t> fillers =
        pool.Take(config.m > 1 ? std::max(chain.filler_pool, config.m - 1) : 0);
    const std::vector<std::size_t> reference = pool.Rest();
    if (reference.empty()) throw Error("insufficient donors in source population");

    auto attack = [&](std::size_t person, bool mix_wrong) {
      std::vector<std::size_t> batch{person};
      std::vector<std::size_t> others = fillers;
      rng.Shuffle(others);
      batch.insert(batch.end(), others.begin(),
                   others.begin() + static_cast<std::ptrdiff_t>(config.m - 1));
      const UpdateScenario scenario = SimulateUpdate(population, b1, batch, reference);
      const ReconstructionResult result =
          RunAttack(population, scenario, options, rng.Fork());
      const Genotype& donor = population.donor(person);
      const auto& universe = scenario.flips.loci;
      const std::size_t oracle = OracleIdentify(result, donor, universe);
      std::size_t bin = oracle;
      if (config.identification == Identification::kPhenotype) {
        bin = PhenotypeIdentify(population, scenario, result, donor, config.training);
      } else if (mix_wrong && result.bins.size() > 1) {
        bin = (oracle + 1 + rng.Below(result.bins.size() - 1)) % result.bins.size();
      }
      CohortAttack a;
      a.inferred = result.bins[bin];
      a.correct = bin == oracle;
      for (std::size_t locus : a.inferred) {
        if (HasMinorAllele(donor.values[locus])) {
          ++a.tp;
        } else {
          ++a.fp;
        }
      }
      return a;
    };

    std::vector<CohortAttack> null_attacks, alt_attacks;
    for (std::size_t v : nulls) null_attacks.push_back(attack(v, false));
    const auto correct_count = static_cast<std::size_t>(std::llround(
        chain.identification_accuracy * static_cast<double>(alternates.size())));
    for (std::size_t k = 0; k < alternates.size(); ++k) {
      alt_attacks.push_back(attack(alternates[k], k >= correct_count));
    }

    std::size_t tp = 0, fp = 0, correct = 0;
    for (const CohortAttack& a : null_attacks) {
      tp += a.tp;
      fp += a.fp;
    }
    for (const CohortAttack& a : alt_attacks) correct += a.correct;
    const double mismatch =
        tp + fp == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(tp + fp);

    LrtConfig lrt;
    lrt.delta = EffectiveDelta(chain.delta, mismatch);
    lrt.beacon_size = b2.size();
    lrt.alpha = chain.alpha;
    lrt.null_cohort_size = chain.cohort_size;
    const BeaconState target = BeaconState::FromDataset(population, b2);
    const BeaconQueryFn query = [&](std::size_t locus) {
      return target.Query(locus) == Answer::kYes;
    };
    auto traces = [&](const std::vector<CohortAttack>& cohort) {
      std::vector<AttackTrace> out_traces;
      for (const CohortAttack& a : cohort) {
        out_traces.push_back(a.inferred.empty()
                                 ? AttackTrace{}
                                 : OptimalAttack(a.inferred, mafs, query, lrt,
                                                 chain.max_queries));
      }
      return out_traces;
    };
    const std::vector<AttackTrace> null_traces = traces(null_attacks);
    const std::vector<AttackTrace> alt_traces = traces(alt_attacks);
    const std::vector<double> thresholds =
        CalibrateNull(null_traces, chain.alpha, chain.max_queries);
    PowerCurve curve = ComputePowerCurve(alt_traces, thresholds);
    curve.m = config.m;
    curve.p = static_cast<double>(correct) / static_cast<double>(alt_attacks.size());
    curve.alpha = chain.alpha;
    curve.delta = lrt.delta;
    for (std::size_t q = 0; q < chain.max_queries; ++q) {
      out.curve.power[q] += curve.power[q];
    }
    p_sum += curve.p;
    mismatch_sum += mismatch;
    delta_sum += lrt.delta;
    out.per_trial.push_back(std::move(curve));
  }

  const auto trials = static_cast<double>(config.trials);
  for (double& p : out.curve.power) p /= trials;
  out.measured_p = p_sum / trials;
  out.mismatch_rate = mismatch_sum / trials;
  out.effective_delta = delta_sum / trials;
  out.curve.m = config.m;
  out.curve.p = out.measured_p;
  out.curve.alpha = chain.alpha;
  out.curve.delta = out.effective_delta;
  return out;
}

double MidrankPercentile(double value, std::span<const double> baseline) {
  if (baseline.empty()) throw Error("empty baseline pool");
  double below = 0.0;
  for (double b : baseline) {
    if (b < value) {
      below += 1.0;
    } else if (b == value) {
      below += 0.5;
    }
  }
  return 100.0 * below / static_cast<double>(baseline.size());
}

double ReconstructionFraction(const PopulationDataset& population,
                              std::size_t donor,
                              std::span<const std::size_t> beacon,
                              std::span<const std::size_t> batch,
                              std::span<const std::size_t> reference,
                              const AttackOptions& options, std::uint64_t seed) {
  std::vector<std::size_t> joining{donor};
  joining.insert(joining.end(), batch.begin(), batch.end());
  const UpdateScenario scenario = SimulateUpdate(
      population, std::vector<std::size_t>(beacon.begin(), beacon.end()), joining,
      std::vector<std::size_t>(reference.begin(), reference.end()));
  const ReconstructionResult result = RunAttack(population, scenario, options, seed);
  const Genotype& g = population.donor(donor);
  const auto& universe = scenario.flips.loci;
  const std::size_t bin = OracleIdentify(result, g, universe);
  const MetricsRow row =
      PrecisionRecall(TruthOver(g, universe), result.BinIndicator(bin, universe));
  return row.recall.value_or(0.0);
}

RiskResult QuantifyRisk(const PopulationDataset& population, std::size_t donor,
                        std::span<const std::size_t> beacon,
                        std::span<const std::size_t> batch,
                        std::span<const std::size_t> baseline_pool,
                        std::span<const std::size_t> reference,
                        const AttackOptions& options, std::uint64_t seed) {
  if (baseline_pool.empty()) throw Error("empty baseline pool");
  const std::set<std::size_t> members(beacon.begin(), beacon.end());
  for (std::size_t b : baseline_pool) {
    if (members.count(b)) throw Error("baseline genome is a beacon member");
  }
  RiskResult risk;
  risk.reconstruction_fraction = ReconstructionFraction(
      population, donor, beacon, batch, reference, options, seed);
  for (std::size_t b : baseline_pool) {
    risk.baseline_fractions.push_back(ReconstructionFraction(
        population, b, beacon, batch, reference, options, seed));
  }
  risk.percentile =
      MidrankPercentile(risk.reconstruction_fraction, risk.baseline_fractions);
  return risk;
}

}  // namespace beacon_recon
