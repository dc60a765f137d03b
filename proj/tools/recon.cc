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

// recon: command-line front end for the reconstruction experiments.
//
//   recon sweep --attack spectral --n 50 --m 3 --vary m --values 2,3,5,10 ...
//   recon chain --b1 b1.txt --b2 b2.txt --m 2 --max-queries 40 ...
//   recon risk --donor d17 --s 20 ...
//   recon serve --bind 127.0.0.1:7000 --dataset genotypes.tsv
//
// Every option may also be given in a key=value file passed with --config;
// command-line values take precedence.

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beacon_recon/beacon.h"
#include "beacon_recon/common.h"
#include "beacon_recon/experiment.h"
#include "beacon_recon/scenario.h"
#include "beacon_recon/service.h"

namespace br = beacon_recon;

namespace {

constexpr char kDefaultPopulation[] =
    "synthetic:donors=3000,blocks=200,block_size=5,maf_min=0.002,"
    "maf_max=0.05,agreement=0.9";

struct Flags {
  std::string population = kDefaultPopulation;
  std::string maf_path;
  std::string phenotype_path;
  std::string out;
  std::string attack = "spectral";
  std::string identification = "oracle";
  std::size_t threads = 0;

  std::string vary = "m";
  std::vector<std::size_t> values;
  std::string summary;
  bool untie_m_prime = false;

  std::string b1_path;
  std::string b2_path;

  std::string donor;

  std::string bind = "127.0.0.1:7000";
  std::string dataset;
  std::size_t members = 0;
};

std::vector<std::string> ReadIdList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw br::Error("cannot open id list '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(begin, end - begin + 1));
  }
  return ids;
}

std::optional<std::string> OptionalPath(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return path;
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw br::Error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int RunSweepCommand(const Flags& flags, br::ExperimentConfig config) {
  const br::PopulationDataset population =
      br::LoadPopulation(flags.population, config.seed, OptionalPath(flags.maf_path),
                         OptionalPath(flags.phenotype_path));
  br::SweepSpec sweep;
  sweep.axis = br::ParseSweepAxis(flags.vary);
  sweep.tie_m_prime = !flags.untie_m_prime;
  sweep.values = flags.values;
  if (sweep.values.empty()) {
    switch (sweep.axis) {
      case br::SweepAxis::kM:
        sweep.values = {config.m};
        break;
      case br::SweepAxis::kMPrime:
        sweep.values = {config.m_prime};
        break;
      case br::SweepAxis::kN:
        sweep.values = {config.n};
        break;
    }
  }
  const auto rows = br::RunSweep(population, config, sweep, flags.threads);
  Output out(flags.out);
  br::WriteMetricsCsv(rows, out.stream());
  const auto summaries = br::Summarize(rows);
  if (!flags.summary.empty()) {
    Output summary(flags.summary);
    br::WriteSummaryCsv(summaries, summary.stream());
  } else {
    br::WriteSummaryCsv(summaries, std::cerr);
  }
  return 0;
}

int RunChainCommand(const Flags& flags, br::ExperimentConfig config) {
  const br::PopulationDataset population =
      br::LoadPopulation(flags.population, config.seed, OptionalPath(flags.maf_path),
                         OptionalPath(flags.phenotype_path));
  if (!flags.b1_path.empty()) config.chain.b1_ids = ReadIdList(flags.b1_path);
  if (!flags.b2_path.empty()) config.chain.b2_ids = ReadIdList(flags.b2_path);
  const br::ChainedAttackResult result = br::RunChainedAttack(population, config);
  Output out(flags.out);
  br::WritePowerCurveCsv(result.curve, out.stream());
  std::cerr << "measured_p=" << result.measured_p
            << " mismatch_rate=" << result.mismatch_rate
            << " effective_delta=" << result.effective_delta << '\n';
  return 0;
}

int RunRiskCommand(const Flags& flags, const br::ExperimentConfig& config) {
  const br::PopulationDataset population =
      br::LoadPopulation(flags.population, config.seed, OptionalPath(flags.maf_path));
  const auto donor = population.FindDonor(flags.donor);
  if (!donor) throw br::Error("unknown donor '" + flags.donor + "'");
  if (config.risk_cohort == 0) throw br::Error("empty baseline pool");
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < population.num_donors(); ++i) {
    if (i != *donor) others.push_back(i);
  }
  br::Rng rng(config.seed);
  rng.Shuffle(others);
  const std::size_t need = config.n + (config.m - 1) + config.risk_cohort + 1;
  if (others.size() < need) throw br::Error("insufficient donors in source population");
  auto take = [&, next = std::size_t{0}](std::size_t k) mutable {
    std::vector<std::size_t> out(others.begin() + static_cast<std::ptrdiff_t>(next),
                                 others.begin() + static_cast<std::ptrdiff_t>(next + k));
    next += k;
    return out;
  };
  const auto beacon = take(config.n);
  const auto batch = take(config.m - 1);
  const auto baseline = take(config.risk_cohort);
  auto reference = take(others.size() - need + 1);
  std::sort(reference.begin(), reference.end());
  const br::RiskResult risk =
      br::QuantifyRisk(population, *donor, beacon, batch, baseline, reference,
                       config.MakeAttackOptions(), config.seed);
  Output out(flags.out);
  out.stream() << "donor,reconstruction_fraction,percentile,s\n"
               << flags.donor << ',' << risk.reconstruction_fraction << ','
               << risk.percentile << ',' << risk.baseline_fractions.size() << '\n';
  return 0;
}

int RunServeCommand(const Flags& flags, const br::ExperimentConfig& config) {
  const std::string& source = flags.dataset.empty() ? flags.population : flags.dataset;
  const br::PopulationDataset population =
      br::LoadPopulation(source, config.seed, OptionalPath(flags.maf_path));
  std::size_t count = flags.members == 0 ? population.num_donors() : flags.members;
  if (count > population.num_donors()) {
    throw br::Error("insufficient donors in source population");
  }
  std::vector<std::size_t> members(count);
  for (std::size_t i = 0; i < count; ++i) members[i] = i;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  br::BeaconServer server(br::BeaconState::FromDataset(population, members),
                          flags.bind);
  std::cout << "serving " << count << " members, " << population.num_snps()
            << " loci on " << server.endpoint() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.Stop();
  std::cerr << "stopped after " << server.requests_served() << " requests\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genome reconstruction attacks against dynamic beacons"};
  app.set_config("--config", "", "key=value file mirroring the options");
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  br::ExperimentConfig config;

  app.add_option("--population", flags.population,
                 "Genotype matrix path or synthetic:key=value,... spec")
      ->capture_default_str();
  app.add_option("--maf", flags.maf_path, "MAF sidecar for the genotype matrix");
  app.add_option("--phenotypes", flags.phenotype_path,
                 "donor<TAB>trait<TAB>value phenotype table");
  app.add_option("--out", flags.out, "Output file (default stdout)");
  app.add_option("--attack", flags.attack, "baseline | greedy | spectral | fuzzy")
      ->capture_default_str();
  app.add_option("--n", config.n, "Beacon size before the update")->capture_default_str();
  app.add_option("--m", config.m, "Newcomers in the update")->capture_default_str();
  app.add_option("--m-prime", config.m_prime, "Number of bins")->capture_default_str();
  app.add_option("--tau", config.tau, "Greedy seeding MAF threshold")->capture_default_str();
  app.add_flag("--greedy-probabilistic", config.greedy_probabilistic,
               "Greedy bin choice proportional to similarity");
  app.add_option("--fuzzy-threshold", config.fuzzy_threshold,
                 "Fuzzy membership threshold (default 1/m')");
  app.add_option("--trials", config.trials, "Trials per configuration")
      ->capture_default_str();
  app.add_option("--seed", config.seed, "Base seed")->capture_default_str();
  app.add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  app.add_option("--identification", flags.identification, "oracle | phenotype")
      ->capture_default_str();
  app.add_option("--rf-trees", config.training.forest.num_trees, "Trees per forest")
      ->capture_default_str();
  app.add_option("--cv-folds", config.training.folds)->capture_default_str();
  app.add_option("--cv-repeats", config.training.repeats)->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Precision/recall sweep");
  sweep->add_option("--vary", flags.vary, "m | m_prime | n")->capture_default_str();
  sweep->add_option("--values", flags.values, "Comma-separated sweep values")
      ->delimiter(',');
  sweep->add_option("--summary", flags.summary, "Write per-value means here");
  sweep->add_flag("--untie-m-prime", flags.untie_m_prime,
                  "Keep m' fixed while sweeping m");

  CLI::App* chain = app.add_subcommand("chain", "Reconstruction + membership inference");
  chain->add_option("--b1", flags.b1_path, "File of B1 donor ids, one per line");
  chain->add_option("--b2", flags.b2_path, "File of B2 donor ids, one per line");
  chain->add_option("--b1-size", config.chain.b1_size)->capture_default_str();
  chain->add_option("--b2-size", config.chain.b2_size)->capture_default_str();
  chain->add_option("--cohort", config.chain.cohort_size, "Null and alternate cohort size")
      ->capture_default_str();
  chain->add_option("--max-queries", config.chain.max_queries)->capture_default_str();
  chain->add_option("--alpha", config.chain.alpha)->capture_default_str();
  chain->add_option("--delta", config.chain.delta, "Base mismatch rate")
      ->capture_default_str();
  chain->add_option("--p", config.chain.identification_accuracy,
                    "Oracle-mode identification accuracy")
      ->capture_default_str();
  chain->add_flag("--alternate-nonmembers", config.chain.alternate_from_nonmembers,
                  "Draw the alternate cohort from B2 non-members");

  CLI::App* risk = app.add_subcommand("risk", "Per-donor reconstruction risk percentile");
  risk->add_option("--donor", flags.donor, "Donor id")->required();
  risk->add_option("--s", config.risk_cohort, "Baseline cohort size")
      ->capture_default_str();

  CLI::App* serve = app.add_subcommand("serve", "Serve a beacon over TCP");
  serve->add_option("--bind", flags.bind, "host:port")->capture_default_str();
  serve->add_option("--dataset", flags.dataset, "Genotype matrix or synthetic spec");
  serve->add_option("--members", flags.members, "Leading donors to admit (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    config.attack = br::ParseAttackKind(flags.attack);
    if (flags.identification == "oracle") {
      config.identification = br::Identification::kOracle;
    } else if (flags.identification == "phenotype") {
      config.identification = br::Identification::kPhenotype;
    } else {
      throw br::Error("unknown identification mode '" + flags.identification + "'");
    }
    config.training.seed = config.seed;
    config.Validate();
    if (sweep->parsed()) return RunSweepCommand(flags, config);
    if (chain->parsed()) return RunChainCommand(flags, config);
    if (risk->parsed()) return RunRiskCommand(flags, config);
    if (serve->parsed()) return RunServeCommand(flags, config);
  } catch (const br::Error& e) {
    std::cerr << "recon: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
