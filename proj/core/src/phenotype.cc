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

#include "beacon_recon/phenotype.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "beacon_recon/common.h"
#include "json.hpp"

namespace beacon_recon {
namespace {

double SquaredDistance(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

std::vector<double> FeatureRow(const Genotype& g,
                               std::span<const std::size_t> loci) {
  std::vector<double> row(loci.size());
  for (std::size_t f = 0; f < loci.size(); ++f) {
    row[f] = HasMinorAllele(g.values[loci[f]]) ? 1.0 : 0.0;
  }
  return row;
}

std::string SafeFileStem(const std::string& trait, std::size_t index) {
  std::string stem = std::to_string(index) + "_";
  for (char c : trait) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    stem.push_back(ok ? c : '_');
  }
  return stem;
}

}  // namespace

BalancedSet SmoteOversample(const FeatureMatrix& features,
                            std::span<const int> labels, std::size_t k,
                            std::uint64_t seed) {
  if (features.size() != labels.size()) {
    throw Error("features and labels differ in length");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("labels must be binary");
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error("single-class input");
  }
  BalancedSet out{features, {labels.begin(), labels.end()}};
  const int minority_label = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& minority = by_class[minority_label];
  const auto& majority = by_class[1 - minority_label];
  if (minority.size() == majority.size()) return out;

  // k nearest minority neighbours of each minority sample, ties by index.
  std::vector<std::vector<std::size_t>> neighbours(minority.size());
  for (std::size_t a = 0; a < minority.size(); ++a) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a == b) continue;
      dist.emplace_back(SquaredDistance(features[minority[a]], features[minority[b]]), b);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take),
                      dist.end());
    for (std::size_t t = 0; t < take; ++t) neighbours[a].push_back(dist[t].second);
  }

  Rng rng(seed);
  const std::size_t needed = majority.size() - minority.size();
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = rng.Below(minority.size());
    const auto& x = features[minority[a]];
    std::vector<double> synthetic = x;
    if (!neighbours[a].empty()) {
      const auto& other =
          features[minority[neighbours[a][rng.Below(neighbours[a].size())]]];
      const double lambda = rng.Uniform();
      for (std::size_t f = 0; f < x.size(); ++f) {
        synthetic[f] = x[f] + lambda * (other[f] - x[f]);
      }
    }
    out.features.push_back(std::move(synthetic));
    out.labels.push_back(minority_label);
  }
  return out;
}

double F1Macro(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw Error("length mismatch");
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c;
      const bool p = predicted[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    const double denom = 2 * tp + fp + fn;
    total += denom == 0 ? 1.0 : 2 * tp / denom;
  }
  return total / 2.0;
}

double RetentionThreshold(std::size_t samples) {
  if (samples == 0) throw Error("no samples");
  return kRandomGuessF1Macro + kGateZ * 0.5 / std::sqrt(static_cast<double>(samples));
}

TraitModel TrainTraitModel(const PopulationDataset& training,
                           const std::string& trait,
                           std::span<const std::size_t> feature_loci,
                           const TraitTrainingConfig& config) {
  for (std::size_t l : feature_loci) {
    if (l >= training.num_snps()) throw Error("feature locus outside panel");
  }
  FeatureMatrix x;
  std::vector<int> y;
  for (const Genotype& g : training.genotypes()) {
    auto donor = training.phenotypes().find(g.donor_id);
    if (donor == training.phenotypes().end()) continue;
    auto value = donor->second.find(trait);
    if (value == donor->second.end()) continue;
    x.push_back(FeatureRow(g, feature_loci));
    y.push_back(value->second);
  }
  const std::size_t positives =
      static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  const std::size_t negatives = y.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error("degenerate trait '" + trait + "'");
  }
  if (std::min(positives, negatives) < 2) {
    throw Error("too few samples for stratified folds on trait '" + trait + "'");
  }
  const std::size_t folds =
      std::min({config.folds, positives, negatives});

  Rng rng(config.seed);
  double f1_sum = 0.0;
  const std::size_t repeats = std::max<std::size_t>(1, config.repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<std::size_t> fold_of(y.size());
    for (int c = 0; c < 2; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == c) members.push_back(i);
      }
      rng.Shuffle(members);
      for (std::size_t p = 0; p < members.size(); ++p) {
        fold_of[members[p]] = p % folds;
      }
    }
    std::vector<int> predicted(y.size(), 0);
    for (std::size_t f = 0; f < folds; ++f) {
      FeatureMatrix train_x;
      std::vector<int> train_y;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (fold_of[i] == f) continue;
        train_x.push_back(x[i]);
        train_y.push_back(y[i]);
      }
      BalancedSet balanced =
          SmoteOversample(train_x, train_y, config.smote_k, rng.Fork());
      RandomForest forest;
      forest.Fit(balanced.features, balanced.labels, rng.Fork(), config.forest);
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (fold_of[i] == f) predicted[i] = forest.Predict(x[i]);
      }
    }
    f1_sum += F1Macro(y, predicted);
  }

  TraitModel model;
  model.trait = trait;
  model.f1_macro = f1_sum / static_cast<double>(repeats);
  model.retained = model.f1_macro > RetentionThreshold(y.size());
  BalancedSet balanced = SmoteOversample(x, y, config.smote_k, rng.Fork());
  model.forest.Fit(balanced.features, balanced.labels, rng.Fork(), config.forest);
  return model;
}

EnsembleClassifier::EnsembleClassifier(std::vector<std::size_t> feature_loci,
                                       std::vector<TraitModel> models)
    : feature_loci_(std::move(feature_loci)) {
  for (TraitModel& m : models) {
    if (m.retained) models_.push_back(std::move(m));
  }
}

void EnsembleClassifier::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["feature_loci"] = feature_loci_;
  manifest["models"] = nlohmann::json::array();
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const TraitModel& m = models_[i];
    const std::string file = SafeFileStem(m.trait, i) + ".forest.json";
    std::ofstream out(dir / file);
    if (!out) throw Error("cannot write " + (dir / file).string());
    out << m.forest.Serialize();
    manifest["models"].push_back({{"trait", m.trait},
                                  {"f1_macro", m.f1_macro},
                                  {"retained", m.retained},
                                  {"file", file}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

EnsembleClassifier EnsembleClassifier::Load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("missing manifest in " + dir.string());
  try {
    const auto manifest = nlohmann::json::parse(in);
    std::vector<TraitModel> models;
    for (const auto& entry : manifest.at("models")) {
      TraitModel m;
      m.trait = entry.at("trait").get<std::string>();
      m.f1_macro = entry.at("f1_macro").get<double>();
      m.retained = entry.at("retained").get<bool>();
      std::ifstream forest_in(dir / entry.at("file").get<std::string>());
      if (!forest_in) throw Error("missing forest file for trait " + m.trait);
      std::stringstream buffer;
      buffer << forest_in.rdbuf();
      m.forest = RandomForest::Deserialize(buffer.str());
      models.push_back(std::move(m));
    }
    return EnsembleClassifier(
        manifest.at("feature_loci").get<std::vector<std::size_t>>(),
        std::move(models));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model manifest: ") + e.what());
  }
}

EnsembleClassifier TrainEnsemble(const PopulationDataset& training,
                                 std::span<const std::string> traits,
                                 std::span<const std::size_t> feature_loci,
                                 const TraitTrainingConfig& config) {
  std::vector<TraitModel> models;
  Rng rng(config.seed);
  for (const std::string& trait : traits) {
    TraitTrainingConfig trait_config = config;
    trait_config.seed = rng.Fork();
    try {
      models.push_back(TrainTraitModel(training, trait, feature_loci, trait_config));
    } catch (const Error&) {
      // Untrainable trait on this training set; it simply contributes nothing.
    }
  }
  return EnsembleClassifier({feature_loci.begin(), feature_loci.end()},
                            std::move(models));
}

double EnsembleScore(const EnsembleClassifier& ensemble,
                     std::span<const std::uint8_t> features,
                     const PhenotypeProfile& profile) {
  if (ensemble.empty()) throw Error("empty ensemble");
  if (features.size() != ensemble.feature_loci().size()) {
    throw Error("candidate does not match ensemble feature loci");
  }
  std::vector<double> x(features.begin(), features.end());
  double score = 0.0;
  bool usable = false;
  for (const TraitModel& m : ensemble.models()) {
    auto it = profile.find(m.trait);
    if (it == profile.end()) continue;
    usable = true;
    const double p1 = m.forest.PredictProbability(x);
    score += it->second == 1 ? p1 : 1.0 - p1;
  }
  if (!usable) throw Error("no usable trait");
  return score;
}

std::size_t IdentifyVictim(const ReconstructionResult& bins,
                           const PhenotypeProfile& profile,
                           const EnsembleClassifier& ensemble) {
  if (bins.bins.empty()) throw Error("no bins to match");
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t b = 0; b < bins.bins.size(); ++b) {
    const double score =
        EnsembleScore(ensemble, bins.BinIndicator(b, ensemble.feature_loci()), profile);
    if (score > best_score) {
      best_score = score;
      best = b;
    }
  }
  return best;
}

PhenotypeTable ParsePhenotypeTable(std::istream& in) {
  PhenotypeTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string donor, trait, value;
    if (!std::getline(fields, donor, '\t') || !std::getline(fields, trait, '\t') ||
        !std::getline(fields, value, '\t') || donor.empty() || trait.empty()) {
      throw Error("malformed phenotype line " + std::to_string(line_no));
    }
    if (value != "0" && value != "1") {
      throw Error("phenotype value must be 0 or 1 on line " +
                  std::to_string(line_no));
    }
    table[donor][trait] = value == "1";
  }
  return table;
}

void WritePhenotypeTable(const PhenotypeTable& table, std::ostream& out) {
  for (const auto& [donor, traits] : table) {
    for (const auto& [trait, value] : traits) {
      out << donor << '\t' << trait << '\t' << value << '\n';
    }
  }
}

PhenotypeProfile ProfileOf(const PhenotypeTable& table,
                           const std::string& donor_id) {
  auto it = table.find(donor_id);
  if (it == table.end()) return {};
  return it->second;
}

}  // namespace beacon_recon
