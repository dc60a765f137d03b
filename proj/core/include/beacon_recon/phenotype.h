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

// Victim identification from public phenotypes: per-trait random-forest
// models over flip-locus minor-presence features, gated on cross-validated
// F1-macro, combined into an additive likelihood ensemble.

#ifndef BEACON_RECON_PHENOTYPE_H_
#define BEACON_RECON_PHENOTYPE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "beacon_recon/genotype.h"
#include "beacon_recon/random_forest.h"
#include "beacon_recon/reconstruction.h"

namespace beacon_recon {

// trait -> 0/1; unreported traits are absent.
using PhenotypeProfile = std::map<std::string, int>;

// Chance level for balanced binary labels.
inline constexpr double kRandomGuessF1Macro = 0.5;
// One-sided z for the retention gate.
inline constexpr double kGateZ = 2.326;

// Smallest cross-validated F1-macro that counts as better than random
// guessing on `samples` labelled donors: 0.5 plus kGateZ null standard errors.
double RetentionThreshold(std::size_t samples);

struct BalancedSet {
  FeatureMatrix features;
  std::vector<int> labels;
};

// Appends synthetic minority samples x + lambda * (x' - x) until both classes
// have equal counts. x is a minority sample, x' one of its k nearest minority
// neighbours, lambda ~ U[0, 1]. Original samples are kept in order at the
// front. A lone minority sample is duplicated.
BalancedSet SmoteOversample(const FeatureMatrix& features,
                            std::span<const int> labels, std::size_t k,
                            std::uint64_t seed);

// Macro-averaged F1 over labels {0, 1}. A class absent from both truth and
// prediction scores 1.
double F1Macro(std::span<const int> truth, std::span<const int> predicted);

struct TraitTrainingConfig {
  std::size_t folds = 5;
  std::size_t repeats = 3;
  std::size_t smote_k = 5;
  std::uint64_t seed = 0;
  ForestOptions forest;
};

struct TraitModel {
  std::string trait;
  RandomForest forest;
  double f1_macro = 0.0;  // cross-validated
  bool retained = false;
};

// Trains on donors of `training` that report `trait`, using minor-presence
// bits at `feature_loci`. SMOTE is applied to training folds only.
TraitModel TrainTraitModel(const PopulationDataset& training,
                           const std::string& trait,
                           std::span<const std::size_t> feature_loci,
                           const TraitTrainingConfig& config);

class EnsembleClassifier {
 public:
  EnsembleClassifier() = default;
  // Keeps only retained models.
  EnsembleClassifier(std::vector<std::size_t> feature_loci,
                     std::vector<TraitModel> models);

  const std::vector<std::size_t>& feature_loci() const { return feature_loci_; }
  const std::vector<TraitModel>& models() const { return models_; }
  bool empty() const { return models_.empty(); }

  // Directory bundle: manifest.json plus one forest file per trait.
  void Save(const std::filesystem::path& dir) const;
  static EnsembleClassifier Load(const std::filesystem::path& dir);

 private:
  std::vector<std::size_t> feature_loci_;
  std::vector<TraitModel> models_;
};

// Trains one model per trait and gates them; traits that cannot be trained
// (constant, too few samples) are skipped.
EnsembleClassifier TrainEnsemble(const PopulationDataset& training,
                                 std::span<const std::string> traits,
                                 std::span<const std::size_t> feature_loci,
                                 const TraitTrainingConfig& config);

// Sum over retained models with a reported trait of the probability the model
// assigns to the reported value. `features` is the candidate's
// minor-presence indicator over the ensemble's feature loci.
double EnsembleScore(const EnsembleClassifier& ensemble,
                     std::span<const std::uint8_t> features,
                     const PhenotypeProfile& profile);

// Argmax of EnsembleScore over bins; ties go to the lowest index.
std::size_t IdentifyVictim(const ReconstructionResult& bins,
                           const PhenotypeProfile& profile,
                           const EnsembleClassifier& ensemble);

// Parses `donor_id<TAB>trait<TAB>value` rows with value in {0, 1}.
PhenotypeTable ParsePhenotypeTable(std::istream& in);
void WritePhenotypeTable(const PhenotypeTable& table, std::ostream& out);

PhenotypeProfile ProfileOf(const PhenotypeTable& table,
                           const std::string& donor_id);

}  // namespace beacon_recon

#endif  // BEACON_RECON_PHENOTYPE_H_
