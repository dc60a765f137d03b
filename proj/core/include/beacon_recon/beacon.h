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

// Dynamic beacon simulator. A beacon answers, for one panel locus, whether any
// current member carries at least one minor allele there. Membership changes
// in atomic batches that advance a version label.

#ifndef BEACON_RECON_BEACON_H_
#define BEACON_RECON_BEACON_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "beacon_recon/genotype.h"

namespace beacon_recon {

enum class Answer : std::uint8_t { kNo = 0, kYes = 1 };

struct Snapshot {
  std::uint64_t version = 0;
  std::vector<Answer> answers;  // aligned to the panel
  std::size_t member_count = 0;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

enum class FlipDirection { kNoToYes, kYesToNo };

struct FlipSet {
  FlipDirection direction = FlipDirection::kNoToYes;
  std::vector<std::size_t> loci;  // ascending panel indices

  std::size_t beta() const { return loci.size(); }
};

struct UpdateMetadata {
  std::size_t added = 0;
  std::size_t removed = 0;
};

class BeaconState {
 public:
  using Panel = std::shared_ptr<const std::vector<SnpDef>>;

  explicit BeaconState(Panel panel, std::vector<Genotype> members = {},
                       std::uint64_t version = 0);

  // Beacon whose members are the given rows of a dataset.
  static BeaconState FromDataset(const PopulationDataset& dataset,
                                 std::span<const std::size_t> member_indices,
                                 std::uint64_t version = 0);

  Answer Query(std::size_t locus) const;
  Snapshot TakeSnapshot() const;

  // Returns the next version. Removals are applied before additions; the
  // batch is rejected as a whole when an id is unknown or already present.
  BeaconState Update(std::span<const Genotype> add,
                     std::span<const std::string> remove) const;

  const Panel& panel() const { return panel_; }
  const std::vector<Genotype>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  std::uint64_t version() const { return version_; }
  const UpdateMetadata& last_update() const { return last_update_; }
  bool Contains(const std::string& donor_id) const {
    return index_.count(donor_id) != 0;
  }

  // Hash of version, member ids and carrier counts.
  std::uint64_t Fingerprint() const;

 private:
  void AddCarriers(const Genotype& g, int sign);

  Panel panel_;
  std::vector<Genotype> members_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint32_t> carriers_;
  std::uint64_t version_ = 0;
  UpdateMetadata last_update_;
};

// Free-function forms of the beacon operations.
inline Answer Query(const BeaconState& beacon, std::size_t locus) {
  return beacon.Query(locus);
}
inline Snapshot TakeSnapshot(const BeaconState& beacon) {
  return beacon.TakeSnapshot();
}

// Loci whose answer moved in the given direction between two snapshots of the
// same panel.
FlipSet ComputeFlipSet(const Snapshot& earlier, const Snapshot& later,
                       FlipDirection direction);

}  // namespace beacon_recon

#endif  // BEACON_RECON_BEACON_H_
