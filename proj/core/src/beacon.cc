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

#include "beacon_recon/beacon.h"

#include <unordered_set>

#include "beacon_recon/common.h"

namespace beacon_recon {

BeaconState::BeaconState(Panel panel, std::vector<Genotype> members,
                         std::uint64_t version)
    : panel_(std::move(panel)), version_(version) {
  if (!panel_) throw Error("beacon requires a panel");
  carriers_.assign(panel_->size(), 0);
  members_.reserve(members.size());
  for (Genotype& g : members) {
    if (g.values.size() != panel_->size()) {
      throw Error("member '" + g.donor_id + "' does not match panel length");
    }
    if (!index_.emplace(g.donor_id, members_.size()).second) {
      throw Error("duplicate addition of donor '" + g.donor_id + "'");
    }
    AddCarriers(g, +1);
    members_.push_back(std::move(g));
  }
}

BeaconState BeaconState::FromDataset(
    const PopulationDataset& dataset,
    std::span<const std::size_t> member_indices, std::uint64_t version) {
  auto panel = std::make_shared<const std::vector<SnpDef>>(dataset.panel());
  std::vector<Genotype> members;
  members.reserve(member_indices.size());
  for (std::size_t i : member_indices) {
    if (i >= dataset.num_donors()) throw Error("donor index out of range");
    members.push_back(dataset.donor(i));
  }
  return BeaconState(std::move(panel), std::move(members), version);
}

void BeaconState::AddCarriers(const Genotype& g, int sign) {
  for (std::size_t j = 0; j < g.values.size(); ++j) {
    if (HasMinorAllele(g.values[j])) {
      carriers_[j] = static_cast<std::uint32_t>(
          static_cast<std::int64_t>(carriers_[j]) + sign);
    }
  }
}

Answer BeaconState::Query(std::size_t locus) const {
  if (locus >= carriers_.size()) {
    throw Error("invalid locus " + std::to_string(locus));
  }
  return carriers_[locus] > 0 ? Answer::kYes : Answer::kNo;
}

Snapshot BeaconState::TakeSnapshot() const {
  Snapshot snap;
  snap.version = version_;
  snap.member_count = members_.size();
  snap.answers.resize(carriers_.size());
  for (std::size_t j = 0; j < carriers_.size(); ++j) {
    snap.answers[j] = carriers_[j] > 0 ? Answer::kYes : Answer::kNo;
  }
  return snap;
}

BeaconState BeaconState::Update(std::span<const Genotype> add,
                                std::span<const std::string> remove) const {
  std::unordered_set<std::string> removing;
  for (const std::string& id : remove) {
    if (!Contains(id)) throw Error("unknown removal id '" + id + "'");
    if (!removing.insert(id).second) {
      throw Error("donor '" + id + "' removed twice");
    }
  }
  std::unordered_set<std::string> adding;
  for (const Genotype& g : add) {
    const bool still_member = Contains(g.donor_id) && !removing.count(g.donor_id);
    if (still_member || !adding.insert(g.donor_id).second) {
      throw Error("duplicate addition of donor '" + g.donor_id + "'");
    }
    if (g.values.size() != panel_->size()) {
      throw Error("donor '" + g.donor_id + "' does not match panel length");
    }
  }

  BeaconState next(panel_, {}, version_ + 1);
  next.members_.reserve(members_.size() - removing.size() + add.size());
  next.carriers_ = carriers_;
  for (const Genotype& g : members_) {
    if (removing.count(g.donor_id)) {
      next.AddCarriers(g, -1);
      continue;
    }
    next.index_.emplace(g.donor_id, next.members_.size());
    next.members_.push_back(g);
  }
  for (const Genotype& g : add) {
    next.index_.emplace(g.donor_id, next.members_.size());
    next.AddCarriers(g, +1);
    next.members_.push_back(g);
  }
  next.last_update_ = UpdateMetadata{add.size(), remove.size()};
  return next;
}

std::uint64_t BeaconState::Fingerprint() const {
  Fnv1a h;
  h.AddValue(version_);
  for (const Genotype& g : members_) h.AddString(g.donor_id);
  h.Add(carriers_.data(), carriers_.size() * sizeof(std::uint32_t));
  return h.digest();
}

FlipSet ComputeFlipSet(const Snapshot& earlier, const Snapshot& later,
                       FlipDirection direction) {
  if (earlier.answers.size() != later.answers.size()) {
    throw Error("panel mismatch between snapshots");
  }
  const Answer from =
      direction == FlipDirection::kNoToYes ? Answer::kNo : Answer::kYes;
  const Answer to =
      direction == FlipDirection::kNoToYes ? Answer::kYes : Answer::kNo;
  FlipSet flips;
  flips.direction = direction;
  for (std::size_t j = 0; j < earlier.answers.size(); ++j) {
    if (earlier.answers[j] == from && later.answers[j] == to) {
      flips.loci.push_back(j);
    }
  }
  return flips;
}

}  // namespace beacon_recon
