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

#include <algorithm>
#include <memory>

#include <gtest/gtest.h>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

BeaconState::Panel MakePanel(std::size_t n) {
  auto panel = std::make_shared<std::vector<SnpDef>>();
  for (std::size_t j = 0; j < n; ++j) {
    panel->push_back({"s" + std::to_string(j), "1", 10 * (j + 1), 0.1});
  }
  return panel;
}

Snapshot MakeSnapshot(std::vector<Answer> answers) {
  Snapshot s;
  s.answers = std::move(answers);
  return s;
}

constexpr Answer Y = Answer::kYes;
constexpr Answer N = Answer::kNo;

TEST(BeaconQueryTest, AnswersExistential) {
  const auto panel = MakePanel(1);
  EXPECT_EQ(Query(BeaconState(panel, {{"a", {0}}, {"b", {0}}}), 0), N);
  EXPECT_EQ(Query(BeaconState(panel, {{"a", {0}}, {"b", {2}}}), 0), Y);
  EXPECT_EQ(Query(BeaconState(panel), 0), N);
  EXPECT_EQ(Query(BeaconState(panel, {{"a", {kMissing}}}), 0), N);
  EXPECT_THROW(Query(BeaconState(panel), 1), Error);
}

TEST(BeaconSnapshotTest, Examples) {
  const auto panel = MakePanel(3);
  const Snapshot empty = TakeSnapshot(BeaconState(panel));
  EXPECT_EQ(empty.answers, (std::vector<Answer>{N, N, N}));
  EXPECT_EQ(empty.member_count, 0u);
  const BeaconState one(panel, {{"a", {1, 0, 2}}});
  EXPECT_EQ(TakeSnapshot(one).answers, (std::vector<Answer>{Y, N, Y}));
  EXPECT_EQ(TakeSnapshot(one), TakeSnapshot(one));
}

TEST(BeaconUpdateTest, CountsAndVersions) {
  const auto panel = MakePanel(2);
  std::vector<Genotype> members;
  for (int i = 0; i < 50; ++i) members.push_back({"m" + std::to_string(i), {0, 0}});
  const BeaconState base(panel, members, 4);
  const std::vector<Genotype> add{{"new", {0, 1}}};
  const BeaconState grown = base.Update(add, {});
  EXPECT_EQ(grown.size(), 51u);
  EXPECT_EQ(grown.version(), 5u);
  EXPECT_EQ(grown.last_update().added, 1u);
  const FlipSet flips = ComputeFlipSet(base.TakeSnapshot(), grown.TakeSnapshot(),
                                       FlipDirection::kNoToYes);
  EXPECT_EQ(flips.loci, (std::vector<std::size_t>{1}));
  EXPECT_EQ(flips.beta(), 1u);
}

TEST(BeaconUpdateTest, RemovingOnlyDonorEmptiesBeacon) {
  const auto panel = MakePanel(2);
  const BeaconState one(panel, {{"a", {1, 2}}});
  const std::vector<std::string> remove{"a"};
  const BeaconState empty = one.Update({}, remove);
  EXPECT_EQ(empty.size(), 0u);
  EXPECT_EQ(empty.last_update().removed, 1u);
  EXPECT_EQ(empty.TakeSnapshot().answers, (std::vector<Answer>{N, N}));
}

TEST(BeaconUpdateTest, RejectsBadBatches) {
  const auto panel = MakePanel(1);
  const BeaconState one(panel, {{"a", {1}}});
  const std::vector<std::string> unknown{"zz"};
  EXPECT_THROW(one.Update({}, unknown), Error);
  const std::vector<Genotype> duplicate{{"a", {0}}};
  EXPECT_THROW(one.Update(duplicate, {}), Error);
  // Removal is applied first, so re-adding in the same batch is allowed.
  const std::vector<std::string> remove{"a"};
  EXPECT_EQ(one.Update(duplicate, remove).Query(0), N);
}

TEST(FlipSetTest, HandComparisons) {
  EXPECT_EQ(ComputeFlipSet(MakeSnapshot({N, N, Y}), MakeSnapshot({Y, N, Y}),
                           FlipDirection::kNoToYes)
                .loci,
            (std::vector<std::size_t>{0}));
  EXPECT_EQ(ComputeFlipSet(MakeSnapshot({Y, Y}), MakeSnapshot({Y, N}),
                           FlipDirection::kYesToNo)
                .loci,
            (std::vector<std::size_t>{1}));
  for (auto dir : {FlipDirection::kNoToYes, FlipDirection::kYesToNo}) {
    EXPECT_TRUE(ComputeFlipSet(MakeSnapshot({Y, N}), MakeSnapshot({Y, N}), dir).loci.empty());
  }
  EXPECT_THROW(ComputeFlipSet(MakeSnapshot({Y}), MakeSnapshot({Y, N}),
                              FlipDirection::kNoToYes),
               Error);
}

Genotype RandomGenotype(Rng& rng, const std::string& id, std::size_t loci) {
  Genotype g{id, {}};
  for (std::size_t j = 0; j < loci; ++j) {
    g.values.push_back(rng.Bernoulli(0.15) ? static_cast<std::int8_t>(1 + rng.Below(2)) : 0);
  }
  return g;
}

TEST(BeaconPropertyTest, MembershipIsMonotone) {
  Rng rng(77);
  const std::size_t loci = 12;
  const auto panel = MakePanel(loci);
  BeaconState state(panel);
  int next_id = 0;
  for (int step = 0; step < 300; ++step) {
    const Snapshot before = state.TakeSnapshot();
    if (state.size() == 0 || rng.Bernoulli(0.55)) {
      const std::vector<Genotype> add{RandomGenotype(rng, "g" + std::to_string(next_id++), loci)};
      state = state.Update(add, {});
      EXPECT_TRUE(ComputeFlipSet(before, state.TakeSnapshot(), FlipDirection::kYesToNo)
                      .loci.empty());
    } else {
      const std::vector<std::string> remove{
          state.members()[rng.Below(state.size())].donor_id};
      state = state.Update({}, remove);
      EXPECT_TRUE(ComputeFlipSet(before, state.TakeSnapshot(), FlipDirection::kNoToYes)
                      .loci.empty());
    }
  }
}

TEST(BeaconPropertyTest, SingleNewcomerFlipsAreItsUnansweredSupport) {
  Rng rng(5);
  const std::size_t loci = 8;
  const auto panel = MakePanel(loci);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Genotype> members;
    const std::size_t n = rng.Below(4);
    for (std::size_t i = 0; i < n; ++i) {
      members.push_back(RandomGenotype(rng, "m" + std::to_string(i), loci));
    }
    const BeaconState before(panel, members);
    const std::vector<Genotype> add{RandomGenotype(rng, "v", loci)};
    const BeaconState after = before.Update(add, {});
    const Snapshot s0 = before.TakeSnapshot();
    std::vector<std::size_t> expected;
    for (std::size_t j = 0; j < loci; ++j) {
      if (HasMinorAllele(add[0].values[j]) && s0.answers[j] == N) expected.push_back(j);
    }
    ASSERT_EQ(ComputeFlipSet(s0, after.TakeSnapshot(), FlipDirection::kNoToYes).loci,
              expected);
  }
}

TEST(BeaconStateTest, FromDatasetAndFingerprint) {
  const PopulationDataset d({{"s0", "1", 1, 0.1}, {"s1", "1", 2, 0.1}},
                            {{"a", {0, 1}}, {"b", {1, 0}}, {"c", {0, 0}}});
  const std::vector<std::size_t> rows{0, 2};
  const BeaconState b = BeaconState::FromDataset(d, rows, 3);
  EXPECT_TRUE(b.Contains("a"));
  EXPECT_FALSE(b.Contains("b"));
  EXPECT_EQ(b.TakeSnapshot().answers, (std::vector<Answer>{N, Y}));
  EXPECT_EQ(b.Fingerprint(), BeaconState::FromDataset(d, rows, 3).Fingerprint());
  EXPECT_NE(b.Fingerprint(), BeaconState::FromDataset(d, rows, 4).Fingerprint());
}

}  // namespace
}  // namespace beacon_recon
