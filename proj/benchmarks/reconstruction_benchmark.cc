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

#include <benchmark/benchmark.h>

#include "beacon_recon/scenario.h"

namespace beacon_recon {
namespace {

void BM_SpectralAttack(benchmark::State& state) {
  PlantedScenarioSpec spec;
  spec.newcomers = static_cast<std::size_t>(state.range(0));
  spec.min_block_size = 5;
  spec.max_block_size = 10;
  spec.agreement = 0.9;
  const PlantedScenario p = MakePlantedScenario(spec, 3);
  AttackOptions options;
  options.m_prime = spec.newcomers;
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunAttack(p.population, p.update, options, 1));
  }
}
BENCHMARK(BM_SpectralAttack)->Arg(2)->Arg(5)->Arg(10);

void BM_FuzzyAttack(benchmark::State& state) {
  PlantedScenarioSpec spec;
  spec.newcomers = 5;
  spec.agreement = 0.9;
  const PlantedScenario p = MakePlantedScenario(spec, 3);
  AttackOptions options;
  options.kind = AttackKind::kFuzzy;
  options.m_prime = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunAttack(p.population, p.update, options, 1));
  }
}
BENCHMARK(BM_FuzzyAttack);

}  // namespace
}  // namespace beacon_recon
