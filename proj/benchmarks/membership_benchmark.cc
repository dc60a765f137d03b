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

#include <numeric>
#include <vector>

#include "beacon_recon/common.h"
#include "beacon_recon/membership.h"

namespace beacon_recon {
namespace {

void BM_OptimalAttack(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> mafs(n);
  for (double& f : mafs) f = 0.001 + 0.049 * rng.Uniform();
  std::vector<std::size_t> loci(n);
  std::iota(loci.begin(), loci.end(), 0);
  LrtConfig config;
  config.beacon_size = 60;
  for (auto _ : state) {
    benchmark::DoNotOptimize(OptimalAttack(
        loci, mafs, [](std::size_t l) { return l % 3 != 0; }, config, n));
  }
}
BENCHMARK(BM_OptimalAttack)->Arg(40)->Arg(1000);

void BM_CalibrateNull(benchmark::State& state) {
  Rng rng(6);
  std::vector<AttackTrace> traces(20);
  for (auto& t : traces) {
    double lambda = 0.0;
    for (int q = 0; q < 40; ++q) t.lambda.push_back(lambda += rng.Uniform() - 0.5);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(CalibrateNull(traces, 0.05, 40));
  }
}
BENCHMARK(BM_CalibrateNull);

}  // namespace
}  // namespace beacon_recon
