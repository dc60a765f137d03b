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

#include "beacon_recon/correlation.h"
#include "beacon_recon/genotype.h"

namespace beacon_recon {
namespace {

PopulationDataset Reference(std::size_t donors, std::size_t snps) {
  SyntheticPopulationSpec spec;
  spec.num_donors = donors;
  spec.block_sizes.assign(snps / 5, 5);
  spec.per_block_maf.assign(snps / 5, 0.02);
  return GenerateSyntheticPopulation(spec, 1);
}

void BM_BuildCorrelationModel(benchmark::State& state) {
  const auto loci_count = static_cast<std::size_t>(state.range(0));
  const PopulationDataset reference = Reference(2000, loci_count);
  std::vector<std::size_t> loci(loci_count);
  std::iota(loci.begin(), loci.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildCorrelationModel(reference, loci));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildCorrelationModel)->RangeMultiplier(2)->Range(50, 400)->Complexity();

}  // namespace
}  // namespace beacon_recon
