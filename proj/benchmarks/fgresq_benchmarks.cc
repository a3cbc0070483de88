// Copyright 2026 The FGResQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "fgresq/filtration.h"
#include "fgresq/jnd.h"
#include "fgresq/losses.h"
#include "fgresq/metrics.h"
#include "fgresq/model.h"
#include "fgresq/random.h"
#include "fgresq/ssim.h"
#include "fgresq/synthetic.h"

namespace fgresq {
namespace {

void BM_Ssim(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Image a = SyntheticContent(size, 1);
  const Image b = Degrade(a, Task::kDenoising, 0.3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ComputeSsim(a, b));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

void BM_JndMap(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Image a = SyntheticContent(size, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ComputeJndMap(a));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_JndMap)->Arg(64)->Arg(256);

void BM_JndSsim(benchmark::State& state) {
  const Image a = SyntheticContent(128, 4);
  for (auto _ : state) benchmark::DoNotOptimize(JndSsim(a));
}
BENCHMARK(BM_JndSsim);

void BM_Srcc(benchmark::State& state) {
  const auto sample = NoisyPredictor(static_cast<std::size_t>(state.range(0)), 0.1, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Srcc(sample.score, sample.mos));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Srcc)->Arg(1000)->Arg(100000);

void BM_FidelityLossScene(benchmark::State& state) {
  const auto sample = NoisyPredictor(static_cast<std::size_t>(state.range(0)), 0.1, 6);
  for (auto _ : state) benchmark::DoNotOptimize(FidelityLossScene(sample.score, sample.mos));
}
BENCHMARK(BM_FidelityLossScene)->Arg(16)->Arg(64);

void BM_PairGeneration(benchmark::State& state) {
  SyntheticDatasetOptions o;
  o.contents_per_task = 20;
  o.images_per_content = static_cast<int>(state.range(0));
  o.image_size = 8;
  const DatasetManifest m = BuildSyntheticDataset(o).manifest;
  for (auto _ : state) benchmark::DoNotOptimize(GeneratePairs(m));
}
BENCHMARK(BM_PairGeneration)->Arg(5)->Arg(20);

void BM_ModelFeatures(benchmark::State& state) {
  const FgresqModel model(ModelConfig::Toy());
  std::vector<Image> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back(SyntheticContent(64, 10 + i));
  for (auto _ : state) benchmark::DoNotOptimize(model.Features(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ModelFeatures)->Arg(1)->Arg(16);

}  // namespace
}  // namespace fgresq

// The distro benchmark_main archive is LTO-only bytecode, so define main here.
BENCHMARK_MAIN();
