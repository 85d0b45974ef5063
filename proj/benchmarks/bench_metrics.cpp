/*
 * Copyright 2026 The mtuda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <benchmark/benchmark.h>

#include <random>

#include "mtuda/metrics.hpp"

namespace {

// A noisy ball: a solid sphere plus scattered false positives.
mtuda::Mask3D blob(std::size_t n, double radius, std::uint64_t seed) {
  mtuda::Mask3D m(n, n, n);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution speck(0.01);
  const double c = static_cast<double>(n) / 2.0;
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double d2 = (z - c) * (z - c) + (y - c) * (y - c) + (x - c) * (x - c);
        m.at(z, y, x) = d2 <= radius * radius || speck(rng);
      }
    }
  }
  return m;
}

void BM_LargestComponent(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = blob(n, n / 3.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mtuda::largest_component(m).voxels.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_LargestComponent)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Asd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = blob(n, n / 3.0, 1), b = blob(n, n / 3.5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mtuda::asd(a, b).value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Asd)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DistanceTransform(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = mtuda::surface(blob(n, n / 3.0, 1));
  for (auto _ : state) benchmark::DoNotOptimize(mtuda::distance_transform(s).data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_DistanceTransform)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
