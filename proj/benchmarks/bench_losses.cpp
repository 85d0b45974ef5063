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

#include <cstdint>
#include <random>
#include <vector>

#include "mtuda/losses.hpp"

namespace {

// Softmax-like maps: positive entries normalized over the channel axis.
std::vector<float> prob_map(const mtuda::losses::ProbShape& s, std::uint64_t seed) {
  std::vector<float> p(s.numel());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.01f, 1.0f);
  for (float& v : p) v = u(rng);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t i = 0; i < s.pixels(); ++i) {
      float sum = 0.0f;
      for (std::size_t c = 0; c < s.classes; ++c) sum += p[(b * s.classes + c) * s.pixels() + i];
      for (std::size_t c = 0; c < s.classes; ++c) p[(b * s.classes + c) * s.pixels() + i] /= sum;
    }
  }
  return p;
}

std::vector<std::uint8_t> labels(const mtuda::losses::ProbShape& s) {
  std::vector<std::uint8_t> y(s.batch * s.pixels());
  std::mt19937_64 rng(9);
  for (auto& v : y) v = static_cast<std::uint8_t>(rng() % s.classes);
  return y;
}

const mtuda::losses::ProbShape kShape{4, 5, 64, 64};

void BM_SupervisedLossWithGrad(benchmark::State& state) {
  const auto p = prob_map(kShape, 1);
  const auto y = labels(kShape);
  std::vector<float> g(p.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(mtuda::losses::supervised_loss<float>(p, y, kShape, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kShape.numel()));
}
BENCHMARK(BM_SupervisedLossWithGrad);

void BM_StructuralConsistencyWithGrad(benchmark::State& state) {
  const auto a = prob_map(kShape, 1), b = prob_map(kShape, 2);
  std::vector<float> g(a.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(mtuda::losses::structural_consistency<float>(a, b, kShape, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kShape.numel()));
}
BENCHMARK(BM_StructuralConsistencyWithGrad);

void BM_MseConsistencyWithGrad(benchmark::State& state) {
  const auto a = prob_map(kShape, 1), b = prob_map(kShape, 2);
  std::vector<float> g(a.size());
  for (auto _ : state) benchmark::DoNotOptimize(mtuda::losses::mse_consistency<float>(a, b, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kShape.numel()));
}
BENCHMARK(BM_MseConsistencyWithGrad);

}  // namespace
