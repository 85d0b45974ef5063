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

#include "mtuda/networks.hpp"

namespace {

mtuda::ImageBatch random_batch(std::size_t n, std::size_t size) {
  mtuda::ImageBatch b{mtuda::Tensor({n, 1, size, size}), mtuda::Domain::source};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (float& v : b.pixels.values()) v = u(rng);
  return b;
}

// Training-style pass: forward, mean-logit loss, backward into the parameters.
void BM_SegNetTrainStep(benchmark::State& state) {
  mtuda::SegNet net({1, 5, static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))});
  const auto params = net.init(3);
  const auto batch = random_batch(4, static_cast<std::size_t>(state.range(2)));
  for (auto _ : state) {
    mtuda::ag::Graph g;
    auto p = mtuda::bind_params(g, params, true);
    auto logits = net.logits(g, p, g.constant(batch.pixels));
    auto loss = g.loss(logits, [](const mtuda::Tensor& in, mtuda::Tensor& grad) {
      double s = 0.0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        s += in[i];
        grad[i] = 1.0f / static_cast<float>(in.size());
      }
      return s / static_cast<double>(in.size());
    });
    g.backward(loss);
    benchmark::DoNotOptimize(g.grad(p.vars.front()).data());
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_SegNetTrainStep)->Args({16, 4, 64})->Args({8, 3, 64})->Args({16, 3, 64})->Unit(benchmark::kMillisecond);

void BM_SegNetForward(benchmark::State& state) {
  mtuda::SegNet net({1, 5, static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))});
  const auto params = net.init(3);
  const auto batch = random_batch(4, 64);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(params, batch).data());
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_SegNetForward)->Args({16, 4})->Args({8, 3})->Unit(benchmark::kMillisecond);

void BM_GeneratorForward(benchmark::State& state) {
  mtuda::Generator gen({1, static_cast<std::size_t>(state.range(0)), 4});
  const auto params = gen.init(5);
  const auto batch = random_batch(4, 64);
  for (auto _ : state) benchmark::DoNotOptimize(gen.forward(params, batch).pixels.data());
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_GeneratorForward)->Arg(16)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
