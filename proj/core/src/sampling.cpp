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
#include "mtuda/sampling.hpp"

#include <numeric>
#include <random>

#include "mtuda/error.hpp"
#include "mtuda/rng.hpp"

namespace mtuda {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit modulus draw; std::shuffle's draws are not specified.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::size_t> draw_batch(std::size_t n, std::size_t batch, std::uint64_t step, std::uint64_t seed) {
  if (n == 0) throw ValidationError("draw_batch: empty population");
  std::vector<std::size_t> out;
  out.reserve(batch);
  std::uint64_t cached_epoch = ~std::uint64_t{0};
  std::vector<std::size_t> perm;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::uint64_t pos = step * batch + i;
    const std::uint64_t epoch = pos / n;
    if (epoch != cached_epoch) {
      perm = shuffled_indices(n, derive_seed(seed, 0, epoch));
      cached_epoch = epoch;
    }
    out.push_back(perm[pos % n]);
  }
  return out;
}

}  // namespace mtuda
