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
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mtuda {

// Seeded permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

// Indices of the batch delivered at `step` when a population of size n is consumed in
// epochs of fresh seeded permutations. A pure function of (n, batch, step, seed).
std::vector<std::size_t> draw_batch(std::size_t n, std::size_t batch, std::uint64_t step, std::uint64_t seed);

}  // namespace mtuda
