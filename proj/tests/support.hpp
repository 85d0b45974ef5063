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

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mtuda/losses.hpp"
#include "mtuda/softmax.hpp"

namespace mtuda::testing {

// A per-pixel loss over softmax probabilities, evaluated in double.
// Returns the loss; when grad is non-empty, accumulates dLoss/dprobs into it.
using ProbLoss = std::function<double(std::span<const double> probs, std::span<double> grad)>;

inline std::vector<double> softmax(const std::vector<double>& logits, const losses::ProbShape& s) {
  std::vector<double> p(logits.size());
  softmax_channels<double>(logits, p, s.batch, s.classes, s.pixels());
  return p;
}

// dLoss/dlogits through the library's analytic softmax backward.
inline std::vector<double> analytic_logit_grad(const ProbLoss& loss, const std::vector<double>& logits,
                                               const losses::ProbShape& s) {
  const std::vector<double> p = softmax(logits, s);
  std::vector<double> gp(p.size(), 0.0), gl(p.size(), 0.0);
  loss(p, gp);
  softmax_channels_backward<double>(p, gp, gl, s.batch, s.classes, s.pixels());
  return gl;
}

// Central differences of loss(softmax(logits)) with step h.
inline std::vector<double> numeric_logit_grad(const ProbLoss& loss, std::vector<double> logits,
                                              const losses::ProbShape& s, double h = 1e-4) {
  std::vector<double> g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    logits[i] = x + h;
    const double up = loss(softmax(logits, s), {});
    logits[i] = x - h;
    const double down = loss(softmax(logits, s), {});
    logits[i] = x;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||, tiny).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

inline std::vector<double> random_logits(std::size_t n, std::uint64_t seed, double scale = 1.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline std::vector<std::uint8_t> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng() % classes);
  return v;
}

}  // namespace mtuda::testing
