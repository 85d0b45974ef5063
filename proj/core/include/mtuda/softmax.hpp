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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace mtuda {

// Per-pixel softmax over the channel axis of a (batch, channels, pixels) array.
template <class T>
void softmax_channels(std::span<const T> logits, std::span<T> probs, std::size_t batch, std::size_t channels,
                      std::size_t pixels) {
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = logits.data() + b * channels * pixels;
    T* dst = probs.data() + b * channels * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      T mx = src[p];
      for (std::size_t k = 1; k < channels; ++k) mx = std::max(mx, src[k * pixels + p]);
      double sum = 0.0;
      for (std::size_t k = 0; k < channels; ++k) {
        const T e = std::exp(src[k * pixels + p] - mx);
        dst[k * pixels + p] = e;
        sum += e;
      }
      const auto inv = static_cast<T>(1.0 / sum);
      for (std::size_t k = 0; k < channels; ++k) dst[k * pixels + p] *= inv;
    }
  }
}

// Accumulates dL/dlogits given probs = softmax(logits) and dL/dprobs.
template <class T>
void softmax_channels_backward(std::span<const T> probs, std::span<const T> grad_probs, std::span<T> grad_logits,
                               std::size_t batch, std::size_t channels, std::size_t pixels) {
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * channels * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      double dot = 0.0;
      for (std::size_t k = 0; k < channels; ++k) {
        dot += static_cast<double>(grad_probs[base + k * pixels + p]) * probs[base + k * pixels + p];
      }
      for (std::size_t k = 0; k < channels; ++k) {
        const std::size_t i = base + k * pixels + p;
        grad_logits[i] += static_cast<T>(probs[i] * (grad_probs[i] - dot));
      }
    }
  }
}

}  // namespace mtuda
