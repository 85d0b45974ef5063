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

// Training objectives over per-pixel class-probability maps laid out (B, C, H, W).
//
// Every loss returns its value in double precision and, when `grad` is non-empty,
// accumulates dLoss/d(first argument) into it. The second argument of the consistency
// losses is a teacher prediction and receives no gradient.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mtuda/error.hpp"
#include "mtuda/tensor.hpp"

namespace mtuda::losses {

inline constexpr double kLogEpsilon = 1e-8;
inline constexpr double kDiceSmoothing = 1e-5;
// max over p in [0, 1] of -p log2 p, attained at p = 1/e.
inline const double kMaxSelfInformation = std::numbers::log2e / std::numbers::e;

struct ProbShape {
  std::size_t batch = 0;
  std::size_t classes = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixels() const { return height * width; }
  std::size_t numel() const { return batch * classes * height * width; }
};

ProbShape prob_shape(const Tensor& t);

struct LossWeights {
  double lambda_kd = 0.0;
  double lambda_con = 0.0;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": shape mismatch (" + std::to_string(a) + " vs " + std::to_string(b) +
                          " elements)");
  }
}

inline void require_labels(std::span<const std::uint8_t> labels, const ProbShape& s, const char* what) {
  require_same_size(labels.size(), s.batch * s.pixels(), what);
  for (const auto l : labels) {
    if (l >= s.classes) {
      throw ValidationError(std::string(what) + ": label " + std::to_string(l) + " outside [0, " +
                            std::to_string(s.classes) + ")");
    }
  }
}

template <class T>
T clamp_prob(T p) {
  return p < static_cast<T>(kLogEpsilon) ? static_cast<T>(kLogEpsilon) : (p > T(1) ? T(1) : p);
}

// -p log2 p with p clamped to [eps, 1] inside the log only, so 0 log2 0 evaluates to 0.
template <class T>
double self_info(T p) {
  const double q = clamp_prob(p);
  return -static_cast<double>(p) * std::log2(q);
}

// d/dp of self_info; below eps the log factor is the constant log2(eps).
template <class T>
double self_info_slope(T p) {
  if (p > T(1)) return 0.0;
  if (p < static_cast<T>(kLogEpsilon)) return -std::log2(kLogEpsilon);
  return -(std::log2(static_cast<double>(p)) + std::numbers::log2e);
}

}  // namespace detail

// Mean over all B*C*H*W elements of (student - teacher)^2.
template <class T>
double mse_consistency(std::span<const T> student, std::span<const T> teacher, std::span<T> grad = {}) {
  detail::require_same_size(student.size(), teacher.size(), "mse_consistency");
  if (student.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(student.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = static_cast<double>(student[i]) - static_cast<double>(teacher[i]);
    sum += d * d;
    if (!grad.empty()) grad[i] += static_cast<T>(2.0 * d * inv_n);
  }
  return sum * inv_n;
}

// Elementwise -p log2 p; p is clamped to [1e-8, 1] before the log (0 log2 0 = 0).
template <class T>
void self_information(std::span<const T> probs, std::span<T> out) {
  detail::require_same_size(probs.size(), out.size(), "self_information");
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = static_cast<T>(detail::self_info(probs[i]));
}

// (1/B) sum_i (1/HW) sum_v || I^s_{i,v} - I^t_{i,v} ||^2, the norm taken over class channels.
template <class T>
double structural_consistency(std::span<const T> student, std::span<const T> teacher, const ProbShape& s,
                              std::span<T> grad = {}) {
  detail::require_same_size(student.size(), teacher.size(), "structural_consistency");
  detail::require_same_size(student.size(), s.numel(), "structural_consistency");
  if (student.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(s.batch * s.pixels());
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = detail::self_info(student[i]) - detail::self_info(teacher[i]);
    sum += d * d;
    if (!grad.empty()) grad[i] += static_cast<T>(2.0 * d * scale * detail::self_info_slope(student[i]));
  }
  return sum * scale;
}

// 1 - mean_c (2 sum p_c y_c + s) / (sum p_c + sum y_c + s), sums over batch and pixels.
template <class T>
double dice_loss(std::span<const T> probs, std::span<const std::uint8_t> labels, const ProbShape& s,
                 std::span<T> grad = {}) {
  detail::require_same_size(probs.size(), s.numel(), "dice_loss");
  detail::require_labels(labels, s, "dice_loss");
  const std::size_t hw = s.pixels();
  double mean_dice = 0.0;
  for (std::size_t c = 0; c < s.classes; ++c) {
    double inter = 0.0, psum = 0.0, ysum = 0.0;
    for (std::size_t b = 0; b < s.batch; ++b) {
      const T* p = probs.data() + (b * s.classes + c) * hw;
      const std::uint8_t* y = labels.data() + b * hw;
      for (std::size_t v = 0; v < hw; ++v) {
        const double pv = p[v];
        const double yv = y[v] == c ? 1.0 : 0.0;
        inter += pv * yv;
        psum += pv;
        ysum += yv;
      }
    }
    const double num = 2.0 * inter + kDiceSmoothing;
    const double den = psum + ysum + kDiceSmoothing;
    mean_dice += num / den;
    if (!grad.empty()) {
      const double k = -1.0 / static_cast<double>(s.classes) / (den * den);
      for (std::size_t b = 0; b < s.batch; ++b) {
        T* g = grad.data() + (b * s.classes + c) * hw;
        const std::uint8_t* y = labels.data() + b * hw;
        for (std::size_t v = 0; v < hw; ++v) {
          const double yv = y[v] == c ? 1.0 : 0.0;
          g[v] += static_cast<T>(k * (2.0 * yv * den - num));
        }
      }
    }
  }
  return 1.0 - mean_dice / static_cast<double>(s.classes);
}

// Pixel-mean natural-log cross-entropy -ln p[label], p clamped at 1e-8.
template <class T>
double ce_loss(std::span<const T> probs, std::span<const std::uint8_t> labels, const ProbShape& s,
               std::span<T> grad = {}) {
  detail::require_same_size(probs.size(), s.numel(), "ce_loss");
  detail::require_labels(labels, s, "ce_loss");
  const std::size_t hw = s.pixels();
  const double inv_n = 1.0 / static_cast<double>(s.batch * hw);
  double sum = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t v = 0; v < hw; ++v) {
      const std::size_t i = (b * s.classes + labels[b * hw + v]) * hw + v;
      const double p = probs[i];
      const double q = p < kLogEpsilon ? kLogEpsilon : p;
      sum -= std::log(q);
      if (!grad.empty() && p >= kLogEpsilon) grad[i] += static_cast<T>(-inv_n / p);
    }
  }
  return sum * inv_n;
}

// 0.5 * (ce_loss + dice_loss).
template <class T>
double supervised_loss(std::span<const T> probs, std::span<const std::uint8_t> labels, const ProbShape& s,
                       std::span<T> grad = {}) {
  if (grad.empty()) return 0.5 * (ce_loss<T>(probs, labels, s) + dice_loss<T>(probs, labels, s));
  std::vector<T> g(grad.size(), T(0));
  const double ce = ce_loss<T>(probs, labels, s, g);
  const double dice = dice_loss<T>(probs, labels, s, g);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += static_cast<T>(0.5) * g[i];
  return 0.5 * (ce + dice);
}

inline double student_total(double seg, double kd, double con, const LossWeights& w) {
  return seg + w.lambda_kd * kd + w.lambda_con * con;
}

// Tensor conveniences over float32 ProbMaps.
double mse_consistency(const Tensor& student, const Tensor& teacher);
Tensor self_information(const Tensor& probs);
double structural_consistency(const Tensor& student, const Tensor& teacher);
double dice_loss(const Tensor& probs, const LabelMap& target);
double ce_loss(const Tensor& probs, const LabelMap& target);
double supervised_loss(const Tensor& probs, const LabelMap& target);

// Checks entries in [0, 1] and per-pixel channel sums within `tol` of 1.
bool is_prob_map(const Tensor& probs, double tol = 1e-6);

}  // namespace mtuda::losses
