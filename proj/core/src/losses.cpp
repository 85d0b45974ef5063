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
#include "mtuda/losses.hpp"

#include <cmath>

namespace mtuda::losses {

ProbShape prob_shape(const Tensor& t) {
  if (t.rank() != 4) throw ValidationError("probability map must be rank 4, got " + shape_str(t.shape()));
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ValidationError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
  }
}

void require_label_shape(const Tensor& probs, const LabelMap& target, const char* what) {
  const ProbShape s = prob_shape(probs);
  if (target.batch != s.batch || target.height != s.height || target.width != s.width) {
    throw ValidationError(std::string(what) + ": label map does not match probabilities " + shape_str(probs.shape()));
  }
}

}  // namespace

double mse_consistency(const Tensor& student, const Tensor& teacher) {
  require_same_shape(student, teacher, "mse_consistency");
  return mse_consistency<float>(student.values(), teacher.values());
}

Tensor self_information(const Tensor& probs) {
  Tensor out(probs.shape());
  self_information<float>(probs.values(), out.values());
  return out;
}

double structural_consistency(const Tensor& student, const Tensor& teacher) {
  require_same_shape(student, teacher, "structural_consistency");
  return structural_consistency<float>(student.values(), teacher.values(), prob_shape(student));
}

double dice_loss(const Tensor& probs, const LabelMap& target) {
  require_label_shape(probs, target, "dice_loss");
  return dice_loss<float>(probs.values(), target.labels, prob_shape(probs));
}

double ce_loss(const Tensor& probs, const LabelMap& target) {
  require_label_shape(probs, target, "ce_loss");
  return ce_loss<float>(probs.values(), target.labels, prob_shape(probs));
}

double supervised_loss(const Tensor& probs, const LabelMap& target) {
  require_label_shape(probs, target, "supervised_loss");
  return supervised_loss<float>(probs.values(), target.labels, prob_shape(probs));
}

bool is_prob_map(const Tensor& probs, double tol) {
  const ProbShape s = prob_shape(probs);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t v = 0; v < s.pixels(); ++v) {
      double sum = 0.0;
      for (std::size_t c = 0; c < s.classes; ++c) {
        const double p = probs[(b * s.classes + c) * s.pixels() + v];
        if (!(p >= 0.0 && p <= 1.0)) return false;
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol) return false;
    }
  }
  return true;
}

}  // namespace mtuda::losses
