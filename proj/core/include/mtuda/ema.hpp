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

#include <cstdint>
#include <span>

#include "mtuda/param_set.hpp"

namespace mtuda {

// The two mean teachers. Both track the same student; each has its own decay rate.
struct EmaState {
  ParamSet teacher_semantic;
  ParamSet teacher_structural;
  double alpha_semantic = 0.999;
  double alpha_structural = 0.999;
  std::int64_t step = 0;
};

// teacher <- alpha * teacher + (1 - alpha) * student, elementwise.
template <class T>
void ema_blend(std::span<T> teacher, std::span<const T> student, double alpha) {
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    teacher[i] = static_cast<T>(alpha * static_cast<double>(teacher[i]) + (1.0 - alpha) * static_cast<double>(student[i]));
  }
}

void ema_blend(ParamSet& teacher, const ParamSet& student, double alpha);

EmaState ema_init(const ParamSet& student, double alpha = 0.999);
EmaState ema_init(const ParamSet& student, double alpha_semantic, double alpha_structural);

// Blends both teachers toward the student and increments step. The student is not modified.
EmaState ema_update(EmaState state, const ParamSet& student);

}  // namespace mtuda
