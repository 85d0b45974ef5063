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
#include "mtuda/ema.hpp"

#include "mtuda/error.hpp"

namespace mtuda {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("EMA decay rate must lie in [0, 1]");
}

}  // namespace

void ema_blend(ParamSet& teacher, const ParamSet& student, double alpha) {
  check_alpha(alpha);
  require_same_layout(teacher, student, "ema_update");
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    ema_blend<float>(teacher.value(i).values(), student[i].value.values(), alpha);
  }
}

EmaState ema_init(const ParamSet& student, double alpha) { return ema_init(student, alpha, alpha); }

EmaState ema_init(const ParamSet& student, double alpha_semantic, double alpha_structural) {
  check_alpha(alpha_semantic);
  check_alpha(alpha_structural);
  return EmaState{student, student, alpha_semantic, alpha_structural, 0};
}

EmaState ema_update(EmaState state, const ParamSet& student) {
  ema_blend(state.teacher_semantic, student, state.alpha_semantic);
  ema_blend(state.teacher_structural, student, state.alpha_structural);
  ++state.step;
  return state;
}

}  // namespace mtuda
