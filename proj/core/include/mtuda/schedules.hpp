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

namespace mtuda {

// Consistency-weight ramp-up: peak * exp(-5 (1 - t / t_max)^2).
struct RampConfig {
  double peak = 0.01;
  std::int64_t t_max = 150;
};

// Linear warmup from 0 to base_lr, then cosine decay to 0 at total_steps.
struct LrSchedule {
  double base_lr = 1e-4;
  std::int64_t warmup_steps = 20;
  std::int64_t total_steps = 150;
};

void validate(const RampConfig& cfg);
void validate(const LrSchedule& sched);

// t beyond t_max is clamped to t_max; t < 0 is a ValidationError.
double rampup_weight(std::int64_t t, const RampConfig& cfg);

// Defined for every t >= 0; returns 0 for t >= total_steps.
double learning_rate(std::int64_t t, const LrSchedule& sched);

}  // namespace mtuda
