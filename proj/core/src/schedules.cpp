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
#include "mtuda/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtuda/error.hpp"

namespace mtuda {

void validate(const RampConfig& cfg) {
  if (!(cfg.peak > 0.0)) throw ValidationError("rampup.peak must be > 0");
  if (cfg.t_max <= 0) throw ValidationError("rampup.t_max must be > 0");
}

void validate(const LrSchedule& sched) {
  if (!(sched.base_lr > 0.0)) throw ValidationError("lr.base must be > 0");
  if (sched.warmup_steps < 0 || sched.total_steps <= 0 || sched.warmup_steps > sched.total_steps) {
    throw ValidationError("lr schedule needs 0 <= lr.warmup <= lr.total and lr.total > 0");
  }
}

double rampup_weight(std::int64_t t, const RampConfig& cfg) {
  validate(cfg);
  if (t < 0) throw ValidationError("rampup_weight: step must be >= 0");
  const double phase = 1.0 - static_cast<double>(std::min(t, cfg.t_max)) / static_cast<double>(cfg.t_max);
  return cfg.peak * std::exp(-5.0 * phase * phase);
}

double learning_rate(std::int64_t t, const LrSchedule& sched) {
  validate(sched);
  if (t < 0) throw ValidationError("learning_rate: step must be >= 0");
  if (t < sched.warmup_steps) {
    return sched.base_lr * static_cast<double>(t) / static_cast<double>(sched.warmup_steps);
  }
  if (t >= sched.total_steps) return 0.0;
  const double decay_len = static_cast<double>(sched.total_steps - sched.warmup_steps);
  const double progress = static_cast<double>(t - sched.warmup_steps) / decay_len;
  return 0.5 * sched.base_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace mtuda
