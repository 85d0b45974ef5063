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
#include <gtest/gtest.h>

#include <cmath>

#include "mtuda/error.hpp"
#include "mtuda/schedules.hpp"

namespace mtuda {
namespace {

TEST(Rampup, EndpointsAndMidpoint) {
  const RampConfig cfg{};
  EXPECT_DOUBLE_EQ(rampup_weight(cfg.t_max, cfg), 0.01);
  // Frozen values of 0.01 * exp(-5) and 0.01 * exp(-1.25).
  EXPECT_NEAR(rampup_weight(0, cfg), 6.737946999085467e-05, 1e-15);
  EXPECT_NEAR(rampup_weight(75, cfg), 2.865047968601901e-03, 1e-15);
}

TEST(Rampup, ClampsAndRejects) {
  const RampConfig cfg{0.01, 10};
  EXPECT_DOUBLE_EQ(rampup_weight(25, cfg), rampup_weight(10, cfg));
  EXPECT_THROW(rampup_weight(-1, cfg), ValidationError);
  EXPECT_THROW(validate(RampConfig{0.0, 10}), ValidationError);
  EXPECT_THROW(validate(RampConfig{0.01, 0}), ValidationError);
}

TEST(Rampup, StrictlyIncreasingAndBounded) {
  const RampConfig cfg{0.01, 1000};
  double prev = 0.0;
  for (std::int64_t t = 0; t <= cfg.t_max; ++t) {
    const double w = rampup_weight(t, cfg);
    EXPECT_GT(w, prev);
    EXPECT_LE(w, cfg.peak);
    prev = w;
  }
}

TEST(LearningRate, WarmupCosine) {
  const LrSchedule s{};
  EXPECT_EQ(learning_rate(0, s), 0.0);
  EXPECT_DOUBLE_EQ(learning_rate(10, s), 0.5e-4);
  EXPECT_DOUBLE_EQ(learning_rate(s.warmup_steps, s), s.base_lr);
  EXPECT_NEAR(learning_rate(s.total_steps, s), 0.0, 1e-12);
  EXPECT_NEAR(learning_rate((s.warmup_steps + s.total_steps) / 2, s), s.base_lr / 2, 1e-9);
  EXPECT_EQ(learning_rate(s.total_steps + 5, s), 0.0);
  EXPECT_THROW(learning_rate(-1, s), ValidationError);
}

TEST(LearningRate, NonincreasingAfterWarmup) {
  const LrSchedule s{3e-3, 7, 401};
  double prev = learning_rate(s.warmup_steps, s);
  for (std::int64_t t = s.warmup_steps; t <= s.total_steps + 3; ++t) {
    const double lr = learning_rate(t, s);
    EXPECT_GE(lr, 0.0);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(LearningRate, ZeroWarmup) {
  const LrSchedule s{1e-3, 0, 10};
  EXPECT_DOUBLE_EQ(learning_rate(0, s), 1e-3);
}

}  // namespace
}  // namespace mtuda
