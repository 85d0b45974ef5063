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
#include <vector>

#include "mtuda/ema.hpp"
#include "mtuda/error.hpp"

namespace mtuda {
namespace {

ParamSet params_filled(float a, float b) {
  ParamSet p;
  p.add("w", Tensor({2, 2}, a));
  p.add("b", Tensor({3}, b));
  return p;
}

TEST(Ema, InitCopiesStudent) {
  const ParamSet s = params_filled(0.25f, -1.0f);
  const EmaState st = ema_init(s, 0.9, 0.99);
  EXPECT_EQ(st.teacher_semantic, s);
  EXPECT_EQ(st.teacher_structural, s);
  EXPECT_EQ(st.step, 0);
  EXPECT_EQ(st.alpha_semantic, 0.9);
  EXPECT_EQ(st.alpha_structural, 0.99);
}

TEST(Ema, ZeroAlphaCopiesNewStudent) {
  EmaState st = ema_init(params_filled(0, 0), 0.0);
  const ParamSet s = params_filled(3.0f, -7.0f);
  st = ema_update(st, s);
  EXPECT_EQ(st.teacher_semantic, s);
  EXPECT_EQ(st.teacher_structural, s);
  EXPECT_EQ(st.step, 1);
}

TEST(Ema, UnitAlphaFreezesTeacher) {
  const ParamSet init = params_filled(1.5f, 2.5f);
  EmaState st = ema_init(init, 1.0);
  for (int i = 0; i < 10; ++i) st = ema_update(st, params_filled(100.0f + i, -50.0f));
  EXPECT_EQ(st.teacher_semantic, init);
  EXPECT_EQ(st.teacher_structural, init);
}

TEST(Ema, ScalarProbeFollowsGeometricSeries) {
  // Teacher starts at 0, student fixed at 1: after k steps the teacher is 1 - alpha^k.
  double teacher = 0.0;
  const double student = 1.0;
  for (int k = 1; k <= 1000; ++k) {
    ema_blend<double>(std::span<double>(&teacher, 1), std::span<const double>(&student, 1), 0.999);
    ASSERT_NEAR(teacher, 1.0 - std::pow(0.999, k), 1e-9) << "k=" << k;
  }
  EXPECT_NEAR(teacher, 0.6323045752290363, 1e-9);
}

TEST(Ema, FloatParamsTrackSeriesClosely) {
  EmaState st = ema_init(params_filled(0, 0), 0.999, 0.99);
  const ParamSet s = params_filled(1, 1);
  for (int k = 0; k < 100; ++k) st = ema_update(st, s);
  EXPECT_NEAR(st.teacher_semantic.at("w")[0], 1.0 - std::pow(0.999, 100), 1e-5);
  EXPECT_NEAR(st.teacher_structural.at("b")[2], 1.0 - std::pow(0.99, 100), 1e-5);
  EXPECT_EQ(st.step, 100);
}

TEST(Ema, UpdateIsConvexCombination) {
  const ParamSet t0 = params_filled(-2.0f, 4.0f);
  const ParamSet s = params_filled(6.0f, -4.0f);
  for (double alpha : {0.1, 0.5, 0.9, 0.999}) {
    EmaState st = ema_update(ema_init(t0, alpha), s);
    for (std::size_t i = 0; i < st.teacher_semantic.size(); ++i) {
      for (std::size_t j = 0; j < st.teacher_semantic[i].value.size(); ++j) {
        const float lo = std::min(t0[i].value[j], s[i].value[j]);
        const float hi = std::max(t0[i].value[j], s[i].value[j]);
        const float v = st.teacher_semantic[i].value[j];
        EXPECT_GE(v, lo);
        EXPECT_LE(v, hi);
        EXPECT_NEAR(v, alpha * t0[i].value[j] + (1 - alpha) * s[i].value[j], 1e-6);
      }
    }
  }
}

TEST(Ema, StudentUntouched) {
  const ParamSet s = params_filled(0.3f, 0.7f);
  const ParamSet copy = s;
  EmaState st = ema_init(params_filled(0, 0));
  st = ema_update(st, s);
  EXPECT_EQ(s, copy);
}

TEST(Ema, TeachersIndependentRates) {
  EmaState st = ema_init(params_filled(0, 0), 0.5, 0.0);
  st = ema_update(st, params_filled(1, 1));
  EXPECT_FLOAT_EQ(st.teacher_semantic.at("w")[0], 0.5f);
  EXPECT_FLOAT_EQ(st.teacher_structural.at("w")[0], 1.0f);
}

TEST(Ema, Rejections) {
  EXPECT_THROW(ema_init(params_filled(0, 0), 1.5), ValidationError);
  EXPECT_THROW(ema_init(params_filled(0, 0), -0.1), ValidationError);
  ParamSet other;
  other.add("w", Tensor({4}, 0.0f));
  other.add("b", Tensor({3}, 0.0f));
  EXPECT_THROW(ema_update(ema_init(params_filled(0, 0)), other), ValidationError);
  ParamSet renamed;
  renamed.add("x", Tensor({2, 2}, 0.0f));
  renamed.add("b", Tensor({3}, 0.0f));
  EXPECT_THROW(ema_update(ema_init(params_filled(0, 0)), renamed), ValidationError);
}

}  // namespace
}  // namespace mtuda
