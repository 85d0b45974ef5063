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
#include <string>

#include "mtuda/param_set.hpp"

namespace mtuda {

enum class OptimizerKind { adam, sgd };

OptimizerKind parse_optimizer(const std::string& name);
const char* optimizer_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;  // Adam first-moment decay; SGD momentum
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers (SGD uses only `first`).
struct OptimizerState {
  ParamSet first;
  ParamSet second;
  std::int64_t step = 0;
};

OptimizerState optimizer_init(const ParamSet& params);

// One update of `params` in place with learning rate `lr`.
void optimizer_step(ParamSet& params, const ParamSet& grads, OptimizerState& state, double lr,
                    const OptimizerConfig& cfg);

}  // namespace mtuda
