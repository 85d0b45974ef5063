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
#include "mtuda/optim.hpp"

#include <cmath>

#include "mtuda/error.hpp"

namespace mtuda {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ValidationError("unknown optimizer '" + name + "' (expected adam or sgd)");
}

const char* optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerState optimizer_init(const ParamSet& params) { return {params.zeros_like(), params.zeros_like(), 0}; }

void optimizer_step(ParamSet& params, const ParamSet& grads, OptimizerState& state, double lr,
                    const OptimizerConfig& cfg) {
  require_same_layout(params, grads, "optimizer_step");
  require_same_layout(params, state.first, "optimizer_step");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.value(i).values();
    auto g = grads[i].value.values();
    auto m = state.first.value(i).values();
    if (cfg.kind == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = static_cast<float>(cfg.beta1 * m[k] + g[k]);
        p[k] = static_cast<float>(p[k] - lr * m[k]);
      }
      continue;
    }
    auto v = state.second.value(i).values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = static_cast<float>(cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k]);
      v[k] = static_cast<float>(cfg.beta2 * v[k] + (1.0 - cfg.beta2) * double{g[k]} * g[k]);
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] = static_cast<float>(p[k] - lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

}  // namespace mtuda
