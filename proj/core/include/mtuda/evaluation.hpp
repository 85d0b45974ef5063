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

#include <cstddef>
#include <vector>

#include "mtuda/data.hpp"
#include "mtuda/metrics.hpp"
#include "mtuda/networks.hpp"
#include "mtuda/trainer.hpp"

namespace mtuda {

// Groups labeled test slices by `volume`, orders them by `slice`, runs infer_target per
// slice and restacks the predictions into 3D label volumes.
std::vector<VolumeLabels> predict_volumes(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                                          const std::vector<Sample>& test);

// predict_volumes followed by evaluate_volumes.
EvalReport evaluate(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                    const std::vector<Sample>& test, double asd_cap = 100.0);

}  // namespace mtuda
