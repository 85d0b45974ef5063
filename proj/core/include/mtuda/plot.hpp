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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtuda/metrics.hpp"
#include "mtuda/trainer.hpp"

namespace mtuda {

std::vector<LossReport> read_metrics_log(const std::filesystem::path& path);
EvalReport eval_report_from_json(const nlohmann::json& j);

// SVG line chart of the logged loss components against step.
std::string loss_curve_svg(const std::vector<LossReport>& log, const std::string& title);

// SVG grouped bar chart: one group per foreground class plus the average, one bar per run.
std::string dice_bars_svg(const std::vector<std::pair<std::string, EvalReport>>& runs, const std::string& title);

}  // namespace mtuda
