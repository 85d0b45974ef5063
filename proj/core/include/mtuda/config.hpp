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
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mtuda/data.hpp"
#include "mtuda/dcam.hpp"
#include "mtuda/networks.hpp"
#include "mtuda/trainer.hpp"

namespace mtuda {

// How the student sees target slices at evaluation time.
enum class InferenceMode { translated, direct };

InferenceMode parse_inference_mode(const std::string& name);
const char* inference_mode_name(InferenceMode m);

struct EvalConfig {
  double asd_cap = 100.0;
  InferenceMode inference = InferenceMode::translated;
};

// One experiment. Module seeds default to values derived from `seed`; an explicit
// per-module seed in the file takes precedence.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthConfig data{};
  DcamConfig dcam{};
  TrainConfig train{};
  EvalConfig eval{};
  std::optional<std::uint64_t> data_seed, dcam_seed, train_seed;

  // Copies with the module seeds filled in.
  SynthConfig resolved_data() const;
  DcamConfig resolved_dcam() const;
  TrainConfig resolved_train() const;
};

// Parses a config document. Every key is optional; unknown keys raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
// Fully resolved document (all defaults and derived seeds spelled out).
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const GenSpec& s);
nlohmann::json to_json(const DcamConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const EvalConfig& cfg);

GenSpec gen_spec_from_json(const nlohmann::json& j);
SynthConfig synth_config_from_json(const nlohmann::json& j);
DcamConfig dcam_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace mtuda
