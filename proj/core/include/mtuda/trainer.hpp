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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtuda/data.hpp"
#include "mtuda/dcam.hpp"
#include "mtuda/ema.hpp"
#include "mtuda/networks.hpp"
#include "mtuda/optim.hpp"
#include "mtuda/param_set.hpp"
#include "mtuda/schedules.hpp"

namespace mtuda {

// full: both teachers. ns: no semantic teacher (no L_kd). nt: no structural teacher
// (no L_con). ns_mse: structural teacher compares probabilities by MSE instead of
// self-information. supervised: neither teacher (plain supervised training).
enum class Ablation { full, ns, nt, ns_mse, supervised };

Ablation parse_ablation(const std::string& name);
const char* ablation_name(Ablation a);
bool uses_semantic_teacher(Ablation a);
bool uses_structural_teacher(Ablation a);

struct BatchSizes {
  std::size_t labeled = 4;
  std::size_t semantic = 4;
  std::size_t structural = 4;
};

struct TrainConfig {
  SegNetSpec network{};
  BatchSizes batch{};
  std::int64_t total_steps = 150;
  double alpha_semantic = 0.999;
  double alpha_structural = 0.999;
  RampConfig ramp_kd{};
  RampConfig ramp_con{};
  LrSchedule lr{};
  OptimizerConfig optimizer{};
  NoiseConfig noise{};  // seed is ignored; per-step noise seeds derive from `seed`
  Ablation ablation = Ablation::full;
  // Also pair the student on x^{s->t} with the teacher on x^s (and x^t with x^{t->s}).
  bool structural_target_direction = false;
  std::int64_t checkpoint_every = 25;
  std::size_t keep_checkpoints = 3;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

// Two views of one anatomy; `origin` names the shared pre-image.
struct StructuralPair {
  ImageBatch student_view;
  ImageBatch teacher_view;
  std::vector<std::string> origins;
};

struct PairedSample {
  Sample student_view;
  Sample teacher_view;
};

// The three per-step data sources.
//   labeled:    D_s^l
//   semantic:   D_s^u u {x^{t->s}} u {x^{s->t->s}}, labels dropped
//   structural: {(x^s, x^{s->t})} u {(x^{t->s}, x^t)}
struct StreamSet {
  std::vector<Sample> labeled;
  std::vector<Sample> semantic;
  std::vector<PairedSample> structural;
};

StreamSet build_streams(const TrainConfig& cfg, const DomainSplits& data, const DcamState& dcam);

struct StepBatches {
  ImageBatch labeled;
  LabelMap labels;
  ImageBatch semantic;
  StructuralPair structural;
};

// Batches for `step`; a pure function of (streams, cfg.seed, step). Streams disabled by the
// ablation are left empty, without affecting what the others draw.
StepBatches draw_step(const StreamSet& streams, const TrainConfig& cfg, std::int64_t step);

struct TrainState {
  TrainConfig cfg;
  ParamSet student;
  EmaState ema;
  OptimizerState opt;
  std::int64_t step = 0;
};

TrainState train_init(const TrainConfig& cfg);

struct LossReport {
  std::int64_t step = 0;
  double lr = 0, lambda_kd = 0, lambda_con = 0, seg = 0, kd = 0, con = 0, total = 0;
};

nlohmann::json to_json(const LossReport& r);

// One student update on the step's batches followed by the EMA update of both teachers.
LossReport mtuda_step(TrainState& state, const StepBatches& batches);

// Frozen target->source generator used at inference; empty params mean identity.
struct Translator {
  GenSpec spec{};
  ParamSet params;

  bool identity() const { return params.empty(); }
  static Translator from(const DcamState& dcam) { return {dcam.cfg.generator, dcam.gen_s}; }
};

struct FitOptions {
  std::optional<std::filesystem::path> out_dir;  // checkpoints + metrics.jsonl
  std::optional<std::filesystem::path> resume;   // checkpoint directory to continue from
  Translator translator;                         // embedded into checkpoints for evaluation
  std::function<void(const LossReport&)> on_step;
};

struct FitResult {
  TrainState state;
  std::vector<LossReport> log;
};

FitResult fit(const TrainConfig& cfg, const StreamSet& streams, const FitOptions& options = {});

void save_train_checkpoint(const std::filesystem::path& dir, const TrainState& state, const Translator& translator);
TrainState load_train_state(const std::filesystem::path& dir);
Translator load_translator(const std::filesystem::path& dir);

// Channel argmax of (B, C, H, W) logits; ties go to the lower class index.
LabelMap argmax_labels(const Tensor& logits);

// Translates x^t to source appearance (unless the translator is the identity), segments and
// takes the argmax. Slices are processed independently.
LabelMap infer_target(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                      const ImageBatch& x_t);

}  // namespace mtuda
