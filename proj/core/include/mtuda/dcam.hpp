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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtuda/data.hpp"
#include "mtuda/networks.hpp"
#include "mtuda/optim.hpp"
#include "mtuda/param_set.hpp"
#include "mtuda/tensor.hpp"

namespace mtuda {

// three_class: one softmax over {real, translated, reconstructed} per patch.
// binary_pooled: one least-squares score per patch, both fake kinds pooled as "fake".
enum class DiscriminationMode { three_class, binary_pooled };

DiscriminationMode parse_discrimination_mode(const std::string& name);
const char* discrimination_mode_name(DiscriminationMode mode);

enum class Direction { s2t, t2s };

Direction parse_direction(const std::string& name);
const char* direction_name(Direction d);

inline constexpr std::size_t kRealClass = 0;
inline constexpr std::size_t kTranslatedClass = 1;
inline constexpr std::size_t kReconstructedClass = 2;

struct DcamConfig {
  GenSpec generator{};
  DiscSpec discriminator{};  // num_outputs is derived from `mode`
  DiscriminationMode mode = DiscriminationMode::three_class;
  double lambda_cyc = 10.0;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::size_t batch_size = 2;
  std::size_t steps = 300;
  std::size_t pool_size = 50;
  std::uint64_t seed = 0;
};

void validate(const DcamConfig& cfg);
// Discriminator spec with num_outputs matching the mode.
DiscSpec discriminator_spec(const DcamConfig& cfg);

// History of generated images shown to a discriminator. Once full, each incoming image
// either passes through or is swapped with a stored one (probability 1/2). Random draws
// are keyed by (seed, query count) so the pool state is plain data.
struct ImagePool {
  std::size_t capacity = 50;
  std::uint64_t seed = 0;
  std::uint64_t queries = 0;
  std::vector<Tensor> images;  // each (1, C, H, W)

  Tensor query(const Tensor& batch);
};

struct DcamState {
  DcamConfig cfg;
  ParamSet gen_s;   // target -> source, and the s->t->s reconstructor
  ParamSet gen_t;   // source -> target, and the t->s->t reconstructor
  ParamSet disc_s;
  ParamSet disc_t;
  OptimizerState opt_gen_s, opt_gen_t, opt_disc_s, opt_disc_t;
  // Fake histories: translated and reconstructed images per discriminator.
  std::array<ImagePool, 4> pools;
  std::int64_t step = 0;
};

enum PoolSlot : std::size_t { kPoolSourceTranslated = 0, kPoolSourceReconstructed, kPoolTargetTranslated, kPoolTargetReconstructed };

DcamState dcam_init(const DcamConfig& cfg);

// The generator applied for a translation direction.
const ParamSet& generator_for(const DcamState& state, Direction direction);

ImageBatch translate(const DcamState& state, const ImageBatch& batch, Direction direction);

// x -> G(x) -> G'(G(x)). The two ParamSets used are recorded for identity checks.
struct CycleResult {
  ImageBatch translated;
  ImageBatch reconstructed;
  const ParamSet* forward_params = nullptr;
  const ParamSet* backward_params = nullptr;
};

CycleResult cycle(const DcamState& state, const ImageBatch& batch, Direction first);

// lambda * mean |x - x_rec|. When grad is given, writes d/d x_rec.
double cycle_loss(const Tensor& x, const Tensor& x_rec, double lambda = 10.0, Tensor* grad = nullptr);

// Discriminator objective over discriminator outputs (B, K, h, w).
// three_class: mean of the per-stream patch cross-entropies against classes 0/1/2.
// binary_pooled: 0.5 * mean (D(real) - 1)^2 + 0.5 * mean over pooled fakes of D(fake)^2.
// `reconstructed` may be null only in binary_pooled mode. Gradients are written when given.
double disc_loss(const Tensor& real, const Tensor& translated, const Tensor* reconstructed, DiscriminationMode mode,
                 Tensor* grad_real = nullptr, Tensor* grad_translated = nullptr, Tensor* grad_reconstructed = nullptr);

// Generator objective on fake outputs: CE toward the real class, or mean (D(fake) - 1)^2.
double gen_adv_loss(const Tensor& fake, DiscriminationMode mode, Tensor* grad = nullptr);

struct DcamLosses {
  double g_adv_s = 0, g_adv_t = 0, cyc_s = 0, cyc_t = 0, d_s = 0, d_t = 0;
};

nlohmann::json to_json(const DcamLosses& l);

// Generated images of one step: x^{t->s}, x^{s->t->s}, x^{s->t}, x^{t->s->t}.
struct DcamFakes {
  Tensor fake_s, rec_s, fake_t, rec_t;
};

DcamFakes generate_fakes(const DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t);

// Generator phase: adversarial (translated and reconstructed fakes) plus cycle losses in
// both directions, one update of gen_s and gen_t. Discriminators are read only.
// Fills the g_adv and cyc fields; returns the fakes produced before the update.
DcamFakes dcam_generator_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t,
                              DcamLosses& losses);

// Discriminator phase: one update of disc_s and disc_t against the given fakes (through
// the replay pools when use_pools). Generators are not touched. Fills d_s and d_t.
void dcam_discriminator_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t,
                             const DcamFakes& fakes, DcamLosses& losses, bool use_pools = true);

// Generator phase then discriminator phase; increments step.
DcamLosses dcam_train_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t);

// Runs cfg.steps steps on batches drawn from the source and target training images.
// `on_step` (optional) receives each step's losses.
DcamState train_dcam(const DcamConfig& cfg, const std::vector<Sample>& source, const std::vector<Sample>& target,
                     const std::function<void(std::int64_t, const DcamLosses&)>& on_step = {});

// Source-like { x^{t->s} } u { x^{s->t->s} } and target-like { x^{s->t} } u { x^{t->s->t} }.
// Every synthetic sample keeps the labels of its pre-image and names it in `origin`.
struct IntermediateDomains {
  std::vector<Sample> sourcelike;
  std::vector<Sample> targetlike;
};

IntermediateDomains synthesize_domains(const DcamState& state, const std::vector<Sample>& source,
                                       const std::vector<Sample>& target);

// Translates each sample independently; output order follows input order.
std::vector<Sample> translate_samples(const DcamState& state, const std::vector<Sample>& samples, Direction direction,
                                      const std::string& id_prefix);

void save_dcam(const std::filesystem::path& dir, const DcamState& state);
DcamState load_dcam(const std::filesystem::path& dir);

}  // namespace mtuda
