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
#include "mtuda/networks.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mtuda/error.hpp"
#include "mtuda/softmax.hpp"

namespace mtuda {

namespace {

enum class Init { he, zero };

struct LayerPlan {
  std::string name;
  std::size_t cin, cout, kernel;
  Init init;
};

ParamSet materialize(const std::vector<LayerPlan>& plan, std::uint64_t seed, bool zero_everything) {
  std::mt19937_64 rng(seed);
  ParamSet out;
  for (const auto& l : plan) {
    Tensor w({l.cout, l.cin, l.kernel, l.kernel});
    if (!zero_everything && l.init == Init::he) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(l.cin * l.kernel * l.kernel)));
      for (float& v : w.values()) v = static_cast<float>(dist(rng));
    }
    out.add(l.name + ".w", std::move(w));
    out.add(l.name + ".b", Tensor({l.cout}));
  }
  return out;
}

void check_layout(const ParamSet& layout, const ParamSet& params, const char* what) {
  if (!layout.same_layout(params)) {
    throw ConfigError(std::string(what) + " parameters do not match the configured architecture");
  }
}

ag::Var conv(ag::Graph& g, const BoundParams& p, const std::string& name, ag::Var x, std::size_t stride,
             std::size_t pad) {
  return g.conv2d(x, p(name + ".w"), p(name + ".b"), stride, pad);
}

ag::Var pure_input(ag::Graph& g, const ImageBatch& batch, std::size_t channels) {
  if (batch.pixels.rank() != 4 || batch.pixels.dim(1) != channels) {
    throw ValidationError("expected a (B, " + std::to_string(channels) + ", H, W) batch, got " +
                          shape_str(batch.pixels.shape()));
  }
  return g.constant(batch.pixels);
}

std::vector<LayerPlan> segnet_plan(const SegNetSpec& s) {
  std::vector<LayerPlan> plan;
  auto width = [&](std::size_t level) { return s.base_width << level; };
  for (std::size_t l = 0; l < s.depth; ++l) {
    plan.push_back({"enc" + std::to_string(l) + ".conv1", l == 0 ? s.in_channels : width(l - 1), width(l), 3, Init::he});
    plan.push_back({"enc" + std::to_string(l) + ".conv2", width(l), width(l), 3, Init::he});
  }
  plan.push_back({"bottleneck.conv1", width(s.depth - 1), width(s.depth), 3, Init::he});
  plan.push_back({"bottleneck.conv2", width(s.depth), width(s.depth), 3, Init::he});
  for (std::size_t l = s.depth; l-- > 0;) {
    plan.push_back({"up" + std::to_string(l), width(l + 1), 4 * width(l), 1, Init::he});
    plan.push_back({"dec" + std::to_string(l) + ".conv1", 2 * width(l), width(l), 3, Init::he});
    plan.push_back({"dec" + std::to_string(l) + ".conv2", width(l), width(l), 3, Init::he});
  }
  plan.push_back({"head", width(0), s.num_classes, 1, Init::he});
  return plan;
}

std::vector<LayerPlan> generator_plan(const GenSpec& s) {
  std::vector<LayerPlan> plan;
  plan.push_back({"stem", s.channels, s.width, 3, Init::he});
  for (std::size_t k = 0; k < s.residual_blocks; ++k) {
    plan.push_back({"res" + std::to_string(k) + ".conv1", s.width, s.width, 3, Init::he});
    plan.push_back({"res" + std::to_string(k) + ".conv2", s.width, s.width, 3, Init::zero});
  }
  plan.push_back({"out", s.width, s.channels, 3, Init::zero});
  return plan;
}

std::vector<LayerPlan> discriminator_plan(const DiscSpec& s) {
  std::vector<LayerPlan> plan;
  std::size_t cin = s.in_channels;
  for (std::size_t i = 0; i < s.downsamplings; ++i) {
    plan.push_back({"down" + std::to_string(i), cin, s.width << i, 4, Init::he});
    cin = s.width << i;
  }
  plan.push_back({"head", cin, s.num_outputs, 3, Init::he});
  return plan;
}

}  // namespace

void validate(const NoiseConfig& cfg) {
  if (!(cfg.input_noise_std >= 0.0)) throw ValidationError("noise std must be >= 0");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) throw ValidationError("dropout rate must lie in [0, 1)");
}

ag::Var BoundParams::operator()(std::string_view name) const {
  auto i = params->index_of(name);
  if (!i) throw ConfigError("missing parameter '" + std::string(name) + "'");
  return vars[*i];
}

BoundParams bind_params(ag::Graph& graph, const ParamSet& params, bool requires_grad) {
  BoundParams b{&params, {}};
  b.vars.reserve(params.size());
  for (const auto& e : params) b.vars.push_back(graph.leaf(e.value, requires_grad));
  return b;
}

ParamSet collect_gradients(ag::Graph& graph, const BoundParams& bound) {
  ParamSet out;
  for (std::size_t i = 0; i < bound.params->size(); ++i) out.add((*bound.params)[i].name, graph.grad(bound.vars[i]));
  return out;
}

SegNet::SegNet(SegNetSpec spec) : spec_(spec) {
  if (spec_.depth == 0 || spec_.base_width == 0 || spec_.num_classes < 2 || spec_.in_channels == 0) {
    throw ConfigError("invalid segmentation network spec");
  }
  layout_ = materialize(segnet_plan(spec_), 0, true);
}

ParamSet SegNet::init(std::uint64_t seed) const { return materialize(segnet_plan(spec_), seed, false); }

void SegNet::check(const ParamSet& params) const { check_layout(layout_, params, "segmentation network"); }

ag::Var SegNet::logits(ag::Graph& g, const BoundParams& p, ag::Var images, double dropout_rate,
                       std::uint64_t dropout_seed) const {
  const Tensor& x = g.value(images);
  const std::size_t factor = std::size_t{1} << spec_.depth;
  if (x.rank() != 4 || x.dim(1) != spec_.in_channels) {
    throw ValidationError("segmentation input must be (B, " + std::to_string(spec_.in_channels) + ", H, W), got " +
                          shape_str(x.shape()));
  }
  if (x.dim(2) % factor || x.dim(3) % factor) {
    throw ValidationError("spatial dims " + shape_str(x.shape()) + " not divisible by 2^depth = " +
                          std::to_string(factor));
  }
  std::vector<ag::Var> skips;
  ag::Var h = images;
  for (std::size_t l = 0; l < spec_.depth; ++l) {
    const std::string n = "enc" + std::to_string(l);
    h = g.relu(conv(g, p, n + ".conv1", h, 1, 1));
    h = g.relu(conv(g, p, n + ".conv2", h, 1, 1));
    skips.push_back(h);
    h = g.max_pool2(h);
  }
  h = g.relu(conv(g, p, "bottleneck.conv1", h, 1, 1));
  h = g.relu(conv(g, p, "bottleneck.conv2", h, 1, 1));
  h = g.dropout(h, static_cast<float>(dropout_rate), dropout_seed);
  for (std::size_t l = spec_.depth; l-- > 0;) {
    const std::string n = "dec" + std::to_string(l);
    h = g.pixel_shuffle2(conv(g, p, "up" + std::to_string(l), h, 1, 0));
    h = g.concat_channels(h, skips[l]);
    h = g.relu(conv(g, p, n + ".conv1", h, 1, 1));
    h = g.relu(conv(g, p, n + ".conv2", h, 1, 1));
  }
  return conv(g, p, "head", h, 1, 0);
}

Tensor SegNet::forward(const ParamSet& params, const ImageBatch& batch) const {
  check(params);
  ag::Graph g;
  const BoundParams p = bind_params(g, params, false);
  return g.value(logits(g, p, pure_input(g, batch, spec_.in_channels)));
}

Generator::Generator(GenSpec spec) : spec_(spec) {
  if (spec_.channels == 0 || spec_.width == 0) throw ConfigError("invalid generator spec");
  layout_ = materialize(generator_plan(spec_), 0, true);
}

ParamSet Generator::init(std::uint64_t seed) const { return materialize(generator_plan(spec_), seed, false); }

void Generator::check(const ParamSet& params) const { check_layout(layout_, params, "generator"); }

ag::Var Generator::translate(ag::Graph& g, const BoundParams& p, ag::Var images) const {
  ag::Var h = g.relu(conv(g, p, "stem", images, 1, 1));
  for (std::size_t k = 0; k < spec_.residual_blocks; ++k) {
    const std::string n = "res" + std::to_string(k);
    ag::Var r = g.relu(conv(g, p, n + ".conv1", h, 1, 1));
    h = g.add(h, conv(g, p, n + ".conv2", r, 1, 1));
  }
  return g.tanh(g.add(images, conv(g, p, "out", h, 1, 1)));
}

ImageBatch Generator::forward(const ParamSet& params, const ImageBatch& batch) const {
  check(params);
  ag::Graph g;
  const BoundParams p = bind_params(g, params, false);
  return {g.value(translate(g, p, pure_input(g, batch, spec_.channels))), other_domain(batch.domain)};
}

Discriminator::Discriminator(DiscSpec spec) : spec_(spec) {
  if (spec_.num_outputs != 1 && spec_.num_outputs != 3) throw ConfigError("discriminator outputs must be 1 or 3");
  if (spec_.downsamplings == 0) throw ConfigError("discriminator needs at least one downsampling");
  layout_ = materialize(discriminator_plan(spec_), 0, true);
}

ParamSet Discriminator::init(std::uint64_t seed) const { return materialize(discriminator_plan(spec_), seed, false); }

void Discriminator::check(const ParamSet& params) const { check_layout(layout_, params, "discriminator"); }

ag::Var Discriminator::scores(ag::Graph& g, const BoundParams& p, ag::Var images) const {
  ag::Var h = images;
  for (std::size_t i = 0; i < spec_.downsamplings; ++i) {
    h = g.leaky_relu(conv(g, p, "down" + std::to_string(i), h, 2, 1), 0.2f);
  }
  return conv(g, p, "head", h, 1, 1);
}

Tensor Discriminator::forward(const ParamSet& params, const ImageBatch& batch) const {
  check(params);
  ag::Graph g;
  const BoundParams p = bind_params(g, params, false);
  return g.value(scores(g, p, pure_input(g, batch, spec_.in_channels)));
}

Tensor softmax_channels(const Tensor& logits) {
  if (logits.rank() != 4) throw ValidationError("softmax_channels expects rank-4 logits");
  Tensor probs(logits.shape());
  softmax_channels<float>(logits.values(), probs.values(), logits.dim(0), logits.dim(1),
                          logits.dim(2) * logits.dim(3));
  return probs;
}

ImageBatch perturb(const ImageBatch& batch, const NoiseConfig& cfg) {
  validate(cfg);
  ImageBatch out = batch;
  if (cfg.input_noise_std == 0.0) return out;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.input_noise_std);
  for (float& v : out.pixels.values()) v += static_cast<float>(noise(rng));
  return out;
}

}  // namespace mtuda
