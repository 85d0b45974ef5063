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
#include <vector>

#include "mtuda/autograd.hpp"
#include "mtuda/param_set.hpp"
#include "mtuda/tensor.hpp"

namespace mtuda {

// U-Net segmentation backbone: `depth` pooling stages, two 3x3 convs per stage,
// skip connections, width doubling per stage and a 1x1 classification head.
struct SegNetSpec {
  std::size_t in_channels = 1;
  std::size_t num_classes = 5;
  std::size_t base_width = 16;
  std::size_t depth = 4;
};

// Residual translation generator at full resolution. Output is tanh(x + r(x)); the
// residual branch ends in zero-initialized convolutions so an untrained generator is
// tanh(x), close to the identity on [-1, 1].
struct GenSpec {
  std::size_t channels = 1;
  std::size_t width = 16;
  std::size_t residual_blocks = 4;
};

// PatchGAN discriminator: `downsamplings` stride-2 4x4 convs then a 3x3 head emitting
// `num_outputs` logits per patch (1 for the binary mode, 3 for the three-class mode).
struct DiscSpec {
  std::size_t in_channels = 1;
  std::size_t width = 16;
  std::size_t downsamplings = 3;
  std::size_t num_outputs = 3;
};

// Student/teacher input perturbation.
struct NoiseConfig {
  double input_noise_std = 0.1;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;
};

void validate(const NoiseConfig& cfg);

// Graph variables bound to one ParamSet, in ParamSet order.
struct BoundParams {
  const ParamSet* params = nullptr;
  std::vector<ag::Var> vars;

  ag::Var operator()(std::string_view name) const;
};

BoundParams bind_params(ag::Graph& graph, const ParamSet& params, bool requires_grad);
// Gradients accumulated into the bound leaves, laid out like the bound ParamSet.
ParamSet collect_gradients(ag::Graph& graph, const BoundParams& bound);

class SegNet {
 public:
  explicit SegNet(SegNetSpec spec);

  const SegNetSpec& spec() const noexcept { return spec_; }
  ParamSet init(std::uint64_t seed) const;
  // ConfigError when the parameter layout does not match the network spec.
  void check(const ParamSet& params) const;

  ag::Var logits(ag::Graph& graph, const BoundParams& params, ag::Var images, double dropout_rate = 0.0,
                 std::uint64_t dropout_seed = 0) const;

  // Pure forward: (B, 1, H, W) images -> (B, C, H, W) logits.
  Tensor forward(const ParamSet& params, const ImageBatch& batch) const;

 private:
  SegNetSpec spec_;
  ParamSet layout_;
};

class Generator {
 public:
  explicit Generator(GenSpec spec);

  const GenSpec& spec() const noexcept { return spec_; }
  ParamSet init(std::uint64_t seed) const;
  void check(const ParamSet& params) const;

  ag::Var translate(ag::Graph& graph, const BoundParams& params, ag::Var images) const;

  // Pure forward; the output carries the opposite domain tag of the input.
  ImageBatch forward(const ParamSet& params, const ImageBatch& batch) const;

 private:
  GenSpec spec_;
  ParamSet layout_;
};

class Discriminator {
 public:
  explicit Discriminator(DiscSpec spec);

  const DiscSpec& spec() const noexcept { return spec_; }
  ParamSet init(std::uint64_t seed) const;
  void check(const ParamSet& params) const;

  ag::Var scores(ag::Graph& graph, const BoundParams& params, ag::Var images) const;
  Tensor forward(const ParamSet& params, const ImageBatch& batch) const;

 private:
  DiscSpec spec_;
  ParamSet layout_;
};

Tensor softmax_channels(const Tensor& logits);

// Adds seeded N(0, input_noise_std^2) noise per pixel; shape and domain tag are preserved.
ImageBatch perturb(const ImageBatch& batch, const NoiseConfig& cfg);

}  // namespace mtuda
