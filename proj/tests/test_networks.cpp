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
#include <filesystem>
#include <random>

#include "mtuda/error.hpp"
#include "mtuda/losses.hpp"
#include "mtuda/networks.hpp"
#include "mtuda/param_set.hpp"

namespace mtuda {
namespace {

ImageBatch random_images(std::size_t b, std::size_t h, std::size_t w, std::uint64_t seed,
                         Domain d = Domain::target) {
  ImageBatch out{Tensor({b, 1, h, w}), d};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (float& v : out.pixels.values()) v = u(rng);
  return out;
}

const SegNetSpec kSmallSeg{1, 5, 4, 2};

TEST(SegNet, OutputShapeAndSimplex) {
  SegNet net(kSmallSeg);
  const ParamSet p = net.init(1);
  const Tensor logits = net.forward(p, random_images(3, 16, 12, 2));
  EXPECT_EQ(logits.shape(), (Shape{3, 5, 16, 12}));
  const Tensor probs = softmax_channels(logits);
  EXPECT_TRUE(losses::is_prob_map(probs, 1e-5));
}

TEST(SegNet, DeterministicInitAndForward) {
  SegNet net(kSmallSeg);
  EXPECT_EQ(net.init(7), net.init(7));
  EXPECT_FALSE(net.init(7) == net.init(8));
  const ParamSet p = net.init(7);
  const ImageBatch x = random_images(2, 8, 8, 3);
  EXPECT_EQ(net.forward(p, x), net.forward(p, x));
}

TEST(SegNet, BatchInvariant) {
  SegNet net(kSmallSeg);
  const ParamSet p = net.init(2);
  const ImageBatch x = random_images(3, 8, 8, 4);
  const Tensor all = net.forward(p, x);
  for (std::size_t i = 0; i < 3; ++i) {
    const ImageBatch one{slice_batch(x.pixels, i, 1), x.domain};
    EXPECT_EQ(net.forward(p, one), slice_batch(all, i, 1));
  }
}

TEST(SegNet, ConfigErrors) {
  SegNet net(kSmallSeg);
  EXPECT_THROW(net.forward(net.init(1), random_images(1, 6, 8, 1)), ValidationError);  // 6 % 4 != 0
  EXPECT_THROW(net.forward(net.init(1), ImageBatch{Tensor({1, 2, 8, 8}), Domain::source}), ValidationError);
  SegNet wider(SegNetSpec{1, 5, 8, 2});
  EXPECT_THROW(net.check(wider.init(1)), ConfigError);
  EXPECT_THROW(net.forward(wider.init(1), random_images(1, 8, 8, 1)), ConfigError);
  EXPECT_THROW(SegNet(SegNetSpec{1, 0, 4, 2}), ConfigError);
}

TEST(Perturb, NoiseVarianceAndDeterminism) {
  const ImageBatch x{Tensor({4, 1, 160, 160}, 0.25f), Domain::source};  // 102400 pixels
  NoiseConfig cfg;
  cfg.input_noise_std = 0.1;
  cfg.seed = 5;
  const ImageBatch y = perturb(x, cfg);
  EXPECT_EQ(y.domain, x.domain);
  EXPECT_EQ(y.pixels.shape(), x.pixels.shape());
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < y.pixels.size(); ++i) {
    const double d = y.pixels[i] - x.pixels[i];
    mean += d;
    sq += d * d;
  }
  const double n = static_cast<double>(y.pixels.size());
  mean /= n;
  const double var = sq / n - mean * mean;
  EXPECT_GE(var, 0.009);
  EXPECT_LE(var, 0.011);
  EXPECT_EQ(perturb(x, cfg).pixels, y.pixels);
  cfg.seed = 6;
  EXPECT_NE(perturb(x, cfg).pixels, y.pixels);
  cfg.input_noise_std = 0.0;
  EXPECT_EQ(perturb(x, cfg).pixels, x.pixels);
  cfg.input_noise_std = -1.0;
  EXPECT_THROW(perturb(x, cfg), ValidationError);
}

TEST(Generator, RangeShapeAndDomainFlip) {
  Generator gen(GenSpec{1, 8, 2});
  ParamSet p = gen.init(3);
  // Perturb the zero-initialized tail so the residual branch is active.
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (float& v : p.value(i).values()) v += 0.05f;
  }
  const ImageBatch x = random_images(2, 16, 16, 9, Domain::source);
  const ImageBatch y = gen.forward(p, x);
  EXPECT_EQ(y.domain, Domain::target);
  EXPECT_EQ(y.pixels.shape(), x.pixels.shape());
  for (float v : y.pixels.values()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(gen.forward(p, y).domain, Domain::source);
}

TEST(Generator, NearIdentityAtInit) {
  Generator gen(GenSpec{1, 8, 2});
  const ImageBatch x = random_images(1, 16, 16, 4);
  const ImageBatch y = gen.forward(gen.init(1), x);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    EXPECT_FLOAT_EQ(y.pixels[i], std::tanh(x.pixels[i]));
  }
}

TEST(Discriminator, PatchShapes) {
  for (std::size_t outputs : {1, 3}) {
    Discriminator d(DiscSpec{1, 8, 3, outputs});
    const Tensor s = d.forward(d.init(2), random_images(2, 64, 64, 1));
    EXPECT_EQ(s.shape(), (Shape{2, outputs, 8, 8}));
  }
  EXPECT_THROW(Discriminator(DiscSpec{1, 8, 3, 2}), ConfigError);
  EXPECT_THROW(Discriminator(DiscSpec{1, 8, 0, 1}), ConfigError);
}

TEST(ParamSet, EncodeDecodeRoundTrip) {
  SegNet net(kSmallSeg);
  const ParamSet p = net.init(11);
  const EncodedParams enc = encode_params(p);
  EXPECT_EQ(decode_params(enc.manifest, enc.blob), p);
  EXPECT_THROW(decode_params(enc.manifest, enc.blob.substr(1)), std::exception);
}

TEST(ParamSet, CheckpointRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "mtuda_test_ckpt_networks";
  std::filesystem::remove_all(dir);
  Checkpoint c;
  c.groups["seg"] = SegNet(kSmallSeg).init(1);
  c.groups["gen"] = Generator(GenSpec{1, 4, 1}).init(2);
  c.meta["step"] = 17;
  save_checkpoint(dir, c);
  const Checkpoint back = load_checkpoint(dir);
  EXPECT_EQ(back.group("seg"), c.groups["seg"]);
  EXPECT_EQ(back.group("gen"), c.groups["gen"]);
  EXPECT_EQ(back.meta["step"], 17);
  EXPECT_THROW(back.group("missing"), ConfigError);
  EXPECT_THROW(load_checkpoint(dir / "nope"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(ParamSet, NamesAndLayout) {
  ParamSet p;
  p.add("a", Tensor({2}));
  EXPECT_THROW(p.add("a", Tensor({2})), ValidationError);
  EXPECT_EQ(p.total_elements(), 2u);
  EXPECT_TRUE(p.same_layout(p.zeros_like()));
  EXPECT_EQ(p.find("b"), nullptr);
}

}  // namespace
}  // namespace mtuda
