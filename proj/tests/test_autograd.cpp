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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mtuda/autograd.hpp"
#include "mtuda/error.hpp"

namespace mtuda {
namespace {

using Build = std::function<ag::Var(ag::Graph&, const std::vector<ag::Var>&)>;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  for (float& v : t.values()) v = d(rng);
  return t;
}

// Scalar probe: sum_i w_i * y_i with fixed random weights, so every output element matters.
ag::Var probe(ag::Graph& g, ag::Var y, std::uint64_t seed) {
  const Tensor w = random_tensor(g.value(y).shape(), seed);
  return g.loss(y, [w](const Tensor& x, Tensor& grad) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += static_cast<double>(w[i]) * x[i];
      grad[i] = w[i];
    }
    return s;
  });
}

// Distinct values at least 0.05 apart and 0.025 away from zero, so relu and max-pool
// kinks stay farther than the FD step from every input.
Tensor kink_free_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::vector<float> v(t.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -1.6f + 0.05f * static_cast<float>(i) + 0.025f;
  std::shuffle(v.begin(), v.end(), std::mt19937_64(seed));
  std::copy(v.begin(), v.end(), t.data());
  return t;
}

double evaluate(const Build& build, const std::vector<Tensor>& inputs) {
  ag::Graph g;
  std::vector<ag::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.input(t, false));
  return g.scalar(probe(g, build(g, vars), 99));
}

// Max over inputs of norm-relative error between tape gradients and central differences.
double gradient_error(const Build& build, std::vector<Tensor> inputs, float h = 1e-2f) {
  ag::Graph g;
  std::vector<ag::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.input(t, true));
  g.backward(probe(g, build(g, vars), 99));
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = g.grad(vars[k]);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const float x = inputs[k][i];
      inputs[k][i] = x + h;
      const double up = evaluate(build, inputs);
      inputs[k][i] = x - h;
      const double down = evaluate(build, inputs);
      inputs[k][i] = x;
      const double num = (up - down) / (2.0 * h);
      diff += (num - analytic[i]) * (num - analytic[i]);
      norm += num * num;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
  }
  return worst;
}

constexpr double kTol = 1e-2;  // float32 tape, h = 1e-2

TEST(Autograd, Conv2dGradients) {
  for (std::size_t stride : {1, 2}) {
    const Build f = [stride](ag::Graph& g, const auto& v) { return g.conv2d(v[0], v[1], v[2], stride, 1); };
    EXPECT_LT(gradient_error(f, {random_tensor({2, 2, 6, 6}, 1), random_tensor({3, 2, 3, 3}, 2),
                                 random_tensor({3}, 3)}),
              kTol)
        << "stride " << stride;
  }
}

TEST(Autograd, Conv2dKnownValue) {
  ag::Graph g;
  Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
  Tensor w({1, 1, 1, 1}, {2});
  Tensor b({1}, {0.5f});
  const Tensor& y = g.value(g.conv2d(g.input(x, false), g.input(w, false), g.input(b, false), 1, 0));
  EXPECT_EQ(y, Tensor({1, 1, 2, 2}, {2.5f, 4.5f, 6.5f, 8.5f}));
}

TEST(Autograd, PointwiseGradients) {
  const std::vector<std::pair<const char*, Build>> ops = {
      {"tanh", [](ag::Graph& g, const auto& v) { return g.tanh(v[0]); }},
      {"relu", [](ag::Graph& g, const auto& v) { return g.relu(v[0]); }},
      {"leaky_relu", [](ag::Graph& g, const auto& v) { return g.leaky_relu(v[0], 0.2f); }},
      {"add", [](ag::Graph& g, const auto& v) { return g.add(v[0], v[1]); }},
      {"softmax", [](ag::Graph& g, const auto& v) { return g.softmax_channels(v[0]); }},
      {"max_pool2", [](ag::Graph& g, const auto& v) { return g.max_pool2(v[0]); }},
      {"pixel_shuffle2", [](ag::Graph& g, const auto& v) { return g.pixel_shuffle2(v[0]); }},
      {"concat_channels", [](ag::Graph& g, const auto& v) { return g.concat_channels(v[0], v[1]); }},
      {"dropout", [](ag::Graph& g, const auto& v) { return g.dropout(v[0], 0.3f, 5); }},
      {"slice_batch", [](ag::Graph& g, const auto& v) { return g.slice_batch(g.concat_channels(v[0], v[1]), 0, 1); }},
      {"concat_batch", [](ag::Graph& g, const auto& v) {
         const ag::Var parts[] = {v[1], v[0]};
         return g.concat_batch(parts);
       }},
  };
  for (const auto& [name, f] : ops) {
    EXPECT_LT(gradient_error(f, {kink_free_tensor({1, 4, 4, 4}, 7), kink_free_tensor({1, 4, 4, 4}, 8)}), kTol) << name;
  }
}

TEST(Autograd, WeightedSumAndSharedUse) {
  const Build f = [](ag::Graph& g, const auto& v) {
    ag::Var a = probe(g, g.tanh(v[0]), 3);
    ag::Var b = probe(g, g.add(v[0], v[0]), 4);
    const std::pair<ag::Var, double> terms[] = {{a, 0.7}, {b, -1.3}};
    return g.weighted_sum(terms);
  };
  EXPECT_LT(gradient_error(f, {random_tensor({1, 2, 3, 3}, 11)}), kTol);
}

TEST(Autograd, WeightedSumValueAndGrad) {
  ag::Graph g;
  ag::Var x = g.input(Tensor({1, 1, 1, 2}, {1.0f, -2.0f}), true);
  auto sq = [&](double scale) {
    return g.loss(x, [scale](const Tensor& t, Tensor& grad) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        s += scale * t[i] * t[i];
        grad[i] = static_cast<float>(2.0 * scale * t[i]);
      }
      return s;
    });
  };
  const std::pair<ag::Var, double> terms[] = {{sq(1.0), 0.5}, {sq(2.0), 0.25}};
  ag::Var total = g.weighted_sum(terms);
  EXPECT_DOUBLE_EQ(g.scalar(total), 0.5 * 5.0 + 0.25 * 10.0);
  g.backward(total);
  // d/dx (0.5 x^2 + 0.5 x^2) = 2x
  EXPECT_FLOAT_EQ(g.grad(x)[0], 2.0f);
  EXPECT_FLOAT_EQ(g.grad(x)[1], -4.0f);
}

TEST(Autograd, ConstantsReceiveNoGradient) {
  ag::Graph g;
  ag::Var c = g.input(random_tensor({1, 1, 2, 2}, 1), false);
  ag::Var x = g.input(random_tensor({1, 1, 2, 2}, 2), true);
  g.backward(probe(g, g.add(c, x), 3));
  EXPECT_FALSE(g.requires_grad(c));
  EXPECT_THROW(g.backward(probe(g, x, 1)), ValidationError);
}

TEST(Autograd, NonFiniteLossRejected) {
  ag::Graph g;
  ag::Var x = g.input(Tensor({1}, 1.0f), true);
  EXPECT_THROW(g.loss(x, [](const Tensor&, Tensor&) { return std::nan(""); }), RuntimeFailure);
}

TEST(Autograd, DropoutIsSeededAndScaled) {
  ag::Graph g;
  ag::Var x = g.input(Tensor({1, 1, 100, 100}, 1.0f), false);
  const Tensor a = g.value(g.dropout(x, 0.5f, 3));
  const Tensor b = g.value(g.dropout(x, 0.5f, 3));
  const Tensor c = g.value(g.dropout(x, 0.5f, 4));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::size_t kept = 0;
  for (float v : a.values()) {
    EXPECT_TRUE(v == 0.0f || v == 2.0f);
    kept += v != 0.0f;
  }
  EXPECT_NEAR(kept / 10000.0, 0.5, 0.03);
  EXPECT_EQ(g.value(g.dropout(x, 0.0f, 3)), g.value(x));
}

}  // namespace
}  // namespace mtuda
