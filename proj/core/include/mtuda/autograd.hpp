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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mtuda/tensor.hpp"

namespace mtuda::ag {

// Handle to a node in a Graph.
struct Var {
  std::int32_t id = -1;
  bool valid() const noexcept { return id >= 0; }
};

// A reverse-mode tape over float tensors. Nodes are recorded in execution order and
// backward() replays them in reverse. A Graph is single-use: build, backward once, read grads.
//
// Leaves created with leaf() reference external storage that must outlive the graph.
class Graph {
 public:
  // Returns the loss value and writes dLoss/dInput into `grad` (same shape as input).
  using LossFn = std::function<double(const Tensor& input, Tensor& grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var input(Tensor value, bool requires_grad);
  Var leaf(const Tensor& external, bool requires_grad);

  const Tensor& value(Var v) const;
  // Accumulated gradient; an all-zero tensor when nothing flowed into v.
  const Tensor& grad(Var v);
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  double scalar(Var v) const { return node(v).scalar; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  void backward(Var root);

  Var conv2d(Var x, Var weight, Var bias, std::size_t stride, std::size_t pad);
  Var relu(Var x);
  Var leaky_relu(Var x, float slope);
  Var tanh(Var x);
  Var add(Var a, Var b);
  Var max_pool2(Var x);
  Var pixel_shuffle2(Var x);
  Var concat_channels(Var a, Var b);
  Var dropout(Var x, float rate, std::uint64_t seed);
  Var softmax_channels(Var x);
  // Views images [begin, begin + count) along the batch axis (copying).
  Var slice_batch(Var x, std::size_t begin, std::size_t count);
  Var concat_batch(std::span<const Var> parts);

  Var loss(Var input, LossFn fn);
  // sum_i weight_i * term_i over scalar nodes.
  Var weighted_sum(std::span<const std::pair<Var, double>> terms);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    double scalar = 0.0;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Tensor& grad_buffer(Var v);
  bool any_requires_grad(std::initializer_list<Var> vs) const;
  Var push(Tensor value, bool requires_grad);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace mtuda::ag
