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
#include "mtuda/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kernels.hpp"
#include "mtuda/error.hpp"
#include "mtuda/softmax.hpp"

namespace mtuda::ag {

Graph::Node& Graph::node(Var v) {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) throw ValidationError("invalid graph variable");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) throw ValidationError("invalid graph variable");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor(value(v).shape());
  return n.grad;
}

const Tensor& Graph::grad(Var v) { return grad_buffer(v); }

bool Graph::any_requires_grad(std::initializer_list<Var> vs) const {
  return std::any_of(vs.begin(), vs.end(), [&](Var v) { return node(v).requires_grad; });
}

Var Graph::push(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Graph::constant(Tensor value) { return push(std::move(value), false); }

Var Graph::input(Tensor value, bool requires_grad) { return push(std::move(value), requires_grad); }

Var Graph::leaf(const Tensor& external, bool requires_grad) {
  Var v = push(Tensor(), requires_grad);
  node(v).external = &external;
  return v;
}

void Graph::backward(Var root) {
  if (backward_done_) throw ValidationError("Graph::backward called twice");
  backward_done_ = true;
  if (!node(root).requires_grad) return;
  if (value(root).size() != 1) throw ValidationError("backward root must be a scalar");
  grad_buffer(root)[0] = 1.0f;
  for (auto i = static_cast<std::int32_t>(root.id); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && !n.grad.empty()) n.backward();
  }
}

Var Graph::conv2d(Var x, Var weight, Var bias, std::size_t stride, std::size_t pad) {
  const kernels::ConvGeometry g{stride, pad};
  Var out = push(kernels::conv2d_forward(value(x), value(weight), value(bias), g), any_requires_grad({x, weight, bias}));
  if (node(out).requires_grad) {
    node(out).backward = [this, x, weight, bias, out, g] {
      kernels::conv2d_backward(value(x), value(weight), node(out).grad, g,
                               node(x).requires_grad ? &grad_buffer(x) : nullptr,
                               node(weight).requires_grad ? &grad_buffer(weight) : nullptr,
                               node(bias).requires_grad ? &grad_buffer(bias) : nullptr);
    };
  }
  return out;
}

Var Graph::relu(Var x) {
  Tensor y = value(x);
  for (float& v : y.values()) v = v > 0.0f ? v : 0.0f;
  Var out = push(std::move(y), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out] {
      const Tensor& yv = node(out).value;
      const Tensor& gy = node(out).grad;
      Tensor& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += yv[i] > 0.0f ? gy[i] : 0.0f;
    };
  }
  return out;
}

Var Graph::leaky_relu(Var x, float slope) {
  Tensor y = value(x);
  for (float& v : y.values()) v = v > 0.0f ? v : slope * v;
  Var out = push(std::move(y), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out, slope] {
      const Tensor& xv = value(x);
      const Tensor& gy = node(out).grad;
      Tensor& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += xv[i] > 0.0f ? gy[i] : slope * gy[i];
    };
  }
  return out;
}

Var Graph::tanh(Var x) {
  Tensor y = value(x);
  for (float& v : y.values()) v = std::tanh(v);
  Var out = push(std::move(y), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out] {
      const Tensor& yv = node(out).value;
      const Tensor& gy = node(out).grad;
      Tensor& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * (1.0f - yv[i] * yv[i]);
    };
  }
  return out;
}

Var Graph::add(Var a, Var b) {
  if (value(a).shape() != value(b).shape()) {
    throw ValidationError("add shape mismatch " + shape_str(value(a).shape()) + " vs " + shape_str(value(b).shape()));
  }
  Tensor y = value(a);
  const Tensor& bv = value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  Var out = push(std::move(y), any_requires_grad({a, b}));
  if (node(out).requires_grad) {
    node(out).backward = [this, a, b, out] {
      const Tensor& gy = node(out).grad;
      for (Var v : {a, b}) {
        if (!node(v).requires_grad) continue;
        Tensor& g = grad_buffer(v);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
    };
  }
  return out;
}

Var Graph::max_pool2(Var x) {
  Var out = push(kernels::max_pool2_forward(value(x)), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out] { kernels::max_pool2_backward(value(x), node(out).grad, grad_buffer(x)); };
  }
  return out;
}

Var Graph::pixel_shuffle2(Var x) {
  Var out = push(kernels::pixel_shuffle2_forward(value(x)), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out] { kernels::pixel_shuffle2_backward(node(out).grad, grad_buffer(x)); };
  }
  return out;
}

Var Graph::concat_channels(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 4 || bv.rank() != 4 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3)) {
    throw ValidationError("concat_channels shape mismatch");
  }
  const std::size_t n = av.dim(0), ca = av.dim(1), cb = bv.dim(1), hw = av.dim(2) * av.dim(3);
  Tensor y({n, ca + cb, av.dim(2), av.dim(3)});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.data() + i * ca * hw, ca * hw, y.data() + i * (ca + cb) * hw);
    std::copy_n(bv.data() + i * cb * hw, cb * hw, y.data() + i * (ca + cb) * hw + ca * hw);
  }
  Var out = push(std::move(y), any_requires_grad({a, b}));
  if (node(out).requires_grad) {
    node(out).backward = [this, a, b, out, n, ca, cb, hw] {
      const Tensor& gy = node(out).grad;
      if (node(a).requires_grad) {
        Tensor& ga = grad_buffer(a);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < ca * hw; ++k) ga[i * ca * hw + k] += gy[i * (ca + cb) * hw + k];
        }
      }
      if (node(b).requires_grad) {
        Tensor& gb = grad_buffer(b);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < cb * hw; ++k) gb[i * cb * hw + k] += gy[i * (ca + cb) * hw + ca * hw + k];
        }
      }
    };
  }
  return out;
}

Var Graph::dropout(Var x, float rate, std::uint64_t seed) {
  if (rate < 0.0f || rate >= 1.0f) throw ValidationError("dropout rate must lie in [0, 1)");
  if (rate == 0.0f) return x;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - rate);
  const float scale = 1.0f / (1.0f - rate);
  Tensor mask(value(x).shape());
  for (float& m : mask.values()) m = keep(rng) ? scale : 0.0f;
  Tensor y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  Var out = push(std::move(y), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out, mask = std::move(mask)] {
      const Tensor& gy = node(out).grad;
      Tensor& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * mask[i];
    };
  }
  return out;
}

Var Graph::softmax_channels(Var x) {
  const Tensor& xv = value(x);
  if (xv.rank() != 4) throw ValidationError("softmax_channels expects rank-4 input");
  const std::size_t n = xv.dim(0), c = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor y(xv.shape());
  mtuda::softmax_channels<float>(xv.values(), y.values(), n, c, hw);
  Var out = push(std::move(y), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out, n, c, hw] {
      mtuda::softmax_channels_backward<float>(node(out).value.values(), node(out).grad.values(),
                                              grad_buffer(x).values(), n, c, hw);
    };
  }
  return out;
}

Var Graph::slice_batch(Var x, std::size_t begin, std::size_t count) {
  Var out = push(mtuda::slice_batch(value(x), begin, count), node(x).requires_grad);
  if (node(out).requires_grad) {
    node(out).backward = [this, x, out, begin] {
      const Tensor& gy = node(out).grad;
      Tensor& gx = grad_buffer(x);
      const std::size_t offset = begin * gx.dim(1) * gx.dim(2) * gx.dim(3);
      for (std::size_t i = 0; i < gy.size(); ++i) gx[offset + i] += gy[i];
    };
  }
  return out;
}

Var Graph::concat_batch(std::span<const Var> parts) {
  std::vector<Tensor> values;
  bool rg = false;
  for (Var p : parts) {
    values.push_back(value(p));
    rg = rg || node(p).requires_grad;
  }
  Var out = push(mtuda::concat_batch(values), rg);
  if (rg) {
    node(out).backward = [this, out, vars = std::vector<Var>(parts.begin(), parts.end())] {
      const Tensor& gy = node(out).grad;
      std::size_t offset = 0;
      for (Var p : vars) {
        const std::size_t sz = value(p).size();
        if (node(p).requires_grad) {
          Tensor& g = grad_buffer(p);
          for (std::size_t i = 0; i < sz; ++i) g[i] += gy[offset + i];
        }
        offset += sz;
      }
    };
  }
  return out;
}

Var Graph::loss(Var input, LossFn fn) {
  Tensor g(value(input).shape());
  const double l = fn(value(input), g);
  if (!std::isfinite(l)) throw RuntimeFailure("non-finite loss value");
  Var out = push(Tensor({1}, static_cast<float>(l)), node(input).requires_grad);
  node(out).scalar = l;
  if (node(out).requires_grad) {
    node(out).backward = [this, input, out, g = std::move(g)] {
      const float up = node(out).grad[0];
      Tensor& gx = grad_buffer(input);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += up * g[i];
    };
  }
  return out;
}

Var Graph::weighted_sum(std::span<const std::pair<Var, double>> terms) {
  double total = 0.0;
  bool rg = false;
  for (const auto& [v, w] : terms) {
    if (value(v).size() != 1) throw ValidationError("weighted_sum expects scalar terms");
    total += w * node(v).scalar;
    rg = rg || node(v).requires_grad;
  }
  Var out = push(Tensor({1}, static_cast<float>(total)), rg);
  node(out).scalar = total;
  if (rg) {
    node(out).backward = [this, out, terms = std::vector<std::pair<Var, double>>(terms.begin(), terms.end())] {
      const float up = node(out).grad[0];
      for (const auto& [v, w] : terms) {
        if (node(v).requires_grad) grad_buffer(v)[0] += static_cast<float>(w) * up;
      }
    };
  }
  return out;
}

}  // namespace mtuda::ag
