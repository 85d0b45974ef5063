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
#include "mtuda/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mtuda/error.hpp"

namespace mtuda {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  if (data_.size() != shape_numel(shape_)) {
    throw ValidationError("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                          shape_str(shape_));
  }
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ValidationError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

Tensor slice_batch(const Tensor& t, std::size_t begin, std::size_t count) {
  if (t.rank() != 4 || begin + count > t.dim(0)) throw ValidationError("slice_batch out of range");
  const std::size_t per = t.dim(1) * t.dim(2) * t.dim(3);
  Tensor out({count, t.dim(1), t.dim(2), t.dim(3)});
  std::copy(t.data() + begin * per, t.data() + (begin + count) * per, out.data());
  return out;
}

Tensor concat_batch(std::span<const Tensor> parts) {
  if (parts.empty()) throw ValidationError("concat_batch of nothing");
  Shape shape = parts.front().shape();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 4 || p.dim(1) != shape[1] || p.dim(2) != shape[2] || p.dim(3) != shape[3]) {
      throw ValidationError("concat_batch shape mismatch: " + shape_str(p.shape()) + " vs " + shape_str(shape));
    }
    total += p.dim(0);
  }
  shape[0] = total;
  Tensor out(std::move(shape));
  float* dst = out.data();
  for (const auto& p : parts) dst = std::copy(p.values().begin(), p.values().end(), dst);
  return out;
}

const char* domain_name(Domain d) { return d == Domain::source ? "source" : "target"; }

Domain parse_domain(const std::string& name) {
  if (name == "source") return Domain::source;
  if (name == "target") return Domain::target;
  throw ValidationError("unknown domain '" + name + "'");
}

LabelMap concat_labels(std::span<const LabelMap> parts) {
  if (parts.empty()) throw ValidationError("concat_labels of nothing");
  LabelMap out;
  out.height = parts.front().height;
  out.width = parts.front().width;
  for (const auto& p : parts) {
    if (p.height != out.height || p.width != out.width) throw ValidationError("concat_labels shape mismatch");
    out.batch += p.batch;
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  return out;
}

}  // namespace mtuda
