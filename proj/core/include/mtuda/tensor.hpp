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
#include <new>
#include <span>
#include <string>
#include <vector>

namespace mtuda {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// 64-byte aligned storage. Eigen chooses its vectorized split from the buffer address, so
// unaligned heap blocks would make float reductions depend on where memory landed.
template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align})); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{Align}); }

  template <class U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U, Align>&) noexcept {
    return true;
  }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

// Dense row-major float32 array of arbitrary rank.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Rank-4 (N, C, H, W) element access.
  float& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  float at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  void fill(float value);
  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  FloatBuffer data_;
};

// Copies images [begin, begin + count) of a rank-4 tensor.
Tensor slice_batch(const Tensor& t, std::size_t begin, std::size_t count);
// Concatenates rank-4 tensors along the batch axis.
Tensor concat_batch(std::span<const Tensor> parts);

enum class Domain : std::uint8_t { source = 0, target = 1 };

const char* domain_name(Domain d);
Domain parse_domain(const std::string& name);
inline Domain other_domain(Domain d) { return d == Domain::source ? Domain::target : Domain::source; }

// Rank-4 batch of single-channel slices normalized to [-1, 1], tagged with its appearance domain.
struct ImageBatch {
  Tensor pixels;
  Domain domain = Domain::source;

  std::size_t batch() const { return pixels.dim(0); }
  std::size_t height() const { return pixels.dim(2); }
  std::size_t width() const { return pixels.dim(3); }
};

// Integer class map per pixel for a batch of slices, laid out (B, H, W).
struct LabelMap {
  std::size_t batch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(std::size_t b, std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : batch(b), height(h), width(w), labels(b * h * w, fill) {}

  std::uint8_t& at(std::size_t n, std::size_t y, std::size_t x) { return labels[(n * height + y) * width + x]; }
  std::uint8_t at(std::size_t n, std::size_t y, std::size_t x) const { return labels[(n * height + y) * width + x]; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

LabelMap concat_labels(std::span<const LabelMap> parts);

}  // namespace mtuda
