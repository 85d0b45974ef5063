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

// Dense CPU kernels behind the autograd graph. Rank-4 NCHW float32 throughout.

#include "mtuda/tensor.hpp"

namespace mtuda::kernels {

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t pad = 0;
};

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, ConvGeometry g);

// y = conv(x, w) + b with w shaped (Cout, Cin, kh, kw) and b shaped (Cout).
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, ConvGeometry g);

// Accumulates (+=) into whichever of gx, gw, gb is non-null.
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, ConvGeometry g, Tensor* gx, Tensor* gw,
                     Tensor* gb);

Tensor max_pool2_forward(const Tensor& x);
void max_pool2_backward(const Tensor& x, const Tensor& gy, Tensor& gx);

Tensor pixel_shuffle2_forward(const Tensor& x);
void pixel_shuffle2_backward(const Tensor& gy, Tensor& gx);

}  // namespace mtuda::kernels
