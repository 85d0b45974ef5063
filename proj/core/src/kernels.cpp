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
#include "kernels.hpp"

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "mtuda/error.hpp"

namespace mtuda::kernels {

namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using MapCR = Eigen::Map<const MatR>;

struct ConvDims {
  std::size_t n, cin, h, w, cout, kh, kw, ho, wo;
  std::size_t k() const { return cin * kh * kw; }
  std::size_t hwo() const { return ho * wo; }
  bool pointwise(ConvGeometry g) const { return kh == 1 && kw == 1 && g.stride == 1 && g.pad == 0; }
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, ConvGeometry g) {
  if (x.rank() != 4 || w.rank() != 4) throw ValidationError("conv2d expects rank-4 input and weight");
  if (x.dim(1) != w.dim(1)) {
    throw ValidationError("conv2d channel mismatch: input " + shape_str(x.shape()) + ", weight " +
                          shape_str(w.shape()));
  }
  ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), 0, 0};
  d.ho = conv_out_extent(d.h, d.kh, g);
  d.wo = conv_out_extent(d.w, d.kw, g);
  return d;
}

void im2col(const float* img, const ConvDims& d, ConvGeometry g, float* col) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  const auto stride = static_cast<std::ptrdiff_t>(g.stride);
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto w = static_cast<std::ptrdiff_t>(d.w);
  for (std::size_t c = 0; c < d.cin; ++c) {
    const float* plane = img + c * d.h * d.w;
    for (std::size_t i = 0; i < d.kh; ++i) {
      for (std::size_t j = 0; j < d.kw; ++j) {
        float* row = col + ((c * d.kh + i) * d.kw + j) * d.hwo();
        for (std::size_t oy = 0; oy < d.ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * stride - pad + static_cast<std::ptrdiff_t>(i);
          float* dst = row + oy * d.wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + d.wo, 0.0f);
            continue;
          }
          const float* src = plane + iy * w;
          for (std::size_t ox = 0; ox < d.wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox) * stride - pad + static_cast<std::ptrdiff_t>(j);
            dst[ox] = (ix < 0 || ix >= w) ? 0.0f : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const float* col, const ConvDims& d, ConvGeometry g, float* img) {
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  const auto stride = static_cast<std::ptrdiff_t>(g.stride);
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto w = static_cast<std::ptrdiff_t>(d.w);
  for (std::size_t c = 0; c < d.cin; ++c) {
    float* plane = img + c * d.h * d.w;
    for (std::size_t i = 0; i < d.kh; ++i) {
      for (std::size_t j = 0; j < d.kw; ++j) {
        const float* row = col + ((c * d.kh + i) * d.kw + j) * d.hwo();
        for (std::size_t oy = 0; oy < d.ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * stride - pad + static_cast<std::ptrdiff_t>(i);
          if (iy < 0 || iy >= h) continue;
          const float* src = row + oy * d.wo;
          float* dst = plane + iy * w;
          for (std::size_t ox = 0; ox < d.wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox) * stride - pad + static_cast<std::ptrdiff_t>(j);
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, ConvGeometry g) {
  if (g.stride == 0 || in + 2 * g.pad < kernel) throw ValidationError("conv2d kernel larger than padded input");
  return (in + 2 * g.pad - kernel) / g.stride + 1;
}

// Each image is an independent GEMM so results do not depend on batch composition.
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, ConvGeometry g) {
  const ConvDims d = conv_dims(x, w, g);
  if (b.size() != d.cout) throw ValidationError("conv2d bias size mismatch");
  Tensor y({d.n, d.cout, d.ho, d.wo});
  MapCR wm(w.data(), static_cast<Eigen::Index>(d.cout), static_cast<Eigen::Index>(d.k()));
  FloatBuffer col(d.pointwise(g) ? 0 : d.k() * d.hwo());
  for (std::size_t n = 0; n < d.n; ++n) {
    const float* img = x.data() + n * d.cin * d.h * d.w;
    const float* cp = img;
    if (!d.pointwise(g)) {
      im2col(img, d, g, col.data());
      cp = col.data();
    }
    MapCR cm(cp, static_cast<Eigen::Index>(d.k()), static_cast<Eigen::Index>(d.hwo()));
    MapR ym(y.data() + n * d.cout * d.hwo(), static_cast<Eigen::Index>(d.cout), static_cast<Eigen::Index>(d.hwo()));
    ym.noalias() = wm * cm;
    for (std::size_t c = 0; c < d.cout; ++c) ym.row(static_cast<Eigen::Index>(c)).array() += b[c];
  }
  return y;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, ConvGeometry g, Tensor* gx, Tensor* gw,
                     Tensor* gb) {
  const ConvDims d = conv_dims(x, w, g);
  const auto K = static_cast<Eigen::Index>(d.k());
  const auto HW = static_cast<Eigen::Index>(d.hwo());
  const auto CO = static_cast<Eigen::Index>(d.cout);
  MapCR wm(w.data(), CO, K);
  FloatBuffer col(d.pointwise(g) ? 0 : d.k() * d.hwo());
  FloatBuffer gcol(gx && !d.pointwise(g) ? d.k() * d.hwo() : 0);
  for (std::size_t n = 0; n < d.n; ++n) {
    MapCR gym(gy.data() + n * d.cout * d.hwo(), CO, HW);
    const float* img = x.data() + n * d.cin * d.h * d.w;
    if (gw) {
      const float* cp = img;
      if (!d.pointwise(g)) {
        im2col(img, d, g, col.data());
        cp = col.data();
      }
      MapCR cm(cp, K, HW);
      MapR gwm(gw->data(), CO, K);
      gwm.noalias() += gym * cm.transpose();
    }
    if (gb) {
      // Plain left-to-right sums; Eigen's redux order is not fixed across buffers.
      const float* g = gy.data() + n * d.cout * d.hwo();
      for (std::size_t c = 0; c < d.cout; ++c) {
        float s = 0.0f;
        for (std::size_t i = 0; i < d.hwo(); ++i) s += g[c * d.hwo() + i];
        (*gb)[c] += s;
      }
    }
    if (gx) {
      float* gimg = gx->data() + n * d.cin * d.h * d.w;
      if (d.pointwise(g)) {
        MapR gxm(gimg, K, HW);
        gxm.noalias() += wm.transpose() * gym;
      } else {
        MapR gcm(gcol.data(), K, HW);
        gcm.noalias() = wm.transpose() * gym;
        col2im_add(gcol.data(), d, g, gimg);
      }
    }
  }
}

Tensor max_pool2_forward(const Tensor& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 || w % 2) throw ValidationError("max_pool2 needs even spatial dims, got " + shape_str(x.shape()));
  Tensor y({n, c, h / 2, w / 2});
  for (std::size_t p = 0; p < n * c; ++p) {
    const float* src = x.data() + p * h * w;
    float* dst = y.data() + p * (h / 2) * (w / 2);
    for (std::size_t oy = 0; oy < h / 2; ++oy) {
      for (std::size_t ox = 0; ox < w / 2; ++ox) {
        const float* q = src + 2 * oy * w + 2 * ox;
        dst[oy * (w / 2) + ox] = std::max(std::max(q[0], q[1]), std::max(q[w], q[w + 1]));
      }
    }
  }
  return y;
}

// Gradient goes to the first maximum in raster order within each window.
void max_pool2_backward(const Tensor& x, const Tensor& gy, Tensor& gx) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  for (std::size_t p = 0; p < n * c; ++p) {
    const float* src = x.data() + p * h * w;
    const float* g = gy.data() + p * (h / 2) * (w / 2);
    float* dst = gx.data() + p * h * w;
    for (std::size_t oy = 0; oy < h / 2; ++oy) {
      for (std::size_t ox = 0; ox < w / 2; ++ox) {
        const std::size_t base = 2 * oy * w + 2 * ox;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        for (std::size_t k = 1; k < 4; ++k) {
          if (src[cand[k]] > src[best]) best = cand[k];
        }
        dst[best] += g[oy * (w / 2) + ox];
      }
    }
  }
}

// (N, 4C, H, W) -> (N, C, 2H, 2W); input channel 4c + 2i + j lands at offset (i, j).
Tensor pixel_shuffle2_forward(const Tensor& x) {
  const std::size_t n = x.dim(0), c4 = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c4 % 4) throw ValidationError("pixel_shuffle2 needs a channel count divisible by 4");
  const std::size_t c = c4 / 4;
  Tensor y({n, c, 2 * h, 2 * w});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t i = k / 2, j = k % 2;
        const float* src = x.data() + ((b * c4 + 4 * ch + k) * h) * w;
        float* dst = y.data() + ((b * c + ch) * 2 * h) * 2 * w;
        for (std::size_t yy = 0; yy < h; ++yy) {
          for (std::size_t xx = 0; xx < w; ++xx) dst[(2 * yy + i) * 2 * w + 2 * xx + j] = src[yy * w + xx];
        }
      }
    }
  }
  return y;
}

void pixel_shuffle2_backward(const Tensor& gy, Tensor& gx) {
  const std::size_t n = gx.dim(0), c4 = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const std::size_t c = c4 / 4;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t i = k / 2, j = k % 2;
        float* dst = gx.data() + ((b * c4 + 4 * ch + k) * h) * w;
        const float* src = gy.data() + ((b * c + ch) * 2 * h) * 2 * w;
        for (std::size_t yy = 0; yy < h; ++yy) {
          for (std::size_t xx = 0; xx < w; ++xx) dst[yy * w + xx] += src[(2 * yy + i) * 2 * w + 2 * xx + j];
        }
      }
    }
  }
}

}  // namespace mtuda::kernels
