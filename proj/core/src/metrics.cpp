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
#include "mtuda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtuda/data.hpp"
#include "mtuda/error.hpp"
#include "mtuda/parallel.hpp"

namespace mtuda {

std::size_t Mask3D::count() const {
  return static_cast<std::size_t>(std::count_if(voxels.begin(), voxels.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

void require_same_grid(const Mask3D& a, const Mask3D& b, const char* what) {
  if (a.depth != b.depth || a.height != b.height || a.width != b.width) {
    throw ValidationError(std::string(what) + ": masks have different shapes");
  }
}

}  // namespace

Mask3D largest_component(const Mask3D& mask) {
  const std::size_t n = mask.voxels.size();
  std::vector<std::int32_t> label(n, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  const auto d = static_cast<std::ptrdiff_t>(mask.depth), h = static_cast<std::ptrdiff_t>(mask.height),
             w = static_cast<std::ptrdiff_t>(mask.width);
  for (std::size_t start = 0; start < n; ++start) {
    if (!mask.voxels[start] || label[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(sizes.size());
    std::size_t size = 0;
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++size;
      const auto z = static_cast<std::ptrdiff_t>(v / (mask.height * mask.width));
      const auto y = static_cast<std::ptrdiff_t>((v / mask.width) % mask.height);
      const auto x = static_cast<std::ptrdiff_t>(v % mask.width);
      for (std::ptrdiff_t dz = -1; dz <= 1; ++dz) {
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
          for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            const std::ptrdiff_t nz = z + dz, ny = y + dy, nx = x + dx;
            if (nz < 0 || ny < 0 || nx < 0 || nz >= d || ny >= h || nx >= w) continue;
            const auto u = static_cast<std::size_t>((nz * h + ny) * w + nx);
            if (mask.voxels[u] && label[u] < 0) {
              label[u] = id;
              stack.push_back(u);
            }
          }
        }
      }
    }
    sizes.push_back(size);
  }
  Mask3D out(mask.depth, mask.height, mask.width);
  if (sizes.empty()) return out;
  const auto best = static_cast<std::int32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t i = 0; i < n; ++i) out.voxels[i] = label[i] == best ? 1 : 0;
  return out;
}

double dice_score(const Mask3D& pred, const Mask3D& gt) {
  require_same_grid(pred, gt, "dice_score");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < pred.voxels.size(); ++i) {
    const bool p = pred.voxels[i] != 0, g = gt.voxels[i] != 0;
    a += p;
    b += g;
    both += p && g;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

Mask3D surface(const Mask3D& mask) {
  Mask3D out(mask.depth, mask.height, mask.width);
  const auto d = static_cast<std::ptrdiff_t>(mask.depth), h = static_cast<std::ptrdiff_t>(mask.height),
             w = static_cast<std::ptrdiff_t>(mask.width);
  static constexpr std::ptrdiff_t kOffsets[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (std::ptrdiff_t z = 0; z < d; ++z) {
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        if (!mask.voxels[static_cast<std::size_t>((z * h + y) * w + x)]) continue;
        bool edge = false;
        for (const auto& o : kOffsets) {
          const std::ptrdiff_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
          if (nz < 0 || ny < 0 || nx < 0 || nz >= d || ny >= h || nx >= w ||
              !mask.voxels[static_cast<std::size_t>((nz * h + ny) * w + nx)]) {
            edge = true;
            break;
          }
        }
        if (edge) out.voxels[static_cast<std::size_t>((z * h + y) * w + x)] = 1;
      }
    }
  }
  return out;
}

namespace {

constexpr double kFar = 1e30;

// 1D squared distance transform of f (Felzenszwalb & Huttenlocher lower envelope of parabolas).
void edt_1d(std::span<const double> f, std::span<double> out, std::vector<std::size_t>& v, std::vector<double>& z) {
  const std::size_t n = f.size();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] >= kFar) continue;
    if (!any) {
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      any = true;
      continue;
    }
    const auto qd = static_cast<double>(q);
    double s = 0.0;
    for (;;) {
      const auto vk = static_cast<double>(v[k]);
      s = ((f[q] + qd * qd) - (f[v[k]] + vk * vk)) / (2.0 * qd - 2.0 * vk);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (!any) {
    std::fill(out.begin(), out.end(), kFar);
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const double dq = qd - static_cast<double>(v[k]);
    out[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_transform(const Mask3D& features) {
  const std::size_t d = features.depth, h = features.height, w = features.width;
  std::vector<double> g(features.voxels.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = features.voxels[i] ? 0.0 : kFar;
  std::vector<double> line, out;
  std::vector<std::size_t> v;
  std::vector<double> z;
  auto pass = [&](std::size_t len, std::size_t count, auto index) {
    line.resize(len);
    out.resize(len);
    for (std::size_t c = 0; c < count; ++c) {
      for (std::size_t i = 0; i < len; ++i) line[i] = g[index(c, i)];
      edt_1d(line, out, v, z);
      for (std::size_t i = 0; i < len; ++i) g[index(c, i)] = out[i];
    }
  };
  pass(w, d * h, [&](std::size_t c, std::size_t i) { return c * w + i; });
  pass(h, d * w, [&](std::size_t c, std::size_t i) { return ((c / w) * h + i) * w + c % w; });
  pass(d, h * w, [&](std::size_t c, std::size_t i) { return i * h * w + c; });
  for (double& x : g) x = x >= kFar * 0.5 ? std::numeric_limits<double>::infinity() : std::sqrt(x);
  return g;
}

AsdResult asd(const Mask3D& pred, const Mask3D& gt, double empty_cap) {
  require_same_grid(pred, gt, "asd");
  if (pred.empty() || gt.empty()) return {empty_cap, true};
  const Mask3D sp = surface(pred), sg = surface(gt);
  const std::vector<double> to_gt = distance_transform(sg);
  const std::vector<double> to_pred = distance_transform(sp);
  auto directed = [](const Mask3D& from, const std::vector<double>& dist) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < from.voxels.size(); ++i) {
      if (!from.voxels[i]) continue;
      sum += dist[i];
      ++n;
    }
    return sum / static_cast<double>(n);
  };
  return {0.5 * (directed(sp, to_gt) + directed(sg, to_pred)), false};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    per_class[r.class_names[c]] = {{"dice", r.dice[c]}, {"asd", r.asd[c]}, {"asd_capped_volumes", r.asd_degenerate[c]}};
  }
  return {{"per_class", per_class},
          {"class_order", r.class_names},
          {"mean_dice", r.mean_dice},
          {"mean_asd", r.mean_asd},
          {"volumes", r.volumes}};
}

EvalReport evaluate_volumes(std::span<const VolumeLabels> volumes, std::size_t num_classes, double asd_cap) {
  if (volumes.empty()) throw ValidationError("evaluate: empty test set");
  if (num_classes < 2) throw ValidationError("evaluate: need at least one foreground class");
  const std::size_t fg = num_classes - 1;
  std::vector<std::vector<double>> dice(volumes.size(), std::vector<double>(fg));
  std::vector<std::vector<AsdResult>> dist(volumes.size(), std::vector<AsdResult>(fg));
  parallel_for(volumes.size(), [&](std::size_t i) {
    const VolumeLabels& v = volumes[i];
    const std::size_t n = v.depth * v.height * v.width;
    if (v.predicted.size() != n || v.reference.size() != n) throw ValidationError("evaluate: volume size mismatch");
    for (std::size_t c = 1; c < num_classes; ++c) {
      Mask3D pred(v.depth, v.height, v.width), gt(v.depth, v.height, v.width);
      for (std::size_t k = 0; k < n; ++k) {
        pred.voxels[k] = v.predicted[k] == c;
        gt.voxels[k] = v.reference[k] == c;
      }
      pred = largest_component(pred);
      dice[i][c - 1] = dice_score(pred, gt);
      dist[i][c - 1] = asd(pred, gt, asd_cap);
    }
  });

  EvalReport r;
  r.volumes = volumes.size();
  for (std::size_t c = 1; c < num_classes; ++c) {
    r.class_names.push_back(num_classes == kNumCardiacClasses ? class_name(c) : "class" + std::to_string(c));
  }
  r.dice.assign(fg, 0.0);
  r.asd.assign(fg, 0.0);
  r.asd_degenerate.assign(fg, 0);
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    for (std::size_t c = 0; c < fg; ++c) {
      r.dice[c] += dice[i][c];
      r.asd[c] += dist[i][c].value;
      r.asd_degenerate[c] += dist[i][c].degenerate;
    }
  }
  for (std::size_t c = 0; c < fg; ++c) {
    r.dice[c] /= static_cast<double>(volumes.size());
    r.asd[c] /= static_cast<double>(volumes.size());
    r.mean_dice += r.dice[c];
    r.mean_asd += r.asd[c];
  }
  r.mean_dice /= static_cast<double>(fg);
  r.mean_asd /= static_cast<double>(fg);
  return r;
}

}  // namespace mtuda
