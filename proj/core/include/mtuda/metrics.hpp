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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtuda {

// Binary 3D mask indexed (z * height + y) * width + x.
struct Mask3D {
  std::size_t depth = 0, height = 0, width = 0;
  std::vector<std::uint8_t> voxels;

  Mask3D() = default;
  Mask3D(std::size_t d, std::size_t h, std::size_t w) : depth(d), height(h), width(w), voxels(d * h * w, 0) {}

  std::uint8_t& at(std::size_t z, std::size_t y, std::size_t x) { return voxels[(z * height + y) * width + x]; }
  std::uint8_t at(std::size_t z, std::size_t y, std::size_t x) const { return voxels[(z * height + y) * width + x]; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const Mask3D&, const Mask3D&) = default;
};

// Keeps the largest 26-connected component; ties go to the component met first in raster order.
Mask3D largest_component(const Mask3D& mask);

// 2|A n B| / (|A| + |B|); 1 when both are empty, 0 when exactly one is.
double dice_score(const Mask3D& pred, const Mask3D& gt);

// Foreground voxels with at least one 6-neighbour outside the mask (grid border counts as outside).
Mask3D surface(const Mask3D& mask);

struct AsdResult {
  double value = 0.0;
  bool degenerate = false;  // one mask was empty; value is the configured cap
};

// Mean of the two directed average surface distances (unit spacing).
AsdResult asd(const Mask3D& pred, const Mask3D& gt, double empty_cap = 100.0);

// Exact Euclidean distance from every voxel to the nearest set voxel of `features`
// (separable lower-envelope transform). Infinity everywhere when there are no features.
std::vector<double> distance_transform(const Mask3D& features);

struct EvalReport {
  std::vector<std::string> class_names;  // foreground classes only
  std::vector<double> dice;
  std::vector<double> asd;
  std::vector<std::size_t> asd_degenerate;  // per class: volumes that hit the ASD cap
  double mean_dice = 0.0;
  double mean_asd = 0.0;
  std::size_t volumes = 0;
};

nlohmann::json to_json(const EvalReport& report);

// One restacked test volume: predicted and reference label volumes, same shape.
struct VolumeLabels {
  std::string id;
  std::size_t depth = 0, height = 0, width = 0;
  std::vector<std::uint8_t> predicted;
  std::vector<std::uint8_t> reference;
};

// Per class: largest 3D component of the prediction, then Dice and ASD against the
// reference; averaged over volumes, then over the foreground classes.
EvalReport evaluate_volumes(std::span<const VolumeLabels> volumes, std::size_t num_classes, double asd_cap = 100.0);

}  // namespace mtuda
