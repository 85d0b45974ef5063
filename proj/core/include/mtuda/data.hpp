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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtuda/tensor.hpp"

namespace mtuda {

// Class indices shared by the synthetic benchmark and the volume ingestion path.
enum CardiacClass : std::uint8_t { kBackground = 0, kAA = 1, kLAC = 2, kLVC = 3, kMYO = 4 };
inline constexpr std::size_t kNumCardiacClasses = 5;
const char* class_name(std::size_t label);

// Appearance of one synthetic modality. Raw intensities live in [0, 1] and are mapped
// to [-1, 1] with clamping after bias field and noise are applied.
struct Appearance {
  std::array<double, kNumCardiacClasses> class_means{0.10, 0.75, 0.60, 0.90, 0.40};
  bool invert_contrast = false;  // use 1 - mean for every class
  double noise_std = 0.03;
  double bias_strength = 0.10;   // peak amplitude of the smooth additive bias field
};

struct SynthConfig {
  std::size_t image_size = 64;
  std::size_t num_classes = kNumCardiacClasses;
  std::size_t source_count = 200;   // M
  std::size_t target_count = 200;   // P, unlabeled target training slices
  std::size_t target_test_count = 50;
  double label_fraction = 0.25;     // N / M
  Appearance source{};
  Appearance target{{0.10, 0.75, 0.60, 0.90, 0.40}, true, 0.05, 0.15};
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);
nlohmann::json to_json(const SynthConfig& cfg);

enum class Split : std::uint8_t { train = 0, test = 1 };
const char* split_name(Split s);
Split parse_split(const std::string& name);

// One 2D slice. `volume` groups slices of the same scan for 3D evaluation.
struct Sample {
  std::string id;
  Domain domain = Domain::source;
  Split split = Split::train;
  std::string volume;
  std::size_t slice = 0;
  std::string origin;               // pre-image id for translated samples, empty otherwise
  Tensor image;                     // (1, 1, H, W)
  std::optional<LabelMap> labels;   // (1, H, W)

  bool labeled() const { return labels.has_value(); }
  std::size_t height() const { return image.dim(2); }
  std::size_t width() const { return image.dim(3); }
};

struct Dataset {
  std::size_t num_classes = kNumCardiacClasses;
  std::vector<Sample> samples;
  nlohmann::json provenance = nlohmann::json::object();
};

// D_s^l, D_s^u, D_t and the held-out labeled target test split.
struct DomainSplits {
  std::vector<Sample> source_labeled;
  std::vector<Sample> source_unlabeled;
  std::vector<Sample> target_train;
  std::vector<Sample> target_test;
};

DomainSplits partition(const Dataset& data);

// Randomized two-chamber anatomy: an annulus (MYO) around a blob (LVC) plus separate
// AA and LAC blobs. Returns a (1, size, size) map; a pure function of (seed, size).
LabelMap synth_anatomy(std::uint64_t seed, std::size_t size = 64);

// Maps classes to modality intensities, adds a smooth bias field and Gaussian noise.
ImageBatch render_modality(const LabelMap& labels, Domain domain, const Appearance& look, std::uint64_t seed);

Dataset make_dataset(const SynthConfig& cfg);

// Stacks sample images into one (B, 1, H, W) batch tagged `domain`.
ImageBatch stack_images(std::span<const Sample* const> samples, Domain domain);
// Stacks sample labels; every sample must be labeled.
LabelMap stack_labels(std::span<const Sample* const> samples);

// Directory container: manifest.json plus samples/<id>.bin records
// (header "MTDS", u32 version, u32 height, u32 width, u32 has_labels, float32 image, uint8 labels).
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& dir);

// ---- Volume ingestion -------------------------------------------------------

// Scalar volume indexed (z * ny + y) * nx + x.
struct Volume {
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<float> voxels;

  float at(std::size_t x, std::size_t y, std::size_t z) const { return voxels[(z * ny + y) * nx + x]; }
  float& at(std::size_t x, std::size_t y, std::size_t z) { return voxels[(z * ny + y) * nx + x]; }
};

struct VolumeMeta {
  std::array<double, 3> spacing{1.0, 1.0, 1.0};  // mm per axis (x, y, z)
  std::string orientation = "RAS";
  std::array<std::size_t, 3> original_shape{0, 0, 0};
};

// Coronal slices (x-z planes, one per y index) of a preprocessed volume.
struct SliceStack {
  std::size_t height = 0;  // z extent of the crop
  std::size_t width = 0;   // x extent of the crop
  std::vector<std::vector<float>> images;
  std::vector<std::vector<std::uint8_t>> labels;  // empty when no label volume was given
  bool padded = false;
};

Volume resample_trilinear(const Volume& v, const std::array<double, 3>& spacing);
Volume resample_nearest(const Volume& v, const std::array<double, 3>& spacing);

// Resamples to unit spacing, crops a roi x roi window in the coronal plane centered on the
// foreground centroid (labels when given, else voxels above the volume median) and rescales
// the 1st-99th percentile range to [-1, 1]. Volumes smaller than the ROI are padded.
SliceStack preprocess_volume(const Volume& volume, const VolumeMeta& meta, std::size_t roi_size,
                             const Volume* labels = nullptr);

struct NiftiImage {
  Volume volume;
  VolumeMeta meta;
};

// NIfTI-1 single-file reader (.nii, .nii.gz) for scalar volumes.
NiftiImage read_nifti(const std::filesystem::path& path);
void write_nifti(const std::filesystem::path& path, const NiftiImage& image);

// Maps MM-WHS label values (820 AA, 420 LAC, 500 LVC, 205 MYO) to class indices.
Volume map_mmwhs_labels(const Volume& raw);

}  // namespace mtuda
