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
#include <filesystem>
#include <set>

#include "mtuda/data.hpp"
#include "mtuda/error.hpp"

namespace mtuda {
namespace {

namespace fs = std::filesystem;

struct Pt {
  double x, y;
};

double cross(const Pt& o, const Pt& a, const Pt& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Andrew's monotone chain over pixel corners, counter-clockwise.
std::vector<Pt> hull_of(const LabelMap& m, std::uint8_t cls) {
  std::vector<Pt> pts;
  for (std::size_t y = 0; y < m.height; ++y) {
    for (std::size_t x = 0; x < m.width; ++x) {
      if (m.at(0, y, x) != cls) continue;
      for (double dy : {0.0, 1.0})
        for (double dx : {0.0, 1.0}) pts.push_back({x + dx, y + dy});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Pt> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool strictly_inside(const std::vector<Pt>& hull, const Pt& p) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) <= 0) return false;
  }
  return true;
}

SynthConfig small_config() {
  SynthConfig c;
  c.source_count = 12;
  c.target_count = 10;
  c.target_test_count = 4;
  c.seed = 3;
  return c;
}

TEST(SynthAnatomy, DeterministicPerSeed) {
  EXPECT_EQ(synth_anatomy(42), synth_anatomy(42));
  EXPECT_FALSE(synth_anatomy(42) == synth_anatomy(43));
}

TEST(SynthAnatomy, VentricleInsideMyocardiumHull) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LabelMap m = synth_anatomy(seed);
    const auto hull = hull_of(m, kMYO);
    ASSERT_GE(hull.size(), 3u);
    for (std::size_t y = 0; y < m.height; ++y) {
      for (std::size_t x = 0; x < m.width; ++x) {
        if (m.at(0, y, x) == kLVC) ASSERT_TRUE(strictly_inside(hull, {x + 0.5, y + 0.5})) << seed;
      }
    }
  }
}

TEST(SynthAnatomy, ClassPresenceAndBackgroundFraction) {
  std::size_t all_present = 0;
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const LabelMap m = synth_anatomy(seed);
    std::array<std::size_t, kNumCardiacClasses> counts{};
    for (auto v : m.labels) ++counts[v];
    all_present += std::all_of(counts.begin() + 1, counts.end(), [](std::size_t c) { return c > 0; });
    const double bg = static_cast<double>(counts[0]) / static_cast<double>(m.labels.size());
    lo = std::min(lo, bg);
    hi = std::max(hi, bg);
  }
  EXPECT_GE(all_present, 950u);
  EXPECT_GE(lo, 0.5);
  EXPECT_LE(hi, 0.95);
}

TEST(RenderModality, PiecewiseConstantWithoutNoise) {
  const LabelMap m = synth_anatomy(1);
  Appearance look;
  look.noise_std = 0.0;
  look.bias_strength = 0.0;
  const ImageBatch img = render_modality(m, Domain::source, look, 9);
  std::set<float> values(img.pixels.values().begin(), img.pixels.values().end());
  EXPECT_LE(values.size(), 5u);
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    EXPECT_FLOAT_EQ(img.pixels[i], static_cast<float>(2.0 * look.class_means[m.labels[i]] - 1.0));
  }
}

TEST(RenderModality, RangeDomainAndLabelsUntouched) {
  const LabelMap m = synth_anatomy(2);
  const LabelMap copy = m;
  const SynthConfig cfg;
  const ImageBatch a = render_modality(m, Domain::source, cfg.source, 1);
  const ImageBatch b = render_modality(m, Domain::target, cfg.target, 1);
  EXPECT_EQ(m, copy);
  EXPECT_EQ(a.domain, Domain::source);
  EXPECT_EQ(b.domain, Domain::target);
  for (const auto* img : {&a, &b}) {
    for (float v : img->pixels.values()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
  // Per-class mean intensity order differs between the two modalities.
  auto class_means = [&](const ImageBatch& img) {
    std::array<double, kNumCardiacClasses> sum{}, n{};
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      sum[m.labels[i]] += img.pixels[i];
      n[m.labels[i]] += 1;
    }
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] /= n[c];
    return sum;
  };
  auto rank = [](const std::array<double, kNumCardiacClasses>& v) {
    std::array<std::size_t, kNumCardiacClasses> idx{0, 1, 2, 3, 4};
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    return idx;
  };
  EXPECT_NE(rank(class_means(a)), rank(class_means(b)));
  EXPECT_EQ(render_modality(m, Domain::source, cfg.source, 1).pixels, a.pixels);
}

TEST(MakeDataset, SizesAndLabelWithholding) {
  const SynthConfig cfg = small_config();
  const Dataset data = make_dataset(cfg);
  EXPECT_EQ(data.samples.size(), 26u);
  const DomainSplits s = partition(data);
  EXPECT_EQ(s.source_labeled.size(), 3u);  // round(0.25 * 12)
  EXPECT_EQ(s.source_unlabeled.size(), 9u);
  EXPECT_EQ(s.target_train.size(), 10u);
  EXPECT_EQ(s.target_test.size(), 4u);
  for (const auto& t : s.target_train) EXPECT_FALSE(t.labeled());
  for (const auto& t : s.target_test) EXPECT_TRUE(t.labeled());
  for (const auto& x : data.samples) {
    if (x.domain == Domain::target && x.split == Split::train) EXPECT_FALSE(x.labeled());
  }
  std::set<std::string> train_ids, test_ids;
  for (const auto& t : s.target_train) train_ids.insert(t.id);
  for (const auto& t : s.target_test) test_ids.insert(t.id);
  for (const auto& id : test_ids) EXPECT_FALSE(train_ids.contains(id));
}

TEST(MakeDataset, PureFunctionOfConfig) {
  const Dataset a = make_dataset(small_config());
  const Dataset b = make_dataset(small_config());
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    EXPECT_EQ(a.samples[i].labels, b.samples[i].labels);
  }
  SynthConfig other = small_config();
  other.seed = 4;
  EXPECT_NE(make_dataset(other).samples[0].image, a.samples[0].image);
}

TEST(MakeDataset, RejectsBadConfig) {
  SynthConfig c = small_config();
  c.label_fraction = 1.5;
  EXPECT_THROW(make_dataset(c), ValidationError);
  c = small_config();
  c.image_size = 16;
  EXPECT_THROW(make_dataset(c), ValidationError);
}

TEST(DatasetContainer, RoundTripsBitExactly) {
  const fs::path dir = fs::temp_directory_path() / "mtuda_test_dataset";
  fs::remove_all(dir);
  Dataset data = make_dataset(small_config());
  data.samples[0].origin = "src-train-0007";
  write_dataset(dir, data);
  const Dataset back = read_dataset(dir);
  ASSERT_EQ(back.samples.size(), data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample &a = data.samples[i], &b = back.samples[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.domain, b.domain);
    EXPECT_EQ(a.split, b.split);
    EXPECT_EQ(a.volume, b.volume);
    EXPECT_EQ(a.origin, b.origin);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.labels, b.labels);
  }
  EXPECT_EQ(back.provenance, data.provenance);
  EXPECT_THROW(read_dataset(dir / "missing"), ConfigError);
  fs::remove_all(dir);
}

Volume ramp_volume(std::size_t nx, std::size_t ny, std::size_t nz) {
  Volume v{nx, ny, nz, std::vector<float>(nx * ny * nz)};
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) v.at(x, y, z) = static_cast<float>(x + 2 * y + 3 * z);
  return v;
}

TEST(Resample, UnitSpacingIsIdentity) {
  const Volume v = ramp_volume(5, 4, 3);
  const Volume r = resample_trilinear(v, {1.0, 1.0, 1.0});
  ASSERT_EQ(r.voxels.size(), v.voxels.size());
  for (std::size_t i = 0; i < v.voxels.size(); ++i) EXPECT_NEAR(r.voxels[i], v.voxels[i], 1e-6);
}

TEST(Resample, NearestPreservesClassSet) {
  Volume lab{6, 6, 6, std::vector<float>(216, 0.0f)};
  for (std::size_t i = 0; i < lab.voxels.size(); ++i) lab.voxels[i] = static_cast<float>(i % 5);
  const Volume r = resample_nearest(lab, {0.7, 1.3, 2.0});
  std::set<float> in(lab.voxels.begin(), lab.voxels.end()), out(r.voxels.begin(), r.voxels.end());
  for (float v : out) EXPECT_TRUE(in.contains(v));
  EXPECT_EQ(r.nz, 11u);  // floor((6 - 1) * 2) + 1 sample centres
}

TEST(PreprocessVolume, SliceCountRangeAndPadding) {
  const Volume v = ramp_volume(40, 7, 30);
  VolumeMeta meta;
  meta.spacing = {1.0, 2.0, 1.0};
  const SliceStack s = preprocess_volume(v, meta, 16);
  EXPECT_EQ(s.images.size(), 13u);  // resampled coronal extent: floor((7 - 1) * 2) + 1
  EXPECT_FALSE(s.padded);
  for (const auto& img : s.images) {
    ASSERT_EQ(img.size(), 256u);
    for (float x : img) {
      EXPECT_GE(x, -1.0f);
      EXPECT_LE(x, 1.0f);
    }
  }
  const SliceStack padded = preprocess_volume(ramp_volume(8, 3, 8), VolumeMeta{}, 16);
  EXPECT_TRUE(padded.padded);
  EXPECT_EQ(padded.images.size(), 3u);
  EXPECT_EQ(padded.images[0].size(), 256u);
}

TEST(PreprocessVolume, LabelsCarriedThrough) {
  const Volume v = ramp_volume(20, 4, 20);
  Volume lab{20, 4, 20, std::vector<float>(1600, 0.0f)};
  for (std::size_t z = 8; z < 12; ++z)
    for (std::size_t x = 8; x < 12; ++x) lab.at(x, 2, z) = 3.0f;
  const SliceStack s = preprocess_volume(v, VolumeMeta{}, 8, &lab);
  ASSERT_EQ(s.labels.size(), 4u);
  EXPECT_EQ(std::count(s.labels[2].begin(), s.labels[2].end(), 3), 16);
  EXPECT_EQ(std::count(s.labels[0].begin(), s.labels[0].end(), 0), 64);
}

TEST(Nifti, RoundTripCompressedAndPlain) {
  NiftiImage img;
  img.volume = ramp_volume(6, 5, 4);
  img.meta.spacing = {0.8, 1.2, 2.5};
  for (const char* name : {"mtuda_test.nii", "mtuda_test.nii.gz"}) {
    const fs::path p = fs::temp_directory_path() / name;
    write_nifti(p, img);
    const NiftiImage back = read_nifti(p);
    EXPECT_EQ(back.volume.nx, 6u);
    EXPECT_EQ(back.volume.ny, 5u);
    EXPECT_EQ(back.volume.nz, 4u);
    EXPECT_EQ(back.volume.voxels, img.volume.voxels);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back.meta.spacing[i], img.meta.spacing[i], 1e-6);
    fs::remove(p);
  }
}

TEST(MmwhsLabels, MapsToClassIndices) {
  const Volume raw{6, 1, 1, {0.0f, 820.0f, 420.0f, 500.0f, 205.0f, 550.0f}};
  const Volume m = map_mmwhs_labels(raw);
  EXPECT_EQ(m.voxels, (std::vector<float>{0, kAA, kLAC, kLVC, kMYO, 0}));
}

}  // namespace
}  // namespace mtuda
