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
#include "mtuda/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <zlib.h>

#include "mtuda/error.hpp"
#include "mtuda/parallel.hpp"
#include "mtuda/rng.hpp"
#include "mtuda/sampling.hpp"

namespace mtuda {

namespace fs = std::filesystem;

const char* class_name(std::size_t label) {
  static constexpr const char* kNames[] = {"background", "AA", "LAC", "LVC", "MYO"};
  return label < kNumCardiacClasses ? kNames[label] : "unknown";
}

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  throw ValidationError("unknown split '" + name + "'");
}

void validate(const SynthConfig& cfg) {
  if (cfg.image_size < 32) throw ValidationError("synth.image_size must be >= 32");
  if (cfg.num_classes != kNumCardiacClasses) throw ValidationError("synthetic anatomy has exactly 5 classes");
  if (cfg.source_count == 0 || cfg.target_count == 0) throw ValidationError("synth counts must be > 0");
  if (!(cfg.label_fraction >= 0.0 && cfg.label_fraction <= 1.0)) {
    throw ValidationError("synth.label_fraction must lie in [0, 1]");
  }
  for (const Appearance* a : {&cfg.source, &cfg.target}) {
    if (a->noise_std < 0.0 || a->bias_strength < 0.0) throw ValidationError("appearance noise/bias must be >= 0");
    for (double m : a->class_means) {
      if (m < 0.0 || m > 1.0) throw ValidationError("appearance class means must lie in [0, 1]");
    }
  }
}

namespace {

nlohmann::json appearance_json(const Appearance& a) {
  return {{"class_means", a.class_means},
          {"invert_contrast", a.invert_contrast},
          {"noise_std", a.noise_std},
          {"bias_strength", a.bias_strength}};
}

struct Ellipse {
  double cx, cy, a, b, theta;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = (c * dx + s * dy) / a;
    const double v = (-s * dx + c * dy) / b;
    return u * u + v * v <= 1.0;
  }
  double extent() const { return std::max(a, b); }
};

}  // namespace

nlohmann::json to_json(const SynthConfig& cfg) {
  return {{"image_size", cfg.image_size},
          {"num_classes", cfg.num_classes},
          {"source_count", cfg.source_count},
          {"target_count", cfg.target_count},
          {"target_test_count", cfg.target_test_count},
          {"label_fraction", cfg.label_fraction},
          {"source", appearance_json(cfg.source)},
          {"target", appearance_json(cfg.target)},
          {"seed", cfg.seed}};
}

LabelMap synth_anatomy(std::uint64_t seed, std::size_t size) {
  if (size < 32) throw ValidationError("synth_anatomy needs size >= 32");
  std::mt19937_64 rng(seed);
  const double scale = static_cast<double>(size) / 64.0;
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double mid = static_cast<double>(size) / 2.0;

  const double theta = uni(-0.6, 0.6);
  const double ao = uni(10.0, 13.0) * scale, bo = uni(8.5, 11.5) * scale;
  const double wall = uni(2.5, 4.0) * scale;
  const Ellipse outer{mid + uni(-4.0, 4.0) * scale, mid + uni(2.0, 7.0) * scale, ao, bo, theta};
  const Ellipse inner{outer.cx, outer.cy, ao - wall, bo - wall, theta};

  // Vessels sit above the ventricle: AA up-left, LAC up-right, separated from the wall and each other.
  Ellipse aa{}, lac{};
  for (int attempt = 0;; ++attempt) {
    const double ra = uni(3.5, 5.0) * scale;
    const double phi_a = uni(-2.5, -1.8);
    const double da = outer.extent() + ra + uni(1.5, 3.0) * scale;
    aa = {outer.cx + da * std::cos(phi_a), outer.cy + da * std::sin(phi_a), ra, ra, 0.0};
    const double la = uni(5.0, 7.0) * scale, lb = uni(4.0, 5.5) * scale;
    const double phi_l = uni(-1.2, -0.5);
    const double dl = outer.extent() + std::max(la, lb) + uni(1.5, 3.0) * scale;
    lac = {outer.cx + dl * std::cos(phi_l), outer.cy + dl * std::sin(phi_l), la, lb, uni(-0.8, 0.8)};
    const double sep = std::hypot(aa.cx - lac.cx, aa.cy - lac.cy);
    auto inside = [&](const Ellipse& e) {
      return e.cx - e.extent() > 1.0 && e.cy - e.extent() > 1.0 && e.cx + e.extent() < size - 1.0 &&
             e.cy + e.extent() < size - 1.0;
    };
    if ((sep > aa.extent() + lac.extent() + 1.5 && inside(aa) && inside(lac)) || attempt > 64) break;
  }

  LabelMap out(1, size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
      std::uint8_t c = kBackground;
      if (outer.contains(px, py)) {
        c = inner.contains(px, py) ? kLVC : kMYO;
      } else if (aa.contains(px, py)) {
        c = kAA;
      } else if (lac.contains(px, py)) {
        c = kLAC;
      }
      out.at(0, y, x) = c;
    }
  }
  return out;
}

ImageBatch render_modality(const LabelMap& labels, Domain domain, const Appearance& look, std::uint64_t seed) {
  if (labels.batch != 1) throw ValidationError("render_modality renders one label map at a time");
  const std::size_t h = labels.height, w = labels.width;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::array<double, 4> a{};
  for (double& v : a) v = coef(rng);
  const double norm = std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]) + std::abs(a[3]);
  std::normal_distribution<double> noise(0.0, look.noise_std);

  ImageBatch out{Tensor({1, 1, h, w}), domain};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint8_t c = labels.at(0, y, x);
      if (c >= look.class_means.size()) throw ValidationError("render_modality: label out of range");
      double v = look.invert_contrast ? 1.0 - look.class_means[c] : look.class_means[c];
      if (look.bias_strength > 0.0 && norm > 0.0) {
        const double u = 2.0 * (static_cast<double>(x) + 0.5) / static_cast<double>(w) - 1.0;
        const double t = 2.0 * (static_cast<double>(y) + 0.5) / static_cast<double>(h) - 1.0;
        v += look.bias_strength * (a[0] * u + a[1] * t + a[2] * u * t + a[3] * (u * u - 0.5)) / norm;
      }
      if (look.noise_std > 0.0) v += noise(rng);
      out.pixels.at(0, 0, y, x) = static_cast<float>(std::clamp(2.0 * v - 1.0, -1.0, 1.0));
    }
  }
  return out;
}

Dataset make_dataset(const SynthConfig& cfg) {
  validate(cfg);
  Dataset data;
  data.num_classes = cfg.num_classes;
  data.provenance = {{"generator", "synthetic"}, {"config", to_json(cfg)}};

  const auto labeled_count =
      static_cast<std::size_t>(std::llround(cfg.label_fraction * static_cast<double>(cfg.source_count)));
  const std::vector<std::size_t> order = shuffled_indices(cfg.source_count, derive_seed(cfg.seed, 7));
  std::vector<bool> is_labeled(cfg.source_count, false);
  for (std::size_t i = 0; i < labeled_count; ++i) is_labeled[order[i]] = true;

  struct Job {
    Domain domain;
    Split split;
    std::size_t index;
    std::uint64_t stream;
    bool keep_labels;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cfg.source_count; ++i) jobs.push_back({Domain::source, Split::train, i, 1, is_labeled[i]});
  for (std::size_t i = 0; i < cfg.target_count; ++i) jobs.push_back({Domain::target, Split::train, i, 3, false});
  for (std::size_t i = 0; i < cfg.target_test_count; ++i) jobs.push_back({Domain::target, Split::test, i, 5, true});

  data.samples.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    const LabelMap anatomy = synth_anatomy(derive_seed(cfg.seed, job.stream, job.index), cfg.image_size);
    const Appearance& look = job.domain == Domain::source ? cfg.source : cfg.target;
    ImageBatch img = render_modality(anatomy, job.domain, look, derive_seed(cfg.seed, job.stream + 1, job.index));
    char id[32];
    std::snprintf(id, sizeof id, "%s-%s-%04zu", job.domain == Domain::source ? "src" : "tgt", split_name(job.split),
                  job.index);
    Sample& s = data.samples[j];
    s.id = id;
    s.domain = job.domain;
    s.split = job.split;
    s.volume = id;
    s.slice = 0;
    s.image = std::move(img.pixels);
    if (job.keep_labels) s.labels = anatomy;
  });
  return data;
}

DomainSplits partition(const Dataset& data) {
  DomainSplits out;
  for (const auto& s : data.samples) {
    if (s.domain == Domain::source) {
      if (s.split != Split::train) continue;
      (s.labeled() ? out.source_labeled : out.source_unlabeled).push_back(s);
    } else if (s.split == Split::train) {
      Sample t = s;
      t.labels.reset();  // target training labels never reach the training streams
      out.target_train.push_back(std::move(t));
    } else {
      out.target_test.push_back(s);
    }
  }
  return out;
}

ImageBatch stack_images(std::span<const Sample* const> samples, Domain domain) {
  if (samples.empty()) throw ValidationError("stack_images of nothing");
  std::vector<Tensor> parts;
  parts.reserve(samples.size());
  for (const Sample* s : samples) parts.push_back(s->image);
  return {concat_batch(parts), domain};
}

LabelMap stack_labels(std::span<const Sample* const> samples) {
  std::vector<LabelMap> parts;
  parts.reserve(samples.size());
  for (const Sample* s : samples) {
    if (!s->labels) throw ValidationError("sample '" + s->id + "' has no labels");
    parts.push_back(*s->labels);
  }
  return concat_labels(parts);
}

// ---- Dataset container ------------------------------------------------------

namespace {

constexpr char kRecordMagic[4] = {'M', 'T', 'D', 'S'};
constexpr std::uint32_t kRecordVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir / "samples");
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : data.samples) {
    const std::string file = "samples/" + s.id + ".bin";
    std::string rec(kRecordMagic, 4);
    put_u32(rec, kRecordVersion);
    put_u32(rec, static_cast<std::uint32_t>(s.height()));
    put_u32(rec, static_cast<std::uint32_t>(s.width()));
    put_u32(rec, s.labeled() ? 1u : 0u);
    for (float v : s.image.values()) put_u32(rec, std::bit_cast<std::uint32_t>(v));
    if (s.labeled()) rec.append(reinterpret_cast<const char*>(s.labels->labels.data()), s.labels->labels.size());
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    if (!out) throw RuntimeFailure("failed writing " + (dir / file).string());
    samples.push_back({{"id", s.id},
                       {"domain", domain_name(s.domain)},
                       {"labeled", s.labeled()},
                       {"split", split_name(s.split)},
                       {"volume", s.volume},
                       {"slice", s.slice},
                       {"origin", s.origin},
                       {"file", file}});
  }
  const nlohmann::json manifest = {{"format", "mtuda-dataset"},
                                   {"version", 1},
                                   {"num_classes", data.num_classes},
                                   {"provenance", data.provenance},
                                   {"samples", samples}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw RuntimeFailure("failed writing dataset manifest in " + dir.string());
}

Dataset read_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw ConfigError("no dataset manifest in " + dir.string());
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  if (manifest.value("format", "") != "mtuda-dataset") throw ConfigError(dir.string() + " is not a dataset container");
  Dataset data;
  data.num_classes = manifest.at("num_classes").get<std::size_t>();
  data.provenance = manifest.value("provenance", nlohmann::json::object());
  for (const auto& m : manifest.at("samples")) {
    Sample s;
    s.id = m.at("id").get<std::string>();
    s.domain = parse_domain(m.at("domain").get<std::string>());
    s.split = parse_split(m.at("split").get<std::string>());
    s.volume = m.value("volume", s.id);
    s.slice = m.value("slice", std::size_t{0});
    s.origin = m.value("origin", std::string{});
    const std::string rec = slurp(dir / m.at("file").get<std::string>());
    if (rec.size() < 20 || std::memcmp(rec.data(), kRecordMagic, 4) != 0 || get_u32(rec, 4) != kRecordVersion) {
      throw ConfigError("bad sample record for '" + s.id + "'");
    }
    const std::size_t h = get_u32(rec, 8), w = get_u32(rec, 12);
    const bool has_labels = get_u32(rec, 16) != 0;
    if (has_labels != m.at("labeled").get<bool>()) throw ConfigError("labeled flag mismatch for '" + s.id + "'");
    if (rec.size() != 20 + 4 * h * w + (has_labels ? h * w : 0)) {
      throw ConfigError("truncated sample record for '" + s.id + "'");
    }
    std::vector<float> px(h * w);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::bit_cast<float>(get_u32(rec, 20 + 4 * i));
    s.image = Tensor({1, 1, h, w}, std::move(px));
    if (has_labels) {
      LabelMap l(1, h, w);
      std::memcpy(l.labels.data(), rec.data() + 20 + 4 * h * w, h * w);
      for (auto v : l.labels) {
        if (v >= data.num_classes) throw ConfigError("label out of range in '" + s.id + "'");
      }
      s.labels = std::move(l);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

// ---- Volumes ------------------------------------------------------------------

namespace {

std::size_t resampled_extent(std::size_t n, double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("voxel spacing must be > 0");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * spacing + 1e-9)) + 1;
}

template <class Sampler>
Volume resample(const Volume& v, const std::array<double, 3>& spacing, Sampler sample) {
  if (v.nx == 0 || v.ny == 0 || v.nz == 0) throw ValidationError("cannot resample an empty volume");
  Volume out;
  out.nx = resampled_extent(v.nx, spacing[0]);
  out.ny = resampled_extent(v.ny, spacing[1]);
  out.nz = resampled_extent(v.nz, spacing[2]);
  out.voxels.resize(out.nx * out.ny * out.nz);
  for (std::size_t z = 0; z < out.nz; ++z) {
    for (std::size_t y = 0; y < out.ny; ++y) {
      for (std::size_t x = 0; x < out.nx; ++x) {
        out.at(x, y, z) = sample(static_cast<double>(x) / spacing[0], static_cast<double>(y) / spacing[1],
                                 static_cast<double>(z) / spacing[2]);
      }
    }
  }
  return out;
}

struct Axis {
  std::size_t i0, i1;
  double f;
};

Axis axis_weights(double pos, std::size_t n) {
  const double p = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(p));
  const std::size_t i1 = std::min(i0 + 1, n - 1);
  return {i0, i1, p - static_cast<double>(i0)};
}

float percentile(std::vector<float> values, double q) {
  if (values.empty()) return 0.0f;
  const auto k = static_cast<std::size_t>(std::llround(q * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

// Window start so a length-`roi` window is centred on `c` and stays inside [0, n) when it fits.
std::ptrdiff_t window_start(double c, std::size_t roi, std::size_t n) {
  auto start = static_cast<std::ptrdiff_t>(std::llround(c - static_cast<double>(roi) / 2.0));
  if (n >= roi) start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(n - roi));
  else start = -static_cast<std::ptrdiff_t>((roi - n) / 2);
  return start;
}

}  // namespace

Volume resample_trilinear(const Volume& v, const std::array<double, 3>& spacing) {
  return resample(v, spacing, [&](double px, double py, double pz) {
    const Axis ax = axis_weights(px, v.nx), ay = axis_weights(py, v.ny), az = axis_weights(pz, v.nz);
    auto lerp = [](double a, double b, double f) { return f == 0.0 ? a : a + (b - a) * f; };
    auto row = [&](std::size_t y, std::size_t z) { return lerp(v.at(ax.i0, y, z), v.at(ax.i1, y, z), ax.f); };
    auto plane = [&](std::size_t z) { return lerp(row(ay.i0, z), row(ay.i1, z), ay.f); };
    return static_cast<float>(lerp(plane(az.i0), plane(az.i1), az.f));
  });
}

Volume resample_nearest(const Volume& v, const std::array<double, 3>& spacing) {
  return resample(v, spacing, [&](double px, double py, double pz) {
    auto idx = [](double p, std::size_t n) {
      return static_cast<std::size_t>(std::clamp<long long>(std::llround(p), 0, static_cast<long long>(n) - 1));
    };
    return v.at(idx(px, v.nx), idx(py, v.ny), idx(pz, v.nz));
  });
}

SliceStack preprocess_volume(const Volume& volume, const VolumeMeta& meta, std::size_t roi_size, const Volume* labels) {
  if (roi_size == 0) throw ValidationError("roi size must be > 0");
  if (volume.voxels.size() != volume.nx * volume.ny * volume.nz) throw ValidationError("volume size mismatch");
  if (labels && (labels->nx != volume.nx || labels->ny != volume.ny || labels->nz != volume.nz)) {
    throw ValidationError("label volume shape differs from image volume");
  }
  const Volume img = resample_trilinear(volume, meta.spacing);
  std::optional<Volume> lab;
  if (labels) lab = resample_nearest(*labels, meta.spacing);

  double cx = 0.0, cz = 0.0, count = 0.0;
  const float median = percentile(img.voxels, 0.5);
  for (std::size_t z = 0; z < img.nz; ++z) {
    for (std::size_t y = 0; y < img.ny; ++y) {
      for (std::size_t x = 0; x < img.nx; ++x) {
        const bool fg = lab ? lab->at(x, y, z) > 0.5f : img.at(x, y, z) > median;
        if (!fg) continue;
        cx += static_cast<double>(x);
        cz += static_cast<double>(z);
        count += 1.0;
      }
    }
  }
  if (count > 0.0) {
    cx /= count;
    cz /= count;
  } else {
    cx = static_cast<double>(img.nx - 1) / 2.0;
    cz = static_cast<double>(img.nz - 1) / 2.0;
  }

  const float lo = percentile(img.voxels, 0.01);
  const float hi = percentile(img.voxels, 0.99);
  auto normalize = [&](float v) {
    if (hi <= lo) return 0.0f;
    return std::clamp(2.0f * (v - lo) / (hi - lo) - 1.0f, -1.0f, 1.0f);
  };

  SliceStack out;
  out.height = roi_size;
  out.width = roi_size;
  out.padded = img.nx < roi_size || img.nz < roi_size;
  if (out.padded) {
    std::cerr << "warning: volume (" << img.nx << "x" << img.nz << " in-plane after resampling) is smaller than the "
              << roi_size << " ROI; padding with background\n";
  }
  const std::ptrdiff_t x0 = window_start(cx, roi_size, img.nx);
  const std::ptrdiff_t z0 = window_start(cz, roi_size, img.nz);
  for (std::size_t y = 0; y < img.ny; ++y) {
    std::vector<float> slice(roi_size * roi_size, -1.0f);
    std::vector<std::uint8_t> lslice(lab ? roi_size * roi_size : 0, 0);
    for (std::size_t r = 0; r < roi_size; ++r) {
      // Row 0 is the most superior z inside the window.
      const std::ptrdiff_t z = z0 + static_cast<std::ptrdiff_t>(roi_size - 1 - r);
      if (z < 0 || z >= static_cast<std::ptrdiff_t>(img.nz)) continue;
      for (std::size_t c = 0; c < roi_size; ++c) {
        const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(c);
        if (x < 0 || x >= static_cast<std::ptrdiff_t>(img.nx)) continue;
        const auto ux = static_cast<std::size_t>(x), uz = static_cast<std::size_t>(z);
        slice[r * roi_size + c] = normalize(img.at(ux, y, uz));
        if (lab) lslice[r * roi_size + c] = static_cast<std::uint8_t>(std::lround(lab->at(ux, y, uz)));
      }
    }
    out.images.push_back(std::move(slice));
    if (lab) out.labels.push_back(std::move(lslice));
  }
  return out;
}

Volume map_mmwhs_labels(const Volume& raw) {
  Volume out = raw;
  for (float& v : out.voxels) {
    switch (static_cast<int>(std::lround(v))) {
      case 820: v = kAA; break;
      case 420: v = kLAC; break;
      case 500: v = kLVC; break;
      case 205: v = kMYO; break;
      default: v = kBackground; break;
    }
  }
  return out;
}

// ---- NIfTI-1 ---------------------------------------------------------------------

namespace {

struct GzFile {
  gzFile f = nullptr;
  GzFile(const fs::path& p, const char* mode) : f(gzopen(p.string().c_str(), mode)) {
    if (!f) throw ConfigError("cannot open " + p.string());
  }
  ~GzFile() {
    if (f) gzclose(f);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read(void* dst, std::size_t n, const fs::path& p) {
    auto* out = static_cast<char*>(dst);
    while (n > 0) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(f, out, chunk);
      if (got <= 0) throw ConfigError("truncated NIfTI file " + p.string());
      out += got;
      n -= static_cast<std::size_t>(got);
    }
  }
  void write(const void* src, std::size_t n, const fs::path& p) {
    if (gzwrite(f, src, static_cast<unsigned>(n)) != static_cast<int>(n)) {
      throw RuntimeFailure("failed writing " + p.string());
    }
  }
};

template <class T>
T load(const unsigned char* p, bool swap) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if (swap) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <class T>
void store(unsigned char* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

}  // namespace

NiftiImage read_nifti(const fs::path& path) {
  static_assert(std::endian::native == std::endian::little, "NIfTI writer assumes a little-endian host");
  GzFile file(path, "rb");
  unsigned char hdr[348];
  file.read(hdr, sizeof hdr, path);
  bool swap = false;
  if (load<std::int32_t>(hdr, false) != 348) {
    if (load<std::int32_t>(hdr, true) != 348) throw ConfigError(path.string() + " is not a NIfTI-1 file");
    swap = true;
  }
  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(hdr + 40 + 2 * i, swap);
  const auto datatype = load<std::int16_t>(hdr + 70, swap);
  float pixdim[8];
  for (int i = 0; i < 8; ++i) pixdim[i] = load<float>(hdr + 76 + 4 * i, swap);
  const float vox_offset = load<float>(hdr + 108, swap);
  const float slope = load<float>(hdr + 112, swap);
  const float inter = load<float>(hdr + 116, swap);
  if (dim[0] < 3 || dim[1] <= 0 || dim[2] <= 0 || dim[3] <= 0) throw ConfigError(path.string() + ": not a 3D volume");
  for (int i = 4; i <= std::min<int>(dim[0], 7); ++i) {
    if (dim[i] > 1) throw ConfigError(path.string() + ": only scalar 3D volumes are supported");
  }

  NiftiImage out;
  out.volume.nx = static_cast<std::size_t>(dim[1]);
  out.volume.ny = static_cast<std::size_t>(dim[2]);
  out.volume.nz = static_cast<std::size_t>(dim[3]);
  out.meta.spacing = {std::abs(pixdim[1]) > 0 ? std::abs(pixdim[1]) : 1.0, std::abs(pixdim[2]) > 0 ? std::abs(pixdim[2]) : 1.0,
                      std::abs(pixdim[3]) > 0 ? std::abs(pixdim[3]) : 1.0};
  out.meta.original_shape = {out.volume.nx, out.volume.ny, out.volume.nz};

  std::size_t bytes_per = 0;
  switch (datatype) {
    case 2: case 256: bytes_per = 1; break;
    case 4: case 512: bytes_per = 2; break;
    case 8: case 16: case 768: bytes_per = 4; break;
    case 64: bytes_per = 8; break;
    default: throw ConfigError(path.string() + ": unsupported NIfTI datatype " + std::to_string(datatype));
  }
  const auto skip = static_cast<std::size_t>(std::max(352.0f, vox_offset)) - 348;
  std::vector<unsigned char> pad(skip);
  if (skip) file.read(pad.data(), skip, path);
  const std::size_t n = out.volume.nx * out.volume.ny * out.volume.nz;
  std::vector<unsigned char> raw(n * bytes_per);
  file.read(raw.data(), raw.size(), path);
  out.volume.voxels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = raw.data() + i * bytes_per;
    double v = 0.0;
    switch (datatype) {
      case 2: v = *p; break;
      case 256: v = static_cast<std::int8_t>(*p); break;
      case 4: v = load<std::int16_t>(p, swap); break;
      case 512: v = load<std::uint16_t>(p, swap); break;
      case 8: v = load<std::int32_t>(p, swap); break;
      case 768: v = load<std::uint32_t>(p, swap); break;
      case 16: v = load<float>(p, swap); break;
      case 64: v = load<double>(p, swap); break;
    }
    if (slope != 0.0f && std::isfinite(slope)) v = v * slope + inter;
    out.volume.voxels[i] = static_cast<float>(v);
  }
  return out;
}

void write_nifti(const fs::path& path, const NiftiImage& image) {
  const bool gz = path.extension() == ".gz";
  GzFile file(path, gz ? "wb6" : "wbT");
  unsigned char hdr[352] = {};
  store<std::int32_t>(hdr, 348);
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(image.volume.nx), static_cast<std::int16_t>(image.volume.ny),
                               static_cast<std::int16_t>(image.volume.nz), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) store<std::int16_t>(hdr + 40 + 2 * i, dim[i]);
  store<std::int16_t>(hdr + 70, 16);
  store<std::int16_t>(hdr + 72, 32);
  const float pixdim[8] = {1.0f, static_cast<float>(image.meta.spacing[0]), static_cast<float>(image.meta.spacing[1]),
                           static_cast<float>(image.meta.spacing[2]), 1.0f, 1.0f, 1.0f, 1.0f};
  for (int i = 0; i < 8; ++i) store<float>(hdr + 76 + 4 * i, pixdim[i]);
  store<float>(hdr + 108, 352.0f);
  store<float>(hdr + 112, 1.0f);
  std::memcpy(hdr + 344, "n+1", 4);
  file.write(hdr, sizeof hdr, path);
  file.write(image.volume.voxels.data(), image.volume.voxels.size() * sizeof(float), path);
}

}  // namespace mtuda
