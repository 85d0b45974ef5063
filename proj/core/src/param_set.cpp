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
#include "mtuda/param_set.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mtuda/error.hpp"

namespace mtuda {

namespace fs = std::filesystem;

void ParamSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

std::optional<std::size_t> ParamSet::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Tensor* ParamSet::find(std::string_view name) const {
  auto i = index_of(name);
  return i ? &entries_[*i].value : nullptr;
}

const Tensor& ParamSet::at(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw ConfigError("missing parameter '" + std::string(name) + "'");
}

std::size_t ParamSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name || entries_[i].value.shape() != other.entries_[i].value.shape()) {
      return false;
    }
  }
  return true;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape()));
  return out;
}

void require_same_layout(const ParamSet& a, const ParamSet& b, std::string_view context) {
  if (!a.same_layout(b)) {
    throw ValidationError(std::string(context) + ": parameter sets differ in names or shapes");
  }
}

namespace {

void put_f32_le(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                         static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
  out.append(bytes, 4);
}

float get_f32_le(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  const std::uint32_t bits = std::uint32_t{u[0]} | (std::uint32_t{u[1]} << 8) | (std::uint32_t{u[2]} << 16) |
                             (std::uint32_t{u[3]} << 24);
  return std::bit_cast<float>(bits);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EncodedParams encode_params(const ParamSet& params) {
  EncodedParams enc;
  enc.manifest = nlohmann::json::array();
  enc.blob.reserve(params.total_elements() * 4);
  for (const auto& e : params) {
    enc.manifest.push_back({{"name", e.name},
                            {"shape", e.value.shape()},
                            {"dtype", "float32"},
                            {"offset", enc.blob.size()}});
    for (float v : e.value.values()) put_f32_le(enc.blob, v);
  }
  return enc;
}

ParamSet decode_params(const nlohmann::json& manifest, std::string_view blob) {
  ParamSet out;
  for (const auto& rec : manifest) {
    if (rec.at("dtype").get<std::string>() != "float32") throw ConfigError("unsupported dtype in manifest");
    Shape shape = rec.at("shape").get<Shape>();
    const auto offset = rec.at("offset").get<std::size_t>();
    const std::size_t n = shape_numel(shape);
    if (offset + n * 4 > blob.size()) throw ConfigError("manifest entry '" + rec.at("name").get<std::string>() +
                                                        "' points past the end of the blob");
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = get_f32_le(blob.data() + offset + 4 * i);
    out.add(rec.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

const ParamSet& Checkpoint::group(const std::string& name) const {
  auto it = groups.find(name);
  if (it == groups.end()) throw ConfigError("checkpoint has no group '" + name + "'");
  return it->second;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  fs::create_directories(dir);
  ParamSet flat;
  for (const auto& [group, params] : ckpt.groups) {
    for (const auto& e : params) flat.add(group + "/" + e.name, e.value);
  }
  EncodedParams enc = encode_params(flat);
  nlohmann::json manifest = {{"format", "mtuda-checkpoint"}, {"version", 1}, {"blob", "tensors.bin"},
                             {"tensors", enc.manifest}, {"meta", ckpt.meta}};
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [group, params] : ckpt.groups) groups.push_back(group);
  manifest["groups"] = groups;
  {
    std::ofstream blob(dir / "tensors.bin", std::ios::binary | std::ios::trunc);
    blob.write(enc.blob.data(), static_cast<std::streamsize>(enc.blob.size()));
    if (!blob) throw RuntimeFailure("failed writing " + (dir / "tensors.bin").string());
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw RuntimeFailure("failed writing " + (dir / "manifest.json").string());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw ConfigError("no checkpoint at " + dir.string());
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("format", "") != "mtuda-checkpoint") throw ConfigError(dir.string() + " is not a checkpoint");
  const std::string blob = read_file(dir / manifest.value("blob", std::string("tensors.bin")));
  const ParamSet flat = decode_params(manifest.at("tensors"), blob);

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& g : manifest.value("groups", nlohmann::json::array())) ckpt.groups[g.get<std::string>()];
  for (const auto& e : flat) {
    const auto slash = e.name.find('/');
    if (slash == std::string::npos) throw ConfigError("ungrouped tensor '" + e.name + "' in checkpoint");
    ckpt.groups[e.name.substr(0, slash)].add(e.name.substr(slash + 1), e.value);
  }
  return ckpt;
}

}  // namespace mtuda
