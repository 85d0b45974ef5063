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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtuda/tensor.hpp"

namespace mtuda {

// Ordered, named collection of parameter arrays for one network.
//
// Entry order is the construction order and is part of the value: two sets compare
// equal only if names, order, shapes and every float bit agree.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  ParamSet() = default;

  void add(std::string name, Tensor value);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  Tensor& value(std::size_t i) { return entries_[i].value; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::optional<std::size_t> index_of(std::string_view name) const;
  const Tensor* find(std::string_view name) const;
  const Tensor& at(std::string_view name) const;

  std::size_t total_elements() const;
  bool same_layout(const ParamSet& other) const;
  ParamSet zeros_like() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Throws ValidationError naming `context` when the two sets differ in names or shapes.
void require_same_layout(const ParamSet& a, const ParamSet& b, std::string_view context);

// Manifest (name -> shape, dtype, byte offset) plus one little-endian float32 blob.
struct EncodedParams {
  nlohmann::json manifest;
  std::string blob;
};

EncodedParams encode_params(const ParamSet& params);
ParamSet decode_params(const nlohmann::json& manifest, std::string_view blob);

// Several named ParamSets and free-form metadata, stored on disk as a directory holding
// `manifest.json` and `tensors.bin`. Tensor names are written as "<group>/<name>".
struct Checkpoint {
  std::map<std::string, ParamSet> groups;
  nlohmann::json meta = nlohmann::json::object();

  const ParamSet& group(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mtuda
