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
#include "mtuda/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "mtuda/error.hpp"
#include "mtuda/rng.hpp"

namespace mtuda {

using nlohmann::json;

InferenceMode parse_inference_mode(const std::string& name) {
  if (name == "translated") return InferenceMode::translated;
  if (name == "direct") return InferenceMode::direct;
  throw ConfigError("unknown inference mode '" + name + "' (expected translated or direct)");
}

const char* inference_mode_name(InferenceMode m) { return m == InferenceMode::translated ? "translated" : "direct"; }

namespace {

// Reads keys out of one JSON object and rejects whatever was not asked for.
class Reader {
 public:
  Reader(const json& j, std::string context) : j_(j), ctx_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string where = path(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(where + ": expected true or false");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(where + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(where + ": expected a string");
    }
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  template <class T>
  void get_optional(const char* key, std::optional<T>& out) {
    if (!j_.contains(key)) {
      used_.insert(key);
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  const json* sub(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return ctx_.empty() ? key : ctx_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("unknown config key '" + path(k) + "'");
    }
  }

 private:
  std::string label() const { return ctx_.empty() ? "config" : ctx_; }

  const json& j_;
  std::string ctx_;
  std::set<std::string, std::less<>> used_;
};

template <class F>
void section(Reader& parent, const char* key, F&& read) {
  if (const json* j = parent.sub(key)) {
    Reader r(*j, parent.path(key));
    read(r);
    r.finish();
  }
}

void read_appearance(Reader& r, Appearance& a) {
  std::vector<double> means(a.class_means.begin(), a.class_means.end());
  r.get("class_means", means);
  if (means.size() != a.class_means.size()) {
    throw ConfigError(r.path("class_means") + ": expected " + std::to_string(a.class_means.size()) + " values");
  }
  std::copy(means.begin(), means.end(), a.class_means.begin());
  r.get("invert_contrast", a.invert_contrast);
  r.get("noise_std", a.noise_std);
  r.get("bias_strength", a.bias_strength);
}

void read_synth(Reader& r, SynthConfig& c) {
  r.get("image_size", c.image_size);
  r.get("num_classes", c.num_classes);
  r.get("source_count", c.source_count);
  r.get("target_count", c.target_count);
  r.get("target_test_count", c.target_test_count);
  r.get("label_fraction", c.label_fraction);
  section(r, "source", [&](Reader& s) { read_appearance(s, c.source); });
  section(r, "target", [&](Reader& s) { read_appearance(s, c.target); });
}

void read_gen(Reader& r, GenSpec& g) {
  r.get("channels", g.channels);
  r.get("width", g.width);
  r.get("residual_blocks", g.residual_blocks);
}

void read_dcam(Reader& r, DcamConfig& c) {
  section(r, "generator", [&](Reader& s) { read_gen(s, c.generator); });
  section(r, "discriminator", [&](Reader& s) {
    s.get("width", c.discriminator.width);
    s.get("downsamplings", c.discriminator.downsamplings);
    s.get("in_channels", c.discriminator.in_channels);
  });
  std::string mode = discrimination_mode_name(c.mode);
  r.get("mode", mode);
  c.mode = parse_discrimination_mode(mode);
  r.get("lambda_cyc", c.lambda_cyc);
  r.get("lr", c.lr);
  r.get("beta1", c.beta1);
  r.get("beta2", c.beta2);
  r.get("batch_size", c.batch_size);
  r.get("steps", c.steps);
  r.get("pool_size", c.pool_size);
  c.discriminator = discriminator_spec(c);
}

void read_ramp(Reader& r, RampConfig& c) {
  r.get("peak", c.peak);
  r.get("t_max", c.t_max);
}

void read_lr(Reader& r, LrSchedule& c) {
  r.get("base", c.base_lr);
  r.get("warmup", c.warmup_steps);
  r.get("total", c.total_steps);
}

// Schedule keys shared by the train section and the top level of a run config.
void read_schedules(Reader& r, TrainConfig& c) {
  section(r, "rampup", [&](Reader& s) {
    RampConfig both = c.ramp_kd;
    read_ramp(s, both);
    c.ramp_kd = both;
    c.ramp_con = both;
  });
  section(r, "rampup_kd", [&](Reader& s) { read_ramp(s, c.ramp_kd); });
  section(r, "rampup_con", [&](Reader& s) { read_ramp(s, c.ramp_con); });
  section(r, "lr", [&](Reader& s) { read_lr(s, c.lr); });
}

void read_train(Reader& r, TrainConfig& c) {
  section(r, "network", [&](Reader& s) {
    s.get("in_channels", c.network.in_channels);
    s.get("num_classes", c.network.num_classes);
    s.get("base_width", c.network.base_width);
    s.get("depth", c.network.depth);
  });
  section(r, "batch", [&](Reader& s) {
    s.get("labeled", c.batch.labeled);
    s.get("semantic", c.batch.semantic);
    s.get("structural", c.batch.structural);
  });
  r.get("total_steps", c.total_steps);
  section(r, "alpha", [&](Reader& s) {
    s.get("semantic", c.alpha_semantic);
    s.get("structural", c.alpha_structural);
  });
  read_schedules(r, c);
  section(r, "optimizer", [&](Reader& s) {
    std::string kind = optimizer_name(c.optimizer.kind);
    s.get("kind", kind);
    c.optimizer.kind = parse_optimizer(kind);
    s.get("beta1", c.optimizer.beta1);
    s.get("beta2", c.optimizer.beta2);
    s.get("eps", c.optimizer.eps);
  });
  section(r, "noise", [&](Reader& s) {
    s.get("input_noise_std", c.noise.input_noise_std);
    s.get("dropout_rate", c.noise.dropout_rate);
  });
  std::string ablation = ablation_name(c.ablation);
  r.get("ablation", ablation);
  c.ablation = parse_ablation(ablation);
  r.get("structural_target_direction", c.structural_target_direction);
  r.get("checkpoint_every", c.checkpoint_every);
  r.get("keep_checkpoints", c.keep_checkpoints);
}

json ramp_json(const RampConfig& r) { return {{"peak", r.peak}, {"t_max", r.t_max}}; }
json lr_json(const LrSchedule& l) { return {{"base", l.base_lr}, {"warmup", l.warmup_steps}, {"total", l.total_steps}}; }

json synth_json(const SynthConfig& c) {
  json j = to_json(c);
  j.erase("seed");
  return j;
}

json dcam_json(const DcamConfig& c) {
  return {{"generator", to_json(c.generator)},
          {"discriminator",
           {{"in_channels", c.discriminator.in_channels},
            {"width", c.discriminator.width},
            {"downsamplings", c.discriminator.downsamplings}}},
          {"mode", discrimination_mode_name(c.mode)},
          {"lambda_cyc", c.lambda_cyc},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"pool_size", c.pool_size}};
}

json train_json(const TrainConfig& c) {
  return {{"network",
           {{"in_channels", c.network.in_channels},
            {"num_classes", c.network.num_classes},
            {"base_width", c.network.base_width},
            {"depth", c.network.depth}}},
          {"batch", {{"labeled", c.batch.labeled}, {"semantic", c.batch.semantic}, {"structural", c.batch.structural}}},
          {"total_steps", c.total_steps},
          {"alpha", {{"semantic", c.alpha_semantic}, {"structural", c.alpha_structural}}},
          {"rampup_kd", ramp_json(c.ramp_kd)},
          {"rampup_con", ramp_json(c.ramp_con)},
          {"lr", lr_json(c.lr)},
          {"optimizer",
           {{"kind", optimizer_name(c.optimizer.kind)},
            {"beta1", c.optimizer.beta1},
            {"beta2", c.optimizer.beta2},
            {"eps", c.optimizer.eps}}},
          {"noise", {{"input_noise_std", c.noise.input_noise_std}, {"dropout_rate", c.noise.dropout_rate}}},
          {"ablation", ablation_name(c.ablation)},
          {"structural_target_direction", c.structural_target_direction},
          {"checkpoint_every", c.checkpoint_every},
          {"keep_checkpoints", c.keep_checkpoints}};
}

template <class F>
auto parse_section(const json& j, const std::string& ctx, F&& read) {
  Reader r(j, ctx);
  auto out = read(r);
  r.finish();
  return out;
}

enum SeedStream : std::uint64_t { kDataSeed = 1000, kDcamSeed = 2000, kTrainSeed = 3000 };

}  // namespace

nlohmann::json to_json(const GenSpec& s) {
  return {{"channels", s.channels}, {"width", s.width}, {"residual_blocks", s.residual_blocks}};
}

nlohmann::json to_json(const DcamConfig& cfg) {
  json j = dcam_json(cfg);
  j["seed"] = cfg.seed;
  return j;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  json j = train_json(cfg);
  j["seed"] = cfg.seed;
  return j;
}

nlohmann::json to_json(const EvalConfig& cfg) {
  return {{"asd_cap", cfg.asd_cap}, {"inference", inference_mode_name(cfg.inference)}};
}

GenSpec gen_spec_from_json(const nlohmann::json& j) {
  return parse_section(j, "generator", [](Reader& r) {
    GenSpec g;
    read_gen(r, g);
    return g;
  });
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  return parse_section(j, "data", [](Reader& r) {
    SynthConfig c;
    read_synth(r, c);
    r.get("seed", c.seed);
    return c;
  });
}

DcamConfig dcam_config_from_json(const nlohmann::json& j) {
  return parse_section(j, "dcam", [](Reader& r) {
    DcamConfig c;
    read_dcam(r, c);
    r.get("seed", c.seed);
    return c;
  });
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  return parse_section(j, "train", [](Reader& r) {
    TrainConfig c;
    read_train(r, c);
    r.get("seed", c.seed);
    return c;
  });
}

SynthConfig RunConfig::resolved_data() const {
  SynthConfig c = data;
  c.seed = data_seed.value_or(derive_seed(seed, kDataSeed));
  return c;
}

DcamConfig RunConfig::resolved_dcam() const {
  DcamConfig c = dcam;
  c.seed = dcam_seed.value_or(derive_seed(seed, kDcamSeed));
  return c;
}

TrainConfig RunConfig::resolved_train() const {
  TrainConfig c = train;
  c.seed = train_seed.value_or(derive_seed(seed, kTrainSeed));
  return c;
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  Reader r(doc, "");
  r.get("seed", cfg.seed);
  section(r, "data", [&](Reader& s) {
    read_synth(s, cfg.data);
    s.get_optional("seed", cfg.data_seed);
  });
  section(r, "dcam", [&](Reader& s) {
    read_dcam(s, cfg.dcam);
    s.get_optional("seed", cfg.dcam_seed);
  });
  section(r, "train", [&](Reader& s) {
    read_train(s, cfg.train);
    s.get_optional("seed", cfg.train_seed);
  });
  read_schedules(r, cfg.train);
  section(r, "eval", [&](Reader& s) {
    s.get("asd_cap", cfg.eval.asd_cap);
    std::string mode = inference_mode_name(cfg.eval.inference);
    s.get("inference", mode);
    cfg.eval.inference = parse_inference_mode(mode);
  });
  r.finish();
  validate(cfg.resolved_data());
  validate(cfg.resolved_dcam());
  validate(cfg.resolved_train());
  if (!(cfg.eval.asd_cap > 0.0)) throw ConfigError("eval.asd_cap must be > 0");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc);
}

nlohmann::json to_json(const RunConfig& cfg) {
  json data = synth_json(cfg.data);
  data["seed"] = cfg.resolved_data().seed;
  json dcam = dcam_json(cfg.dcam);
  dcam["seed"] = cfg.resolved_dcam().seed;
  json train = train_json(cfg.train);
  train["seed"] = cfg.resolved_train().seed;
  return {{"seed", cfg.seed}, {"data", data}, {"dcam", dcam}, {"train", train}, {"eval", to_json(cfg.eval)}};
}

}  // namespace mtuda
