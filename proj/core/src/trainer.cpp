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
#include "mtuda/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mtuda/autograd.hpp"
#include "mtuda/config.hpp"
#include "mtuda/error.hpp"
#include "mtuda/losses.hpp"
#include "mtuda/parallel.hpp"
#include "mtuda/rng.hpp"
#include "mtuda/sampling.hpp"

namespace mtuda {

Ablation parse_ablation(const std::string& name) {
  if (name == "full") return Ablation::full;
  if (name == "ns" || name == "NS") return Ablation::ns;
  if (name == "nt" || name == "NT") return Ablation::nt;
  if (name == "ns-mse" || name == "ns_mse" || name == "NS_MSE") return Ablation::ns_mse;
  if (name == "supervised") return Ablation::supervised;
  throw ConfigError("unknown ablation '" + name + "' (expected full, ns, nt, ns-mse or supervised)");
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::ns: return "ns";
    case Ablation::nt: return "nt";
    case Ablation::ns_mse: return "ns-mse";
    case Ablation::supervised: return "supervised";
  }
  return "full";
}

bool uses_semantic_teacher(Ablation a) { return a == Ablation::full || a == Ablation::nt; }
bool uses_structural_teacher(Ablation a) { return a == Ablation::full || a == Ablation::ns || a == Ablation::ns_mse; }

void validate(const TrainConfig& cfg) {
  if (cfg.network.num_classes < 2 || cfg.network.base_width == 0 || cfg.network.depth == 0) {
    throw ConfigError("train.network: need >= 2 classes, nonzero width and depth");
  }
  if (cfg.batch.labeled == 0 || cfg.batch.semantic == 0 || cfg.batch.structural == 0) {
    throw ConfigError("train.batch sizes must be > 0");
  }
  if (cfg.total_steps <= 0) throw ConfigError("train.total_steps must be > 0");
  for (double a : {cfg.alpha_semantic, cfg.alpha_structural}) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("train.alpha must lie in [0, 1]");
  }
  validate(cfg.ramp_kd);
  validate(cfg.ramp_con);
  validate(cfg.lr);
  validate(cfg.noise);
  if (cfg.checkpoint_every <= 0) throw ConfigError("train.checkpoint_every must be > 0");
  if (cfg.keep_checkpoints == 0) throw ConfigError("train.keep_checkpoints must be > 0");
}

namespace {

Sample unlabeled(Sample s) {
  s.labels.reset();
  return s;
}

}  // namespace

StreamSet build_streams(const TrainConfig& cfg, const DomainSplits& data, const DcamState& dcam) {
  validate(cfg);
  if (data.source_labeled.empty()) throw ValidationError("build_streams: at least one labeled source sample is required");
  if (data.target_train.empty()) throw ValidationError("build_streams: no target training samples");
  for (const Sample& s : data.target_train) {
    if (s.labeled()) throw ValidationError("build_streams: target training sample '" + s.id + "' carries labels");
  }
  std::vector<Sample> source = data.source_labeled;
  source.insert(source.end(), data.source_unlabeled.begin(), data.source_unlabeled.end());

  StreamSet st;
  st.labeled = data.source_labeled;

  const IntermediateDomains mid = synthesize_domains(dcam, source, data.target_train);
  for (const Sample& s : data.source_unlabeled) st.semantic.push_back(unlabeled(s));
  for (const Sample& s : mid.sourcelike) st.semantic.push_back(unlabeled(s));

  // targetlike = { x^{s->t} } (first |source|) u { x^{t->s->t} }; sourcelike = { x^{t->s} } u { x^{s->t->s} }.
  const std::vector<Sample>& s2t = mid.targetlike;
  const std::vector<Sample>& t2s = mid.sourcelike;
  for (std::size_t i = 0; i < source.size(); ++i) st.structural.push_back({unlabeled(source[i]), s2t[i]});
  for (std::size_t i = 0; i < data.target_train.size(); ++i) st.structural.push_back({t2s[i], data.target_train[i]});
  if (cfg.structural_target_direction) {
    for (std::size_t i = 0; i < source.size(); ++i) st.structural.push_back({s2t[i], unlabeled(source[i])});
    for (std::size_t i = 0; i < data.target_train.size(); ++i) st.structural.push_back({data.target_train[i], t2s[i]});
  }
  for (PairedSample& p : st.structural) {
    p.student_view.labels.reset();
    p.teacher_view.labels.reset();
  }
  return st;
}

namespace {

enum Stream : std::uint64_t {
  kLabeledStream = 11,
  kSemanticStream = 12,
  kStructuralStream = 13,
  kNoiseSemanticStudent = 21,
  kNoiseSemanticTeacher = 22,
  kNoiseStructuralStudent = 23,
  kNoiseStructuralTeacher = 24,
  kDropoutStream = 31,
};

template <class Pick>
ImageBatch stack(std::size_t count, Pick pick) {
  std::vector<const Sample*> ptrs;
  ptrs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ptrs.push_back(pick(i));
  return stack_images(ptrs, ptrs.front()->domain);
}

}  // namespace

StepBatches draw_step(const StreamSet& streams, const TrainConfig& cfg, std::int64_t step) {
  if (streams.labeled.empty()) throw ValidationError("draw_step: empty labeled stream");
  const auto t = static_cast<std::uint64_t>(step);
  StepBatches b;
  {
    const auto idx = draw_batch(streams.labeled.size(), cfg.batch.labeled, t, derive_seed(cfg.seed, kLabeledStream));
    std::vector<const Sample*> ptrs;
    for (std::size_t i : idx) ptrs.push_back(&streams.labeled[i]);
    b.labeled = stack_images(ptrs, Domain::source);
    b.labels = stack_labels(ptrs);
  }
  if (uses_semantic_teacher(cfg.ablation)) {
    if (streams.semantic.empty()) throw ValidationError("draw_step: empty semantic stream");
    const auto idx = draw_batch(streams.semantic.size(), cfg.batch.semantic, t, derive_seed(cfg.seed, kSemanticStream));
    b.semantic = stack(idx.size(), [&](std::size_t i) { return &streams.semantic[idx[i]]; });
  }
  if (uses_structural_teacher(cfg.ablation)) {
    if (streams.structural.empty()) throw ValidationError("draw_step: empty structural stream");
    const auto idx =
        draw_batch(streams.structural.size(), cfg.batch.structural, t, derive_seed(cfg.seed, kStructuralStream));
    b.structural.student_view = stack(idx.size(), [&](std::size_t i) { return &streams.structural[idx[i]].student_view; });
    b.structural.teacher_view = stack(idx.size(), [&](std::size_t i) { return &streams.structural[idx[i]].teacher_view; });
    for (std::size_t i : idx) b.structural.origins.push_back(streams.structural[i].student_view.origin.empty()
                                                                 ? streams.structural[i].student_view.id
                                                                 : streams.structural[i].student_view.origin);
  }
  return b;
}

TrainState train_init(const TrainConfig& cfg) {
  validate(cfg);
  TrainState st;
  st.cfg = cfg;
  st.student = SegNet(cfg.network).init(derive_seed(cfg.seed, 1));
  st.ema = ema_init(st.student, cfg.alpha_semantic, cfg.alpha_structural);
  st.opt = optimizer_init(st.student);
  return st;
}

nlohmann::json to_json(const LossReport& r) {
  return {{"step", r.step}, {"lr", r.lr},   {"lambda_kd", r.lambda_kd}, {"lambda_con", r.lambda_con},
          {"seg", r.seg},   {"kd", r.kd},   {"con", r.con},             {"total", r.total}};
}

namespace {

NoiseConfig noise_for(const TrainConfig& cfg, std::uint64_t stream, std::int64_t step) {
  NoiseConfig n = cfg.noise;
  n.seed = derive_seed(cfg.seed, stream, static_cast<std::uint64_t>(step));
  return n;
}

// Teacher probabilities: no gradient path exists from here to any parameter.
Tensor teacher_probs(const SegNet& net, const ParamSet& teacher, const Tensor& images, double dropout,
                     std::uint64_t dropout_seed) {
  ag::Graph g;
  const BoundParams p = bind_params(g, teacher, false);
  return g.value(g.softmax_channels(net.logits(g, p, g.constant(images), dropout, dropout_seed)));
}

}  // namespace

LossReport mtuda_step(TrainState& state, const StepBatches& batches) {
  const TrainConfig& cfg = state.cfg;
  const SegNet net(cfg.network);
  const std::int64_t t = state.step;
  const bool semantic = uses_semantic_teacher(cfg.ablation);
  const bool structural = uses_structural_teacher(cfg.ablation);
  const double dropout = cfg.noise.dropout_rate;
  auto dropout_seed = [&](std::uint64_t k) { return derive_seed(cfg.seed, kDropoutStream + k, static_cast<std::uint64_t>(t)); };

  LossReport r;
  r.step = t;
  r.lr = learning_rate(t, cfg.lr);
  r.lambda_kd = semantic ? rampup_weight(t, cfg.ramp_kd) : 0.0;
  r.lambda_con = structural ? rampup_weight(t, cfg.ramp_con) : 0.0;

  ag::Graph g;
  const BoundParams p = bind_params(g, state.student, true);
  std::vector<std::pair<ag::Var, double>> terms;

  {
    const ag::Var probs = g.softmax_channels(net.logits(g, p, g.constant(batches.labeled.pixels), dropout, dropout_seed(0)));
    const LabelMap& y = batches.labels;
    const ag::Var seg = g.loss(probs, [&y](const Tensor& in, Tensor& grad) {
      return losses::supervised_loss<float>(in.values(), y.labels, losses::prob_shape(in), grad.values());
    });
    r.seg = g.scalar(seg);
    terms.emplace_back(seg, 1.0);
  }
  if (semantic) {
    const ImageBatch xs = perturb(batches.semantic, noise_for(cfg, kNoiseSemanticStudent, t));
    const ImageBatch xt = perturb(batches.semantic, noise_for(cfg, kNoiseSemanticTeacher, t));
    const Tensor target = teacher_probs(net, state.ema.teacher_semantic, xt.pixels, dropout, dropout_seed(1));
    const ag::Var probs = g.softmax_channels(net.logits(g, p, g.constant(xs.pixels), dropout, dropout_seed(2)));
    const ag::Var kd = g.loss(probs, [&target](const Tensor& in, Tensor& grad) {
      return losses::mse_consistency<float>(in.values(), target.values(), grad.values());
    });
    r.kd = g.scalar(kd);
    terms.emplace_back(kd, r.lambda_kd);
  }
  if (structural) {
    const StructuralPair& pair = batches.structural;
    const ImageBatch xs = perturb(pair.student_view, noise_for(cfg, kNoiseStructuralStudent, t));
    const ImageBatch xt = perturb(pair.teacher_view, noise_for(cfg, kNoiseStructuralTeacher, t));
    const Tensor target = teacher_probs(net, state.ema.teacher_structural, xt.pixels, dropout, dropout_seed(3));
    const ag::Var probs = g.softmax_channels(net.logits(g, p, g.constant(xs.pixels), dropout, dropout_seed(4)));
    const bool plain_mse = cfg.ablation == Ablation::ns_mse;
    const ag::Var con = g.loss(probs, [&target, plain_mse](const Tensor& in, Tensor& grad) {
      if (plain_mse) return losses::mse_consistency<float>(in.values(), target.values(), grad.values());
      return losses::structural_consistency<float>(in.values(), target.values(), losses::prob_shape(in),
                                                   grad.values());
    });
    r.con = g.scalar(con);
    terms.emplace_back(con, r.lambda_con);
  }
  r.total = losses::student_total(r.seg, r.kd, r.con, {r.lambda_kd, r.lambda_con});
  if (!std::isfinite(r.total)) throw RuntimeFailure("step " + std::to_string(t) + ": non-finite total loss");

  const ag::Var total = g.weighted_sum(terms);
  g.backward(total);
  optimizer_step(state.student, collect_gradients(g, p), state.opt, r.lr, cfg.optimizer);
  state.ema = ema_update(std::move(state.ema), state.student);
  ++state.step;
  return r;
}

void save_train_checkpoint(const std::filesystem::path& dir, const TrainState& state, const Translator& translator) {
  Checkpoint ckpt;
  ckpt.groups["student"] = state.student;
  ckpt.groups["teacher_semantic"] = state.ema.teacher_semantic;
  ckpt.groups["teacher_structural"] = state.ema.teacher_structural;
  ckpt.groups["opt.first"] = state.opt.first;
  ckpt.groups["opt.second"] = state.opt.second;
  ckpt.groups["translator"] = translator.params;
  ckpt.meta = {{"kind", "mtuda"},
               {"step", state.step},
               {"ema_step", state.ema.step},
               {"optimizer_step", state.opt.step},
               {"seed", state.cfg.seed},
               {"config", to_json(state.cfg)},
               {"translator", {{"identity", translator.identity()}, {"generator", to_json(translator.spec)}}}};
  save_checkpoint(dir, ckpt);
}

namespace {

Checkpoint load_mtuda_checkpoint(const std::filesystem::path& dir) {
  Checkpoint ckpt = load_checkpoint(dir);
  if (ckpt.meta.value("kind", std::string{}) != "mtuda") throw ConfigError(dir.string() + " is not a training checkpoint");
  return ckpt;
}

}  // namespace

TrainState load_train_state(const std::filesystem::path& dir) {
  const Checkpoint ckpt = load_mtuda_checkpoint(dir);
  TrainState st;
  st.cfg = train_config_from_json(ckpt.meta.at("config"));
  st.student = ckpt.group("student");
  SegNet(st.cfg.network).check(st.student);
  st.ema.teacher_semantic = ckpt.group("teacher_semantic");
  st.ema.teacher_structural = ckpt.group("teacher_structural");
  require_same_layout(st.student, st.ema.teacher_semantic, "checkpoint teacher_semantic");
  require_same_layout(st.student, st.ema.teacher_structural, "checkpoint teacher_structural");
  st.ema.alpha_semantic = st.cfg.alpha_semantic;
  st.ema.alpha_structural = st.cfg.alpha_structural;
  st.ema.step = ckpt.meta.at("ema_step").get<std::int64_t>();
  st.opt.first = ckpt.group("opt.first");
  st.opt.second = ckpt.group("opt.second");
  st.opt.step = ckpt.meta.at("optimizer_step").get<std::int64_t>();
  st.step = ckpt.meta.at("step").get<std::int64_t>();
  return st;
}

Translator load_translator(const std::filesystem::path& dir) {
  const Checkpoint ckpt = load_mtuda_checkpoint(dir);
  Translator t;
  const auto& meta = ckpt.meta.at("translator");
  t.spec = gen_spec_from_json(meta.at("generator"));
  if (!meta.at("identity").get<bool>()) {
    t.params = ckpt.group("translator");
    Generator(t.spec).check(t.params);
  }
  return t;
}

namespace {

std::string step_dir_name(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step-%06lld", static_cast<long long>(step));
  return buf;
}

void write_checkpoint_rotating(const std::filesystem::path& out, const TrainState& st, const Translator& tr,
                               std::size_t keep) {
  const std::filesystem::path root = out / "checkpoints";
  std::filesystem::create_directories(root);
  save_train_checkpoint(root / step_dir_name(st.step), st, tr);
  {
    std::ofstream latest(root / "latest", std::ios::trunc);
    latest << step_dir_name(st.step) << "\n";
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename().string().rfind("step-", 0) == 0) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  while (dirs.size() > keep) {
    std::filesystem::remove_all(dirs.front());
    dirs.erase(dirs.begin());
  }
}

}  // namespace

FitResult fit(const TrainConfig& cfg, const StreamSet& streams, const FitOptions& options) {
  validate(cfg);
  FitResult res;
  if (options.resume) {
    res.state = load_train_state(*options.resume);
    if (nlohmann::json(to_json(res.state.cfg)) != nlohmann::json(to_json(cfg))) {
      throw ConfigError("resume: checkpoint was written with a different training config");
    }
  } else {
    res.state = train_init(cfg);
  }
  std::ofstream log;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    log.open(*options.out_dir / "metrics.jsonl", options.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw RuntimeFailure("cannot write " + (*options.out_dir / "metrics.jsonl").string());
  }
  std::string last_good = "none";
  while (res.state.step < cfg.total_steps) {
    const StepBatches b = draw_step(streams, cfg, res.state.step);
    LossReport r;
    try {
      r = mtuda_step(res.state, b);
    } catch (const RuntimeFailure& e) {
      throw RuntimeFailure(std::string(e.what()) + " (last good checkpoint: " + last_good + ")");
    }
    res.log.push_back(r);
    if (log.is_open()) log << to_json(r).dump() << "\n";
    if (options.on_step) options.on_step(r);
    const bool at_end = res.state.step == cfg.total_steps;
    if (options.out_dir && (res.state.step % cfg.checkpoint_every == 0 || at_end)) {
      log.flush();
      write_checkpoint_rotating(*options.out_dir, res.state, options.translator, cfg.keep_checkpoints);
      last_good = (*options.out_dir / "checkpoints" / step_dir_name(res.state.step)).string();
    }
  }
  return res;
}

LabelMap argmax_labels(const Tensor& logits) {
  if (logits.rank() != 4) throw ValidationError("argmax_labels: expected rank-4 logits");
  const std::size_t b = logits.dim(0), c = logits.dim(1), h = logits.dim(2), w = logits.dim(3), hw = h * w;
  LabelMap out(b, h, w);
  for (std::size_t n = 0; n < b; ++n) {
    for (std::size_t v = 0; v < hw; ++v) {
      std::size_t best = 0;
      float best_v = logits[(n * c) * hw + v];
      for (std::size_t k = 1; k < c; ++k) {
        const float x = logits[(n * c + k) * hw + v];
        if (x > best_v) {
          best_v = x;
          best = k;
        }
      }
      out.labels[n * hw + v] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

LabelMap infer_target(const SegNetSpec& spec, const ParamSet& student, const Translator& translator,
                      const ImageBatch& x_t) {
  const SegNet net(spec);
  std::vector<LabelMap> parts(x_t.batch());
  parallel_for(x_t.batch(), [&](std::size_t i) {
    ImageBatch one{slice_batch(x_t.pixels, i, 1), x_t.domain};
    if (!translator.identity()) one = Generator(translator.spec).forward(translator.params, one);
    parts[i] = argmax_labels(net.forward(student, one));
  });
  return concat_labels(parts);
}

}  // namespace mtuda
