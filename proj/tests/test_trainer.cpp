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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "mtuda/error.hpp"
#include "mtuda/losses.hpp"
#include "mtuda/rng.hpp"
#include "mtuda/sampling.hpp"
#include "mtuda/trainer.hpp"

namespace mtuda {
namespace {

namespace fs = std::filesystem;

DomainSplits tiny_data(double label_fraction = 0.5) {
  SynthConfig s;
  s.image_size = 32;
  s.source_count = 8;
  s.target_count = 6;
  s.target_test_count = 3;
  s.label_fraction = label_fraction;
  s.seed = 2;
  return partition(make_dataset(s));
}

DcamState tiny_dcam() {
  DcamConfig c;
  c.generator = {1, 4, 1};
  c.discriminator = {1, 4, 2, 3};
  c.seed = 1;
  DcamState st = dcam_init(c);
  // Give the zero-initialized output a little weight so translations differ from tanh(x).
  for (float& v : st.gen_t.value(st.gen_t.size() - 2).values()) v = 0.01f;
  return st;
}

TrainConfig tiny_config(Ablation ablation = Ablation::full) {
  TrainConfig c;
  c.network = {1, 5, 4, 2};
  c.batch = {2, 2, 2};
  c.total_steps = 6;
  c.lr = {3e-3, 2, 6};
  c.ramp_kd = {1.0, 6};
  c.ramp_con = {1.0, 6};
  c.alpha_semantic = 0.9;
  c.alpha_structural = 0.8;
  c.ablation = ablation;
  c.checkpoint_every = 3;
  c.keep_checkpoints = 2;
  c.seed = 7;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

TEST(BuildStreams, SizesAndLabelPolicy) {
  const DomainSplits d = tiny_data();
  const StreamSet st = build_streams(tiny_config(), d, tiny_dcam());
  const std::size_t m = d.source_labeled.size() + d.source_unlabeled.size(), p = d.target_train.size();
  EXPECT_EQ(st.labeled.size(), d.source_labeled.size());
  EXPECT_EQ(st.semantic.size(), d.source_unlabeled.size() + p + m);
  EXPECT_EQ(st.structural.size(), m + p);
  for (const Sample& s : st.labeled) EXPECT_TRUE(s.labeled());
  for (const Sample& s : st.semantic) {
    EXPECT_FALSE(s.labeled());
    EXPECT_EQ(s.domain, Domain::source);
  }
  TrainConfig both = tiny_config();
  both.structural_target_direction = true;
  EXPECT_EQ(build_streams(both, d, tiny_dcam()).structural.size(), 2 * (m + p));
}

TEST(BuildStreams, FullyLabeledSourceStillHasSemanticStream) {
  const DomainSplits d = tiny_data(1.0);
  ASSERT_TRUE(d.source_unlabeled.empty());
  const StreamSet st = build_streams(tiny_config(), d, tiny_dcam());
  EXPECT_FALSE(st.semantic.empty());
}

TEST(BuildStreams, PairsShareAPreImage) {
  const DomainSplits d = tiny_data();
  const StreamSet st = build_streams(tiny_config(), d, tiny_dcam());
  auto pre_image = [](const Sample& s) { return s.origin.empty() ? s.id : s.origin; };
  for (const PairedSample& p : st.structural) {
    EXPECT_EQ(pre_image(p.student_view), pre_image(p.teacher_view));
    EXPECT_EQ(p.student_view.domain, Domain::source);
    EXPECT_EQ(p.teacher_view.domain, Domain::target);
    EXPECT_FALSE(p.student_view.labeled() || p.teacher_view.labeled());
  }
}

TEST(BuildStreams, Rejections) {
  DomainSplits none = tiny_data(0.0);
  EXPECT_THROW(build_streams(tiny_config(), none, tiny_dcam()), ValidationError);
  DomainSplits leaked = tiny_data();
  leaked.target_train[0].labels = LabelMap(1, 32, 32, 0);
  EXPECT_THROW(build_streams(tiny_config(), leaked, tiny_dcam()), ValidationError);
}

TEST(DrawStep, EpochOrderReproducibleAndReshuffled) {
  const std::size_t n = 10;
  std::vector<std::size_t> epoch0, epoch1;
  for (std::uint64_t t = 0; t < 5; ++t) {
    for (auto i : draw_batch(n, 2, t, 3)) epoch0.push_back(i);
    for (auto i : draw_batch(n, 2, t + 5, 3)) epoch1.push_back(i);
  }
  EXPECT_EQ(std::set<std::size_t>(epoch0.begin(), epoch0.end()).size(), n);
  EXPECT_EQ(std::set<std::size_t>(epoch1.begin(), epoch1.end()).size(), n);
  EXPECT_NE(epoch0, epoch1);
  EXPECT_EQ(draw_batch(n, 2, 7, 3), draw_batch(n, 2, 7, 3));

  const StreamSet st = build_streams(tiny_config(), tiny_data(), tiny_dcam());
  const StepBatches a = draw_step(st, tiny_config(), 3), b = draw_step(st, tiny_config(), 3);
  EXPECT_EQ(a.labeled.pixels, b.labeled.pixels);
  EXPECT_EQ(a.semantic.pixels, b.semantic.pixels);
  EXPECT_EQ(a.structural.teacher_view.pixels, b.structural.teacher_view.pixels);
  // Ablations leave the other streams' draws untouched.
  const StepBatches ns = draw_step(st, tiny_config(Ablation::ns), 3);
  EXPECT_TRUE(ns.semantic.pixels.empty());
  EXPECT_EQ(ns.labeled.pixels, a.labeled.pixels);
  EXPECT_EQ(ns.structural.student_view.pixels, a.structural.student_view.pixels);
}

TEST(MtudaStep, RampWeightAtStepZero) {
  const StreamSet st = build_streams(tiny_config(), tiny_data(), tiny_dcam());
  TrainState s = train_init(tiny_config());
  const LossReport r = mtuda_step(s, draw_step(st, s.cfg, 0));
  EXPECT_NEAR(r.lambda_kd, std::exp(-5.0), 1e-15);
  EXPECT_NEAR(r.lambda_con, std::exp(-5.0), 1e-15);
  EXPECT_LE(r.total - r.seg, std::exp(-5.0) * (r.kd + r.con) + 1e-12);
  EXPECT_EQ(r.lr, 0.0);  // warmup starts from zero
}

TEST(MtudaStep, DisabledBranchesReportZero) {
  const StreamSet st = build_streams(tiny_config(), tiny_data(), tiny_dcam());
  for (auto [ablation, kd_on, con_on] : {std::tuple{Ablation::ns, false, true}, std::tuple{Ablation::nt, true, false},
                                         std::tuple{Ablation::supervised, false, false}}) {
    const FitResult res = fit(tiny_config(ablation), st);
    for (const LossReport& r : res.log) {
      if (!kd_on) {
        EXPECT_EQ(r.kd, 0.0);
        EXPECT_EQ(r.lambda_kd, 0.0);
      }
      if (!con_on) {
        EXPECT_EQ(r.con, 0.0);
        EXPECT_EQ(r.lambda_con, 0.0);
      }
    }
  }
}

TEST(MtudaStep, NsDropsKdGradient) {
  // With the semantic branch off, the student trajectory must not depend on the semantic stream.
  StreamSet st = build_streams(tiny_config(), tiny_data(), tiny_dcam());
  const FitResult a = fit(tiny_config(Ablation::ns), st);
  for (Sample& s : st.semantic) s.image.fill(0.9f);
  const FitResult b = fit(tiny_config(Ablation::ns), st);
  EXPECT_EQ(a.state.student, b.state.student);
  const FitResult full = fit(tiny_config(Ablation::full), st);
  EXPECT_FALSE(full.state.student == a.state.student);
}

TEST(MtudaStep, TeachersFollowClosedFormEma) {
  const StreamSet st = build_streams(tiny_config(), tiny_data(), tiny_dcam());
  TrainState s = train_init(tiny_config());
  std::vector<ParamSet> trajectory{s.student};
  for (int k = 0; k < 5; ++k) {
    mtuda_step(s, draw_step(st, s.cfg, s.step));
    trajectory.push_back(s.student);
  }
  // teacher_k = a^k theta_0 + sum_{j=1..k} (1 - a) a^{k-j} theta_j
  for (auto [teacher, alpha] : {std::pair{&s.ema.teacher_semantic, 0.9}, std::pair{&s.ema.teacher_structural, 0.8}}) {
    const std::size_t k = trajectory.size() - 1;
    double worst = 0.0;
    for (std::size_t e = 0; e < teacher->size(); ++e) {
      for (std::size_t i = 0; i < (*teacher)[e].value.size(); ++i) {
        double expected = std::pow(alpha, static_cast<double>(k)) * trajectory[0][e].value[i];
        for (std::size_t j = 1; j <= k; ++j) {
          expected += (1 - alpha) * std::pow(alpha, static_cast<double>(k - j)) * trajectory[j][e].value[i];
        }
        worst = std::max(worst, std::abs(expected - (*teacher)[e].value[i]));
      }
    }
    EXPECT_LT(worst, 1e-6);
  }
  EXPECT_EQ(s.ema.step, 5);
}

TEST(Fit, SupervisedMatchesReferenceLoop) {
  const TrainConfig cfg = tiny_config(Ablation::supervised);
  const StreamSet st = build_streams(cfg, tiny_data(), tiny_dcam());
  const FitResult res = fit(cfg, st);

  // Independent loop: labeled draws keyed by stream 11, supervised loss, one optimizer step.
  const SegNet net(cfg.network);
  ParamSet theta = net.init(derive_seed(cfg.seed, 1));
  OptimizerState opt = optimizer_init(theta);
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    const auto idx = draw_batch(st.labeled.size(), cfg.batch.labeled, static_cast<std::uint64_t>(t),
                                derive_seed(cfg.seed, 11));
    std::vector<const Sample*> ptrs;
    for (auto i : idx) ptrs.push_back(&st.labeled[i]);
    const ImageBatch x = stack_images(ptrs, Domain::source);
    const LabelMap y = stack_labels(ptrs);
    ag::Graph g;
    const BoundParams p = bind_params(g, theta, true);
    const ag::Var probs = g.softmax_channels(net.logits(g, p, g.constant(x.pixels)));
    const ag::Var loss = g.loss(probs, [&](const Tensor& in, Tensor& grad) {
      return losses::supervised_loss<float>(in.values(), y.labels, losses::prob_shape(in), grad.values());
    });
    EXPECT_EQ(g.scalar(loss), res.log[static_cast<std::size_t>(t)].seg);
    g.backward(loss);
    optimizer_step(theta, collect_gradients(g, p), opt, learning_rate(t, cfg.lr), cfg.optimizer);
  }
  EXPECT_EQ(theta, res.state.student);
}

TEST(Fit, DeterministicAndLogsReassemble) {
  const TrainConfig cfg = tiny_config();
  const StreamSet st = build_streams(cfg, tiny_data(), tiny_dcam());
  const fs::path out = fresh_dir("mtuda_test_fit_log");
  FitOptions opts;
  opts.out_dir = out;
  const FitResult a = fit(cfg, st, opts);
  const FitResult b = fit(cfg, st);
  EXPECT_EQ(a.state.student, b.state.student);
  EXPECT_EQ(a.state.ema.teacher_semantic, b.state.ema.teacher_semantic);

  std::ifstream in(out / "metrics.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const double total = j["seg"].get<double>() + j["lambda_kd"].get<double>() * j["kd"].get<double>() +
                         j["lambda_con"].get<double>() * j["con"].get<double>();
    EXPECT_NEAR(j["total"].get<double>(), total, 1e-9);
    ++n;
  }
  EXPECT_EQ(n, 6u);
  // Checkpoints at 3 and 6, keep 2, plus a latest pointer.
  EXPECT_TRUE(fs::exists(out / "checkpoints" / "step-000003"));
  EXPECT_TRUE(fs::exists(out / "checkpoints" / "step-000006"));
  std::ifstream latest(out / "checkpoints" / "latest");
  std::getline(latest, line);
  EXPECT_EQ(line, "step-000006");
  fs::remove_all(out);
}

TEST(Fit, CheckpointRotationKeepsNewest) {
  TrainConfig cfg = tiny_config(Ablation::supervised);
  cfg.checkpoint_every = 1;
  const StreamSet st = build_streams(cfg, tiny_data(), tiny_dcam());
  const fs::path out = fresh_dir("mtuda_test_fit_rotate");
  FitOptions opts;
  opts.out_dir = out;
  fit(cfg, st, opts);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(out / "checkpoints")) {
    if (e.is_directory()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"step-000005", "step-000006"}));
  fs::remove_all(out);
}

TEST(Fit, ResumeIsBitIdentical) {
  const TrainConfig cfg = tiny_config();
  const StreamSet st = build_streams(cfg, tiny_data(), tiny_dcam());
  const fs::path out = fresh_dir("mtuda_test_fit_resume_a");
  FitOptions opts;
  opts.out_dir = out;
  opts.translator = Translator::from(tiny_dcam());
  const FitResult full = fit(cfg, st, opts);

  const fs::path mid = fresh_dir("mtuda_test_fit_resume_mid");
  fs::copy(out / "checkpoints" / "step-000003", mid, fs::copy_options::recursive);
  FitOptions again;
  again.resume = mid;
  const FitResult resumed = fit(cfg, st, again);
  EXPECT_EQ(resumed.state.student, full.state.student);
  EXPECT_EQ(resumed.state.ema.teacher_structural, full.state.ema.teacher_structural);
  ASSERT_EQ(resumed.log.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(resumed.log[i].total, full.log[i + 3].total);

  const Translator tr = load_translator(out / "checkpoints" / "step-000006");
  EXPECT_EQ(tr.params, tiny_dcam().gen_s);

  TrainConfig other = cfg;
  other.seed = 8;
  EXPECT_THROW(fit(other, st, again), ConfigError);
  fs::remove_all(out);
  fs::remove_all(mid);
}

TEST(Fit, SupervisedLossDecreasesOnToyData) {
  TrainConfig cfg = tiny_config(Ablation::supervised);
  cfg.total_steps = 40;
  cfg.lr = {3e-3, 2, 40};
  const StreamSet st = build_streams(cfg, tiny_data(), tiny_dcam());
  const FitResult res = fit(cfg, st);
  EXPECT_LT(res.log.back().seg, res.log.front().seg);
}

TEST(Infer, ArgmaxTiesAndShape) {
  Tensor logits({1, 3, 1, 2}, {1.0f, 0.0f, 1.0f, 2.0f, 0.5f, 2.0f});
  const LabelMap y = argmax_labels(logits);
  EXPECT_EQ(y.labels, (std::vector<std::uint8_t>{0, 1}));
}

TEST(Infer, BatchInvarianceAndIdentityTranslator) {
  const TrainConfig cfg = tiny_config();
  const DomainSplits d = tiny_data();
  const ParamSet student = SegNet(cfg.network).init(3);
  std::vector<const Sample*> ptrs{&d.target_test[0], &d.target_test[1], &d.target_test[2]};
  const ImageBatch x = stack_images(ptrs, Domain::target);
  const Translator tr = Translator::from(tiny_dcam());
  const LabelMap all = infer_target(cfg.network, student, tr, x);
  EXPECT_EQ(all.batch, 3u);
  for (auto v : all.labels) EXPECT_LT(v, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    const LabelMap one = infer_target(cfg.network, student, tr, {slice_batch(x.pixels, i, 1), Domain::target});
    EXPECT_TRUE(std::equal(one.labels.begin(), one.labels.end(), all.labels.begin() + i * 32 * 32));
  }
  const LabelMap direct = argmax_labels(SegNet(cfg.network).forward(student, x));
  EXPECT_EQ(infer_target(cfg.network, student, Translator{}, x), direct);
  EXPECT_NE(all, direct);
}

TEST(TrainConfig, Rejections) {
  TrainConfig c = tiny_config();
  c.alpha_semantic = 1.5;
  EXPECT_THROW(train_init(c), ConfigError);
  c = tiny_config();
  c.batch.labeled = 0;
  EXPECT_THROW(train_init(c), ConfigError);
  EXPECT_THROW(parse_ablation("nope"), ValidationError);
  EXPECT_EQ(parse_ablation("ns-mse"), Ablation::ns_mse);
}

}  // namespace
}  // namespace mtuda
