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
#include "mtuda/dcam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtuda/autograd.hpp"
#include "mtuda/config.hpp"
#include "mtuda/error.hpp"
#include "mtuda/parallel.hpp"
#include "mtuda/rng.hpp"
#include "mtuda/sampling.hpp"

namespace mtuda {

DiscriminationMode parse_discrimination_mode(const std::string& name) {
  if (name == "three_class") return DiscriminationMode::three_class;
  if (name == "binary_pooled") return DiscriminationMode::binary_pooled;
  throw ConfigError("unknown discrimination mode '" + name + "' (expected three_class or binary_pooled)");
}

const char* discrimination_mode_name(DiscriminationMode mode) {
  return mode == DiscriminationMode::three_class ? "three_class" : "binary_pooled";
}

Direction parse_direction(const std::string& name) {
  if (name == "s2t") return Direction::s2t;
  if (name == "t2s") return Direction::t2s;
  throw ValidationError("unknown direction '" + name + "' (expected s2t or t2s)");
}

const char* direction_name(Direction d) { return d == Direction::s2t ? "s2t" : "t2s"; }

void validate(const DcamConfig& cfg) {
  if (cfg.generator.channels == 0 || cfg.generator.width == 0) throw ConfigError("dcam.generator: zero width");
  if (cfg.discriminator.width == 0 || cfg.discriminator.downsamplings == 0) {
    throw ConfigError("dcam.discriminator: zero width or no downsampling");
  }
  if (cfg.discriminator.in_channels != cfg.generator.channels) {
    throw ConfigError("dcam: discriminator and generator channel counts differ");
  }
  if (!(cfg.lambda_cyc >= 0.0)) throw ConfigError("dcam.lambda_cyc must be >= 0");
  if (!(cfg.lr > 0.0)) throw ConfigError("dcam.lr must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("dcam betas must lie in [0, 1)");
  }
  if (cfg.batch_size == 0) throw ConfigError("dcam.batch_size must be > 0");
}

DiscSpec discriminator_spec(const DcamConfig& cfg) {
  DiscSpec d = cfg.discriminator;
  d.num_outputs = cfg.mode == DiscriminationMode::three_class ? 3 : 1;
  return d;
}

Tensor ImagePool::query(const Tensor& batch) {
  if (capacity == 0) return batch;
  Tensor out = batch;
  const std::size_t per = batch.size() / batch.dim(0);
  Shape one = batch.shape();
  one[0] = 1;
  for (std::size_t i = 0; i < batch.dim(0); ++i) {
    const std::uint64_t r = derive_seed(seed, 0, queries++);
    Tensor img = slice_batch(batch, i, 1);
    if (images.size() < capacity) {
      images.push_back(std::move(img));
      continue;
    }
    if (r & 1U) {
      const std::size_t k = static_cast<std::size_t>((r >> 1) % capacity);
      std::copy_n(images[k].data(), per, out.data() + i * per);
      images[k] = std::move(img);
    }
  }
  return out;
}

DcamState dcam_init(const DcamConfig& cfg) {
  validate(cfg);
  DcamState st;
  st.cfg = cfg;
  st.cfg.discriminator = discriminator_spec(cfg);
  const Generator gen(cfg.generator);
  const Discriminator disc(st.cfg.discriminator);
  st.gen_s = gen.init(derive_seed(cfg.seed, 101));
  st.gen_t = gen.init(derive_seed(cfg.seed, 102));
  st.disc_s = disc.init(derive_seed(cfg.seed, 103));
  st.disc_t = disc.init(derive_seed(cfg.seed, 104));
  st.opt_gen_s = optimizer_init(st.gen_s);
  st.opt_gen_t = optimizer_init(st.gen_t);
  st.opt_disc_s = optimizer_init(st.disc_s);
  st.opt_disc_t = optimizer_init(st.disc_t);
  for (std::size_t k = 0; k < st.pools.size(); ++k) {
    st.pools[k].capacity = cfg.pool_size;
    st.pools[k].seed = derive_seed(cfg.seed, 110 + k);
  }
  return st;
}

const ParamSet& generator_for(const DcamState& state, Direction direction) {
  return direction == Direction::s2t ? state.gen_t : state.gen_s;
}

ImageBatch translate(const DcamState& state, const ImageBatch& batch, Direction direction) {
  const Domain expected = direction == Direction::s2t ? Domain::source : Domain::target;
  if (batch.domain != expected) {
    throw ValidationError(std::string("translate ") + direction_name(direction) + ": input is tagged " +
                          domain_name(batch.domain));
  }
  return Generator(state.cfg.generator).forward(generator_for(state, direction), batch);
}

CycleResult cycle(const DcamState& state, const ImageBatch& batch, Direction first) {
  const Direction second = first == Direction::s2t ? Direction::t2s : Direction::s2t;
  CycleResult r;
  r.forward_params = &generator_for(state, first);
  r.backward_params = &generator_for(state, second);
  r.translated = translate(state, batch, first);
  r.reconstructed = translate(state, r.translated, second);
  return r;
}

double cycle_loss(const Tensor& x, const Tensor& x_rec, double lambda, Tensor* grad) {
  if (x.shape() != x_rec.shape()) throw ValidationError("cycle_loss: shape mismatch");
  if (x.empty()) throw ValidationError("cycle_loss: empty input");
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  if (grad) *grad = Tensor(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x_rec[i]) - static_cast<double>(x[i]);
    sum += std::abs(d);
    if (grad) (*grad)[i] = static_cast<float>(lambda * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / n);
  }
  return lambda * sum / n;
}

namespace {

// Mean patch cross-entropy of (B, K, h, w) logits against one class; grad scaled by `scale`.
double patch_ce(const Tensor& logits, std::size_t cls, Tensor* grad, double scale) {
  const std::size_t b = logits.dim(0), k = logits.dim(1), hw = logits.dim(2) * logits.dim(3);
  if (cls >= k) throw ValidationError("discriminator output has too few channels");
  const double count = static_cast<double>(b * hw);
  if (grad) *grad = Tensor(logits.shape());
  double total = 0.0;
  std::vector<double> p(k);
  for (std::size_t n = 0; n < b; ++n) {
    for (std::size_t v = 0; v < hw; ++v) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, static_cast<double>(logits[(n * k + c) * hw + v]));
      double z = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        p[c] = std::exp(static_cast<double>(logits[(n * k + c) * hw + v]) - mx);
        z += p[c];
      }
      total += -(static_cast<double>(logits[(n * k + cls) * hw + v]) - mx - std::log(z));
      if (grad) {
        for (std::size_t c = 0; c < k; ++c) {
          const double g = p[c] / z - (c == cls ? 1.0 : 0.0);
          (*grad)[(n * k + c) * hw + v] = static_cast<float>(scale * g / count);
        }
      }
    }
  }
  return total / count;
}

// sum (d - target)^2 over elements; grad (if given) gets scale * 2 (d - target).
double squared_error(const Tensor& d, double target, Tensor* grad, double scale) {
  if (grad) *grad = Tensor(d.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = static_cast<double>(d[i]) - target;
    sum += e * e;
    if (grad) (*grad)[i] = static_cast<float>(scale * 2.0 * e);
  }
  return sum;
}

void require_outputs(const Tensor& t, std::size_t k, const char* what) {
  if (t.rank() != 4 || t.dim(1) != k || t.empty()) {
    throw ValidationError(std::string(what) + ": expected discriminator output with " + std::to_string(k) +
                          " channels, got " + shape_str(t.shape()));
  }
}

}  // namespace

double disc_loss(const Tensor& real, const Tensor& translated, const Tensor* reconstructed, DiscriminationMode mode,
                 Tensor* grad_real, Tensor* grad_translated, Tensor* grad_reconstructed) {
  if (mode == DiscriminationMode::three_class) {
    if (!reconstructed) throw ValidationError("disc_loss: three_class mode needs the reconstructed stream");
    for (const Tensor* t : {&real, &translated, reconstructed}) require_outputs(*t, 3, "disc_loss");
    const double third = 1.0 / 3.0;
    return third * (patch_ce(real, kRealClass, grad_real, third) +
                    patch_ce(translated, kTranslatedClass, grad_translated, third) +
                    patch_ce(*reconstructed, kReconstructedClass, grad_reconstructed, third));
  }
  require_outputs(real, 1, "disc_loss");
  require_outputs(translated, 1, "disc_loss");
  if (reconstructed) require_outputs(*reconstructed, 1, "disc_loss");
  const double n_real = static_cast<double>(real.size());
  const double n_fake = static_cast<double>(translated.size() + (reconstructed ? reconstructed->size() : 0));
  double loss = 0.5 * squared_error(real, 1.0, grad_real, 0.5 / n_real) / n_real;
  double fake = squared_error(translated, 0.0, grad_translated, 0.5 / n_fake);
  if (reconstructed) fake += squared_error(*reconstructed, 0.0, grad_reconstructed, 0.5 / n_fake);
  loss += 0.5 * fake / n_fake;
  return loss;
}

double gen_adv_loss(const Tensor& fake, DiscriminationMode mode, Tensor* grad) {
  if (mode == DiscriminationMode::three_class) {
    require_outputs(fake, 3, "gen_adv_loss");
    return patch_ce(fake, kRealClass, grad, 1.0);
  }
  require_outputs(fake, 1, "gen_adv_loss");
  const double n = static_cast<double>(fake.size());
  return squared_error(fake, 1.0, grad, 1.0 / n) / n;
}

nlohmann::json to_json(const DcamLosses& l) {
  return {{"g_adv_s", l.g_adv_s}, {"g_adv_t", l.g_adv_t}, {"cyc_s", l.cyc_s},
          {"cyc_t", l.cyc_t},     {"d_s", l.d_s},         {"d_t", l.d_t}};
}

namespace {

void require_domains(const ImageBatch& bs, const ImageBatch& bt) {
  if (bs.domain != Domain::source || bt.domain != Domain::target) {
    throw ValidationError("dcam step: expected one source-tagged and one target-tagged batch");
  }
}

void require_finite(double v, const char* what, std::int64_t step) {
  if (!std::isfinite(v)) {
    throw RuntimeFailure(std::string("dcam step ") + std::to_string(step) + ": non-finite " + what);
  }
}

OptimizerConfig adam(const DcamConfig& cfg) {
  OptimizerConfig o;
  o.kind = OptimizerKind::adam;
  o.beta1 = cfg.beta1;
  o.beta2 = cfg.beta2;
  return o;
}

}  // namespace

DcamFakes generate_fakes(const DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t) {
  require_domains(batch_s, batch_t);
  const CycleResult s = cycle(state, batch_s, Direction::s2t);
  const CycleResult t = cycle(state, batch_t, Direction::t2s);
  return {t.translated.pixels, s.reconstructed.pixels, s.translated.pixels, t.reconstructed.pixels};
}

DcamFakes dcam_generator_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t,
                              DcamLosses& losses) {
  require_domains(batch_s, batch_t);
  const DcamConfig& cfg = state.cfg;
  const Generator gen(cfg.generator);
  const Discriminator disc(cfg.discriminator);
  const DiscriminationMode mode = cfg.mode;

  ag::Graph g;
  const BoundParams ps = bind_params(g, state.gen_s, true);
  const BoundParams pt = bind_params(g, state.gen_t, true);
  const BoundParams ds = bind_params(g, state.disc_s, false);
  const BoundParams dt = bind_params(g, state.disc_t, false);
  const ag::Var xs = g.constant(batch_s.pixels);
  const ag::Var xt = g.constant(batch_t.pixels);

  // Both reconstruction paths reuse the two translation generators.
  const ag::Var fake_t = gen.translate(g, pt, xs);
  const ag::Var rec_s = gen.translate(g, ps, fake_t);
  const ag::Var fake_s = gen.translate(g, ps, xt);
  const ag::Var rec_t = gen.translate(g, pt, fake_s);

  const ag::Var s_parts[] = {fake_s, rec_s};
  const ag::Var t_parts[] = {fake_t, rec_t};
  const ag::Var adv_s = g.loss(disc.scores(g, ds, g.concat_batch(s_parts)),
                               [mode](const Tensor& in, Tensor& grad) { return gen_adv_loss(in, mode, &grad); });
  const ag::Var adv_t = g.loss(disc.scores(g, dt, g.concat_batch(t_parts)),
                               [mode](const Tensor& in, Tensor& grad) { return gen_adv_loss(in, mode, &grad); });
  const double lambda = cfg.lambda_cyc;
  const ag::Var cyc_s = g.loss(
      rec_s, [&](const Tensor& in, Tensor& grad) { return cycle_loss(batch_s.pixels, in, lambda, &grad); });
  const ag::Var cyc_t = g.loss(
      rec_t, [&](const Tensor& in, Tensor& grad) { return cycle_loss(batch_t.pixels, in, lambda, &grad); });
  const std::pair<ag::Var, double> terms[] = {{adv_s, 1.0}, {adv_t, 1.0}, {cyc_s, 1.0}, {cyc_t, 1.0}};
  const ag::Var total = g.weighted_sum(terms);

  losses.g_adv_s = g.scalar(adv_s);
  losses.g_adv_t = g.scalar(adv_t);
  losses.cyc_s = g.scalar(cyc_s);
  losses.cyc_t = g.scalar(cyc_t);
  require_finite(g.scalar(total), "generator loss", state.step);

  DcamFakes fakes{g.value(fake_s), g.value(rec_s), g.value(fake_t), g.value(rec_t)};
  g.backward(total);
  const ParamSet grad_s = collect_gradients(g, ps);
  const ParamSet grad_t = collect_gradients(g, pt);
  const OptimizerConfig opt = adam(cfg);
  optimizer_step(state.gen_s, grad_s, state.opt_gen_s, cfg.lr, opt);
  optimizer_step(state.gen_t, grad_t, state.opt_gen_t, cfg.lr, opt);
  return fakes;
}

namespace {

double discriminator_update(const Discriminator& disc, ParamSet& params, OptimizerState& opt_state,
                            const DcamConfig& cfg, const Tensor& real, const Tensor& translated,
                            const Tensor& reconstructed, std::int64_t step) {
  const std::size_t nr = real.dim(0), nt = translated.dim(0), nc = reconstructed.dim(0);
  const Tensor parts[] = {real, translated, reconstructed};
  ag::Graph g;
  const BoundParams p = bind_params(g, params, true);
  const ag::Var scores = disc.scores(g, p, g.constant(concat_batch(parts)));
  const DiscriminationMode mode = cfg.mode;
  const ag::Var loss = g.loss(scores, [&](const Tensor& in, Tensor& grad) {
    const Tensor r = slice_batch(in, 0, nr), t = slice_batch(in, nr, nt), c = slice_batch(in, nr + nt, nc);
    Tensor gr, gt, gc;
    const double v = disc_loss(r, t, &c, mode, &gr, &gt, &gc);
    const Tensor grads[] = {gr, gt, gc};
    grad = concat_batch(grads);
    return v;
  });
  const double value = g.scalar(loss);
  require_finite(value, "discriminator loss", step);
  g.backward(loss);
  optimizer_step(params, collect_gradients(g, p), opt_state, cfg.lr, adam(cfg));
  return value;
}

}  // namespace

void dcam_discriminator_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t,
                             const DcamFakes& fakes, DcamLosses& losses, bool use_pools) {
  require_domains(batch_s, batch_t);
  auto maybe_pool = [&](PoolSlot slot, const Tensor& t) { return use_pools ? state.pools[slot].query(t) : t; };
  const Tensor fs = maybe_pool(kPoolSourceTranslated, fakes.fake_s);
  const Tensor rs = maybe_pool(kPoolSourceReconstructed, fakes.rec_s);
  const Tensor ft = maybe_pool(kPoolTargetTranslated, fakes.fake_t);
  const Tensor rt = maybe_pool(kPoolTargetReconstructed, fakes.rec_t);
  const Discriminator disc(state.cfg.discriminator);
  losses.d_s = discriminator_update(disc, state.disc_s, state.opt_disc_s, state.cfg, batch_s.pixels, fs, rs, state.step);
  losses.d_t = discriminator_update(disc, state.disc_t, state.opt_disc_t, state.cfg, batch_t.pixels, ft, rt, state.step);
}

DcamLosses dcam_train_step(DcamState& state, const ImageBatch& batch_s, const ImageBatch& batch_t) {
  DcamLosses losses;
  const DcamFakes fakes = dcam_generator_step(state, batch_s, batch_t, losses);
  dcam_discriminator_step(state, batch_s, batch_t, fakes, losses, true);
  ++state.step;
  return losses;
}

namespace {

ImageBatch draw_images(const std::vector<Sample>& pool, Domain domain, std::size_t batch, std::int64_t step,
                       std::uint64_t seed) {
  const std::vector<std::size_t> idx = draw_batch(pool.size(), batch, static_cast<std::uint64_t>(step), seed);
  std::vector<const Sample*> picked;
  picked.reserve(idx.size());
  for (std::size_t i : idx) picked.push_back(&pool[i]);
  return stack_images(picked, domain);
}

}  // namespace

DcamState train_dcam(const DcamConfig& cfg, const std::vector<Sample>& source, const std::vector<Sample>& target,
                     const std::function<void(std::int64_t, const DcamLosses&)>& on_step) {
  if (source.empty() || target.empty()) throw ValidationError("train_dcam: both domains need training images");
  DcamState state = dcam_init(cfg);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const ImageBatch bs = draw_images(source, Domain::source, cfg.batch_size, state.step, derive_seed(cfg.seed, 1));
    const ImageBatch bt = draw_images(target, Domain::target, cfg.batch_size, state.step, derive_seed(cfg.seed, 2));
    const std::int64_t step = state.step;
    const DcamLosses l = dcam_train_step(state, bs, bt);
    if (on_step) on_step(step, l);
  }
  return state;
}

namespace {

Sample derived_sample(const Sample& from, const std::string& prefix, ImageBatch image) {
  Sample s;
  s.id = prefix + from.id;
  s.domain = image.domain;
  s.split = from.split;
  s.volume = from.volume;
  s.slice = from.slice;
  s.origin = from.origin.empty() ? from.id : from.origin;
  s.image = std::move(image.pixels);
  s.labels = from.labels;
  return s;
}

ImageBatch as_batch(const Sample& s) { return {s.image, s.domain}; }

}  // namespace

std::vector<Sample> translate_samples(const DcamState& state, const std::vector<Sample>& samples, Direction direction,
                                      const std::string& id_prefix) {
  std::vector<Sample> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    out[i] = derived_sample(samples[i], id_prefix, translate(state, as_batch(samples[i]), direction));
  });
  return out;
}

IntermediateDomains synthesize_domains(const DcamState& state, const std::vector<Sample>& source,
                                       const std::vector<Sample>& target) {
  IntermediateDomains d;
  d.sourcelike.resize(target.size() + source.size());
  d.targetlike.resize(source.size() + target.size());
  parallel_for(source.size() + target.size(), [&](std::size_t i) {
    if (i < target.size()) {
      const CycleResult c = cycle(state, as_batch(target[i]), Direction::t2s);
      d.sourcelike[i] = derived_sample(target[i], "t2s-", c.translated);
      d.targetlike[source.size() + i] = derived_sample(target[i], "t2s2t-", c.reconstructed);
    } else {
      const std::size_t k = i - target.size();
      const CycleResult c = cycle(state, as_batch(source[k]), Direction::s2t);
      d.targetlike[k] = derived_sample(source[k], "s2t-", c.translated);
      d.sourcelike[target.size() + k] = derived_sample(source[k], "s2t2s-", c.reconstructed);
    }
  });
  return d;
}

void save_dcam(const std::filesystem::path& dir, const DcamState& state) {
  Checkpoint ckpt;
  ckpt.groups["gen_s"] = state.gen_s;
  ckpt.groups["gen_t"] = state.gen_t;
  ckpt.groups["disc_s"] = state.disc_s;
  ckpt.groups["disc_t"] = state.disc_t;
  const std::pair<const char*, const OptimizerState*> opts[] = {
      {"gen_s", &state.opt_gen_s}, {"gen_t", &state.opt_gen_t}, {"disc_s", &state.opt_disc_s}, {"disc_t", &state.opt_disc_t}};
  nlohmann::json opt_steps = nlohmann::json::object();
  for (const auto& [name, o] : opts) {
    ckpt.groups[std::string("opt.") + name + ".first"] = o->first;
    ckpt.groups[std::string("opt.") + name + ".second"] = o->second;
    opt_steps[name] = o->step;
  }
  nlohmann::json pools = nlohmann::json::array();
  for (std::size_t k = 0; k < state.pools.size(); ++k) {
    const ImagePool& p = state.pools[k];
    ParamSet images;
    for (std::size_t i = 0; i < p.images.size(); ++i) images.add(std::to_string(i), p.images[i]);
    ckpt.groups["pool." + std::to_string(k)] = std::move(images);
    pools.push_back({{"capacity", p.capacity}, {"seed", p.seed}, {"queries", p.queries}});
  }
  ckpt.meta = {{"kind", "dcam"},
               {"step", state.step},
               {"config", to_json(state.cfg)},
               {"optimizer_steps", opt_steps},
               {"pools", pools}};
  save_checkpoint(dir, ckpt);
}

DcamState load_dcam(const std::filesystem::path& dir) {
  const Checkpoint ckpt = load_checkpoint(dir);
  if (ckpt.meta.value("kind", std::string{}) != "dcam") {
    throw ConfigError(dir.string() + " is not a DCAM checkpoint");
  }
  DcamState st;
  st.cfg = dcam_config_from_json(ckpt.meta.at("config"));
  st.cfg.discriminator = discriminator_spec(st.cfg);
  st.step = ckpt.meta.at("step").get<std::int64_t>();
  st.gen_s = ckpt.group("gen_s");
  st.gen_t = ckpt.group("gen_t");
  st.disc_s = ckpt.group("disc_s");
  st.disc_t = ckpt.group("disc_t");
  Generator(st.cfg.generator).check(st.gen_s);
  Generator(st.cfg.generator).check(st.gen_t);
  Discriminator(st.cfg.discriminator).check(st.disc_s);
  Discriminator(st.cfg.discriminator).check(st.disc_t);
  const std::pair<const char*, OptimizerState*> opts[] = {
      {"gen_s", &st.opt_gen_s}, {"gen_t", &st.opt_gen_t}, {"disc_s", &st.opt_disc_s}, {"disc_t", &st.opt_disc_t}};
  for (const auto& [name, o] : opts) {
    o->first = ckpt.group(std::string("opt.") + name + ".first");
    o->second = ckpt.group(std::string("opt.") + name + ".second");
    o->step = ckpt.meta.at("optimizer_steps").at(name).get<std::int64_t>();
  }
  const auto& pools = ckpt.meta.at("pools");
  if (pools.size() != st.pools.size()) throw ConfigError("DCAM checkpoint: wrong pool count");
  for (std::size_t k = 0; k < st.pools.size(); ++k) {
    ImagePool& p = st.pools[k];
    p.capacity = pools[k].at("capacity").get<std::size_t>();
    p.seed = pools[k].at("seed").get<std::uint64_t>();
    p.queries = pools[k].at("queries").get<std::uint64_t>();
    const ParamSet& images = ckpt.group("pool." + std::to_string(k));
    for (std::size_t i = 0; i < images.size(); ++i) p.images.push_back(images.at(std::to_string(i)));
  }
  return st;
}

}  // namespace mtuda
