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
#include "mtuda/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtuda/config.hpp"
#include "mtuda/data.hpp"
#include "mtuda/dcam.hpp"
#include "mtuda/error.hpp"
#include "mtuda/evaluation.hpp"
#include "mtuda/plot.hpp"
#include "mtuda/trainer.hpp"

namespace mtuda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config, out, data, dcam, ckpt, in, direction, ablation, inference, volumes, domain = "source";
  std::string split = "train", label_map = "mmwhs", metrics, resume;
  std::vector<std::string> reports;
  std::optional<std::uint64_t> seed;
  std::optional<double> asd_cap;
  std::size_t roi = 256;
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? run_config_from_json(json::object()) : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.ablation.empty()) cfg.train.ablation = parse_ablation(o.ablation);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw RuntimeFailure("failed writing " + path.string());
}

void echo_config(const fs::path& dir, const RunConfig& cfg) { write_text(dir / "config.json", to_json(cfg).dump(2) + "\n"); }

int cmd_synth(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const Dataset d = make_dataset(cfg.resolved_data());
  write_dataset(o.out, d);
  echo_config(o.out, cfg);
  out << "wrote " << d.samples.size() << " samples to " << o.out << "\n";
  return 0;
}

bool is_nifti(const fs::path& p) {
  const std::string n = p.filename().string();
  auto ends = [&](const std::string& s) { return n.size() >= s.size() && n.compare(n.size() - s.size(), s.size(), s) == 0; };
  return ends(".nii") || ends(".nii.gz");
}

std::string nifti_stem(const fs::path& p) {
  std::string n = p.filename().string();
  for (const std::string ext : {".nii.gz", ".nii"}) {
    if (n.size() > ext.size() && n.compare(n.size() - ext.size(), ext.size(), ext) == 0) return n.substr(0, n.size() - ext.size());
  }
  return n;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(o.volumes)) throw ValidationError("--volumes: not a directory: " + o.volumes);
  if (o.roi == 0) throw ValidationError("--roi must be > 0");
  const Domain domain = parse_domain(o.domain);
  const Split split = parse_split(o.split);
  if (o.label_map != "mmwhs" && o.label_map != "raw" && o.label_map != "none") {
    throw ValidationError("--labels must be mmwhs, raw or none");
  }
  std::map<std::string, fs::path> images, labels;
  for (const auto& e : fs::directory_iterator(o.volumes)) {
    if (!e.is_regular_file() || !is_nifti(e.path())) continue;
    const std::string stem = nifti_stem(e.path());
    if (ends_with(stem, "_label")) {
      labels[stem.substr(0, stem.size() - 6)] = e.path();
    } else {
      images[ends_with(stem, "_image") ? stem.substr(0, stem.size() - 6) : stem] = e.path();
    }
  }
  if (images.empty()) throw ValidationError("no NIfTI volumes found in " + o.volumes);

  Dataset d;
  d.provenance = {{"generator", "ingest"}, {"roi", o.roi}, {"domain", domain_name(domain)}, {"split", split_name(split)}};
  for (const auto& [name, path] : images) {
    const NiftiImage img = read_nifti(path);
    std::optional<Volume> lab;
    const auto lp = labels.find(name);
    if (lp != labels.end() && o.label_map != "none") {
      const NiftiImage raw = read_nifti(lp->second);
      lab = o.label_map == "mmwhs" ? map_mmwhs_labels(raw.volume) : raw.volume;
    }
    const SliceStack stack = preprocess_volume(img.volume, img.meta, o.roi, lab ? &*lab : nullptr);
    if (stack.padded) err << "warning: " << path.filename().string() << " was padded to the ROI\n";
    for (std::size_t k = 0; k < stack.images.size(); ++k) {
      Sample s;
      char idx[16];
      std::snprintf(idx, sizeof idx, "%04zu", k);
      s.id = name + "-" + idx;
      s.domain = domain;
      s.split = split;
      s.volume = name;
      s.slice = k;
      s.image = Tensor({1, 1, stack.height, stack.width}, stack.images[k]);
      if (!stack.labels.empty()) {
        LabelMap m(1, stack.height, stack.width);
        m.labels = stack.labels[k];
        s.labels = std::move(m);
      }
      d.samples.push_back(std::move(s));
    }
    out << name << ": " << stack.images.size() << " slices" << (lab ? " (labeled)" : "") << "\n";
  }
  write_dataset(o.out, d);
  return 0;
}

std::vector<Sample> training_images(const Dataset& d, Domain domain) {
  std::vector<Sample> out;
  for (const Sample& s : d.samples) {
    if (s.domain == domain && s.split == Split::train) out.push_back(s);
  }
  return out;
}

int cmd_train_dcam(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const Dataset d = read_dataset(o.data);
  const DcamConfig dc = cfg.resolved_dcam();
  fs::create_directories(o.out);
  std::ofstream log(fs::path(o.out) / "losses.jsonl", std::ios::trunc);
  const DcamState st = train_dcam(dc, training_images(d, Domain::source), training_images(d, Domain::target),
                                  [&](std::int64_t step, const DcamLosses& l) {
                                    json j = to_json(l);
                                    j["step"] = step;
                                    log << j.dump() << "\n";
                                    if ((step + 1) % 25 == 0 || step == 0) {
                                      out << "dcam step " << step + 1 << "/" << dc.steps << " cyc "
                                          << l.cyc_s + l.cyc_t << " d_s " << l.d_s << " d_t " << l.d_t << "\n";
                                    }
                                  });
  save_dcam(o.out, st);
  echo_config(o.out, cfg);
  return 0;
}

int cmd_translate(const Options& o, std::ostream& out) {
  const DcamState st = load_dcam(o.ckpt);
  const Direction dir = parse_direction(o.direction);
  const Dataset in = read_dataset(o.in);
  const Domain from = dir == Direction::s2t ? Domain::source : Domain::target;
  std::vector<Sample> picked;
  for (const Sample& s : in.samples) {
    if (s.domain == from) picked.push_back(s);
  }
  if (picked.empty()) throw ValidationError(std::string("no ") + domain_name(from) + " samples in " + o.in);
  Dataset res;
  res.num_classes = in.num_classes;
  res.samples = translate_samples(st, picked, dir, std::string(direction_name(dir)) + "-");
  res.provenance = {{"generator", "translate"}, {"direction", direction_name(dir)}, {"dcam_step", st.step}};
  write_dataset(o.out, res);
  out << "translated " << res.samples.size() << " samples\n";
  return 0;
}

Translator inference_translator(const Translator& t, InferenceMode mode) {
  return mode == InferenceMode::direct ? Translator{t.spec, {}} : t;
}

std::string report_text(const EvalReport& r, InferenceMode mode, std::int64_t step) {
  json j = to_json(r);
  j["inference"] = inference_mode_name(mode);
  j["checkpoint_step"] = step;
  return j.dump(2) + "\n";
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const TrainConfig tc = cfg.resolved_train();
  const Dataset d = read_dataset(o.data);
  if (d.num_classes != tc.network.num_classes) {
    throw ConfigError("dataset has " + std::to_string(d.num_classes) + " classes, network expects " +
                      std::to_string(tc.network.num_classes));
  }
  const DomainSplits splits = partition(d);
  const DcamState dcam = load_dcam(o.dcam);
  fs::create_directories(o.out);
  echo_config(o.out, cfg);
  const StreamSet streams = build_streams(tc, splits, dcam);
  FitOptions fo;
  fo.out_dir = fs::path(o.out);
  if (!o.resume.empty()) fo.resume = fs::path(o.resume);
  fo.translator = Translator::from(dcam);
  fo.on_step = [&](const LossReport& r) {
    if ((r.step + 1) % 25 == 0 || r.step == 0) {
      out << "step " << r.step + 1 << "/" << tc.total_steps << " total " << r.total << " seg " << r.seg << " kd "
          << r.kd << " con " << r.con << "\n";
    }
  };
  const FitResult res = fit(tc, streams, fo);
  if (!splits.target_test.empty()) {
    const EvalReport rep = evaluate(tc.network, res.state.student, inference_translator(fo.translator, cfg.eval.inference),
                                    splits.target_test, cfg.eval.asd_cap);
    write_text(fs::path(o.out) / "report.json", report_text(rep, cfg.eval.inference, res.state.step));
    out << "target mean dice " << rep.mean_dice << " mean asd " << rep.mean_asd << "\n";
  }
  return 0;
}

// Accepts a run directory, a checkpoints directory or a checkpoint itself.
fs::path resolve_checkpoint(const fs::path& p) {
  for (const fs::path& root : {p / "checkpoints", p}) {
    std::ifstream latest(root / "latest");
    std::string name;
    if (latest && std::getline(latest, name) && !name.empty()) return root / name;
  }
  if (!fs::exists(p / "manifest.json")) throw ValidationError("--ckpt: no checkpoint found at " + p.string());
  return p;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const fs::path ckpt = resolve_checkpoint(o.ckpt);
  const TrainState st = load_train_state(ckpt);
  const Translator tr = load_translator(ckpt);
  const InferenceMode mode = o.inference.empty() ? InferenceMode::translated : parse_inference_mode(o.inference);
  const DomainSplits splits = partition(read_dataset(o.data));
  if (splits.target_test.empty()) throw ValidationError("dataset has no labeled target test split");
  const EvalReport rep = evaluate(st.cfg.network, st.student, inference_translator(tr, mode), splits.target_test,
                                  o.asd_cap.value_or(100.0));
  write_text(o.out, report_text(rep, mode, st.step));
  out << "mean dice " << rep.mean_dice << " mean asd " << rep.mean_asd << "\n";
  return 0;
}

int cmd_plot(const Options& o, std::ostream& out) {
  if (o.metrics.empty() && o.reports.empty()) throw ValidationError("plot needs --metrics and/or --report");
  fs::create_directories(o.out);
  if (!o.metrics.empty()) {
    write_text(fs::path(o.out) / "loss_curves.svg", loss_curve_svg(read_metrics_log(o.metrics), "Training losses"));
    out << "wrote " << (fs::path(o.out) / "loss_curves.svg").string() << "\n";
  }
  if (!o.reports.empty()) {
    std::vector<std::pair<std::string, EvalReport>> runs;
    for (const std::string& spec : o.reports) {
      const auto eq = spec.find('=');
      const std::string name = eq == std::string::npos ? fs::path(spec).parent_path().filename().string() : spec.substr(0, eq);
      const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
      std::ifstream f(path);
      if (!f) throw ValidationError("cannot open report " + path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
      }
      runs.emplace_back(name.empty() ? path : name, eval_report_from_json(j));
    }
    write_text(fs::path(o.out) / "dice_bars.svg", dice_bars_svg(runs, "Target Dice per class"));
    out << "wrote " << (fs::path(o.out) / "dice_bars.svg").string() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-modality segmentation adaptation with dual mean teachers", "mtuda"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Experiment seed (overrides the config)"); };
  auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "JSON run config")->check(CLI::ExistingFile); };

  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic two-modality dataset");
  add_config(synth);
  synth->add_option("--out", o.out, "Output dataset directory")->required();
  add_seed(synth);

  CLI::App* ingest = app.add_subcommand("ingest", "Convert NIfTI volumes into a slice dataset");
  ingest->add_option("--volumes", o.volumes, "Directory of .nii/.nii.gz volumes (<name>_image / <name>_label)")->required();
  ingest->add_option("--out", o.out, "Output dataset directory")->required();
  ingest->add_option("--roi", o.roi, "Crop size in voxels")->capture_default_str();
  ingest->add_option("--domain", o.domain, "source or target")->capture_default_str();
  ingest->add_option("--split", o.split, "train or test")->capture_default_str();
  ingest->add_option("--labels", o.label_map, "Label mapping: mmwhs, raw or none")->capture_default_str();

  CLI::App* tdcam = app.add_subcommand("train-dcam", "Train the dual cycle alignment module");
  add_config(tdcam);
  tdcam->add_option("--data", o.data, "Dataset directory")->required();
  tdcam->add_option("--out", o.out, "Output checkpoint directory")->required();
  add_seed(tdcam);

  CLI::App* translate_cmd = app.add_subcommand("translate", "Translate a dataset with a trained DCAM");
  translate_cmd->add_option("--ckpt", o.ckpt, "DCAM checkpoint directory")->required();
  translate_cmd->add_option("--direction", o.direction, "s2t or t2s")->required();
  translate_cmd->add_option("--in", o.in, "Input dataset directory")->required();
  translate_cmd->add_option("--out", o.out, "Output dataset directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train the student with both mean teachers");
  add_config(train);
  train->add_option("--data", o.data, "Dataset directory")->required();
  train->add_option("--dcam", o.dcam, "DCAM checkpoint directory")->required();
  train->add_option("--out", o.out, "Run directory")->required();
  train->add_option("--ablation", o.ablation, "full, ns, nt, ns-mse or supervised");
  train->add_option("--resume", o.resume, "Checkpoint directory to resume from");
  add_seed(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained student on the target test split");
  eval->add_option("--ckpt", o.ckpt, "Run directory or checkpoint")->required();
  eval->add_option("--data", o.data, "Dataset directory")->required();
  eval->add_option("--out", o.out, "Report path (JSON)")->required();
  eval->add_option("--inference", o.inference, "translated (default) or direct");
  eval->add_option("--asd-cap", o.asd_cap, "ASD reported when a class is missing");

  CLI::App* plot = app.add_subcommand("plot", "Render loss curves and per-class Dice bars as SVG");
  plot->add_option("--metrics", o.metrics, "metrics.jsonl from a training run");
  plot->add_option("--report", o.reports, "Report to include, as name=path (repeatable)");
  plot->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n";
    const CLI::App* shown = &app;
    for (const CLI::App* sub : app.get_subcommands({})) {
      if (sub->parsed()) shown = sub;
    }
    err << shown->help();
    return 1;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "synth") return cmd_synth(o, out);
    if (name == "ingest") return cmd_ingest(o, out, err);
    if (name == "train-dcam") return cmd_train_dcam(o, out);
    if (name == "translate") return cmd_translate(o, out);
    if (name == "train") return cmd_train(o, out);
    if (name == "eval") return cmd_eval(o, out);
    if (name == "plot") return cmd_plot(o, out);
    err << app.help();
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mtuda
