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
#include "mtuda/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtuda/error.hpp"

namespace mtuda {

std::vector<LossReport> read_metrics_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open metrics log " + path.string());
  std::vector<LossReport> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LossReport r;
      r.step = j.at("step").get<std::int64_t>();
      r.lr = j.at("lr").get<double>();
      r.lambda_kd = j.at("lambda_kd").get<double>();
      r.lambda_con = j.at("lambda_con").get<double>();
      r.seg = j.at("seg").get<double>();
      r.kd = j.at("kd").get<double>();
      r.con = j.at("con").get<double>();
      r.total = j.at("total").get<double>();
      out.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.class_names = j.at("class_order").get<std::vector<std::string>>();
    for (const std::string& c : r.class_names) {
      const auto& e = j.at("per_class").at(c);
      r.dice.push_back(e.at("dice").get<double>());
      r.asd.push_back(e.at("asd").get<double>());
      r.asd_degenerate.push_back(e.at("asd_capped_volumes").get<std::size_t>());
    }
    r.mean_dice = j.at("mean_dice").get<double>();
    r.mean_asd = j.at("mean_asd").get<double>();
    r.volumes = j.at("volumes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double width = 720, height = 420, left = 70, right = 150, top = 40, bottom = 50;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

void open_svg(std::ostringstream& o, const Frame& f, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n"
    << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << num(f.plot_w()) << "\" height=\""
    << num(f.plot_h()) << "\" fill=\"none\" stroke=\"#444\"/>\n";
}

void legend(std::ostringstream& o, const Frame& f, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = f.top + 10 + 20.0 * static_cast<double>(i);
    const double x = f.width - f.right + 15;
    o << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\""
      << kPalette[i % std::size(kPalette)] << "\"/>\n"
      << "<text x=\"" << num(x + 18) << "\" y=\"" << num(y + 10) << "\">" << escape(names[i]) << "</text>\n";
  }
}

void y_ticks(std::ostringstream& o, const Frame& f, double lo, double hi, int n) {
  for (int i = 0; i <= n; ++i) {
    const double v = lo + (hi - lo) * i / n;
    const double y = f.top + f.plot_h() * (1.0 - static_cast<double>(i) / n);
    o << "<line x1=\"" << f.left - 4 << "\" x2=\"" << f.left << "\" y1=\"" << num(y) << "\" y2=\"" << num(y)
      << "\" stroke=\"#444\"/>\n"
      << "<text x=\"" << f.left - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
}

}  // namespace

std::string loss_curve_svg(const std::vector<LossReport>& log, const std::string& title) {
  if (log.empty()) throw ValidationError("loss_curve_svg: empty metrics log");
  const Frame f;
  const std::vector<std::string> names = {"total", "seg", "kd", "con"};
  auto value = [](const LossReport& r, std::size_t k) {
    switch (k) {
      case 0: return r.total;
      case 1: return r.seg;
      case 2: return r.kd;
      default: return r.con;
    }
  };
  double hi = 0.0;
  for (const auto& r : log) {
    for (std::size_t k = 0; k < names.size(); ++k) hi = std::max(hi, value(r, k));
  }
  if (hi <= 0.0) hi = 1.0;
  const double s0 = static_cast<double>(log.front().step), s1 = std::max(s0 + 1.0, static_cast<double>(log.back().step));

  std::ostringstream o;
  open_svg(o, f, title);
  y_ticks(o, f, 0.0, hi, 5);
  for (int i = 0; i <= 5; ++i) {
    const double s = s0 + (s1 - s0) * i / 5;
    const double x = f.left + f.plot_w() * i / 5;
    o << "<text x=\"" << num(x) << "\" y=\"" << num(f.top + f.plot_h() + 18) << "\" text-anchor=\"middle\">"
      << std::llround(s) << "</text>\n";
  }
  o << "<text x=\"" << num(f.left + f.plot_w() / 2) << "\" y=\"" << num(f.height - 10)
    << "\" text-anchor=\"middle\">step</text>\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[k] << "\" points=\"";
    for (const auto& r : log) {
      const double x = f.left + f.plot_w() * (static_cast<double>(r.step) - s0) / (s1 - s0);
      const double y = f.top + f.plot_h() * (1.0 - value(r, k) / hi);
      o << num(x) << "," << num(y) << " ";
    }
    o << "\"/>\n";
  }
  legend(o, f, names);
  o << "</svg>\n";
  return o.str();
}

std::string dice_bars_svg(const std::vector<std::pair<std::string, EvalReport>>& runs, const std::string& title) {
  if (runs.empty()) throw ValidationError("dice_bars_svg: no reports");
  const std::vector<std::string>& classes = runs.front().second.class_names;
  for (const auto& [name, r] : runs) {
    if (r.class_names != classes) throw ValidationError("dice_bars_svg: reports disagree on class order");
  }
  const Frame f;
  std::vector<std::string> groups = classes;
  groups.push_back("Avg");
  std::vector<std::string> names;
  for (const auto& [name, r] : runs) names.push_back(name);

  std::ostringstream o;
  open_svg(o, f, title);
  y_ticks(o, f, 0.0, 100.0, 5);
  o << "<text x=\"16\" y=\"" << num(f.top + f.plot_h() / 2) << "\" transform=\"rotate(-90 16 "
    << num(f.top + f.plot_h() / 2) << ")\" text-anchor=\"middle\">Dice [%]</text>\n";
  const double group_w = f.plot_w() / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(runs.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = f.left + group_w * static_cast<double>(g);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const EvalReport& r = runs[k].second;
      const double v = 100.0 * (g < classes.size() ? r.dice[g] : r.mean_dice);
      const double h = f.plot_h() * std::clamp(v, 0.0, 100.0) / 100.0;
      const double x = gx + group_w * 0.1 + bar_w * static_cast<double>(k);
      o << "<rect x=\"" << num(x) << "\" y=\"" << num(f.top + f.plot_h() - h) << "\" width=\"" << num(bar_w)
        << "\" height=\"" << num(h) << "\" fill=\"" << kPalette[k % std::size(kPalette)] << "\"><title>"
        << escape(names[k]) << " " << escape(groups[g]) << ": " << num(v) << "</title></rect>\n";
    }
    o << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(f.top + f.plot_h() + 18)
      << "\" text-anchor=\"middle\">" << escape(groups[g]) << "</text>\n";
  }
  legend(o, f, names);
  o << "</svg>\n";
  return o.str();
}

}  // namespace mtuda
