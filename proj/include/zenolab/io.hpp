// io.hpp - deterministic artifact writers: CSV survival tables, JSON run
// summaries, and self-contained SVG plots. No timestamps, fixed formatting,
// so reruns produce byte-identical files.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zenolab/errors.hpp"
#include "zenolab/series.hpp"

namespace zenolab {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

inline void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw config_error("write failed: " + path);
}

// One time column plus one survival column per series. All series must share
// the exact (bitwise) time grid.
inline std::string survival_csv(const std::vector<SurvivalSeries>& series,
                                const std::vector<std::string>& labels) {
  if (series.empty()) throw contract_error("survival_csv: no series");
  if (labels.size() != series.size())
    throw contract_error("survival_csv: one label per series required");
  for (const SurvivalSeries& s : series)
    if (s.size() != series[0].size())
      throw contract_error("survival_csv: series have differing lengths");
  std::string out = "t";
  for (const std::string& label : labels) out += "," + label;
  out += "\n";
  for (std::size_t i = 0; i < series[0].size(); ++i) {
    const double t = series[0].time(i);
    for (const SurvivalSeries& s : series)
      if (s.time(i) != t) throw contract_error("survival_csv: time grids differ");
    out += detail::g17(t);
    for (const SurvivalSeries& s : series) out += "," + detail::g17(s.value(i));
    out += "\n";
  }
  return out;
}

inline void write_survival_csv(const std::string& path, const std::vector<SurvivalSeries>& series,
                               const std::vector<std::string>& labels) {
  write_text_file(path, survival_csv(series, labels));
}

inline void write_summary_json(const std::string& path, const ordered_json& summary) {
  write_text_file(path, summary.dump(2) + "\n");
}

// Minimal line plot: fixed canvas, survival on [0,1]. With log_y the y axis
// becomes log10(s) down to the smallest positive sample (decade gridlines);
// zero samples are clamped to the axis floor.
inline std::string survival_svg(const std::vector<SurvivalSeries>& series,
                                const std::vector<std::string>& labels, const std::string& title,
                                bool log_y = false) {
  if (series.empty()) throw contract_error("survival_svg: no series");
  if (labels.size() != series.size())
    throw contract_error("survival_svg: one label per series required");
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  const int w = 640, h = 400, ml = 60, mr = 20, mt = 40, mb = 45;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double t_max = 0;
  for (const SurvivalSeries& s : series) t_max = std::max(t_max, s.time(s.size() - 1));
  if (t_max <= 0) t_max = 1;
  int decade_lo = -1;
  if (log_y) {
    double v_min = 1.0;
    for (const SurvivalSeries& s : series)
      for (std::size_t i = 0; i < s.size(); ++i)
        if (s.value(i) > 0) v_min = std::min(v_min, s.value(i));
    decade_lo = std::min(-1, std::max(-16, static_cast<int>(std::floor(std::log10(v_min)))));
  }
  const double v_floor = log_y ? std::pow(10.0, decade_lo) : 0.0;
  auto px = [&](double t) { return ml + t / t_max * pw; };
  auto py = [&](double v) {
    if (!log_y) return mt + (1.0 - v) * ph;
    return mt + std::log10(std::max(v, v_floor)) / decade_lo * ph;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(w / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title +
         "</text>\n";
  std::vector<std::pair<double, std::string>> y_ticks;
  if (log_y) {
    const int stride = std::max(1, (-decade_lo + 5) / 6);
    for (int k = 0; k >= decade_lo; k -= stride)
      y_ticks.push_back({std::pow(10.0, k), k == 0 ? "1" : "1e" + std::to_string(k)});
  } else {
    for (int k = 0; k <= 4; ++k) y_ticks.push_back({k / 4.0, detail::g6(k / 4.0)});
  }
  for (const auto& [v, y_label] : y_ticks) {
    svg += "<line x1=\"" + detail::g6(ml) + "\" y1=\"" + detail::g6(py(v)) + "\" x2=\"" +
           detail::g6(w - mr) + "\" y2=\"" + detail::g6(py(v)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::g6(ml - 8) + "\" y=\"" + detail::g6(py(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + y_label +
           "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double t = t_max * k / 4.0;
    svg += "<line x1=\"" + detail::g6(px(t)) + "\" y1=\"" + detail::g6(mt) + "\" x2=\"" +
           detail::g6(px(t)) + "\" y2=\"" + detail::g6(h - mb) +
           "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::g6(px(t)) + "\" y=\"" + detail::g6(h - mb + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + detail::g6(t) +
           "</text>\n";
  }
  svg += "<rect x=\"" + detail::g6(ml) + "\" y=\"" + detail::g6(mt) + "\" width=\"" + detail::g6(pw) +
         "\" height=\"" + detail::g6(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"" + std::to_string(h - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";
  svg += "<text x=\"16\" y=\"" + std::to_string(mt + static_cast<int>(ph / 2)) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
         "16 " +
         std::to_string(mt + static_cast<int>(ph / 2)) + ")\">s(t)</text>\n";
  for (std::size_t n = 0; n < series.size(); ++n) {
    const char* color = kPalette[n % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string pts;
    for (std::size_t i = 0; i < series[n].size(); ++i) {
      if (!pts.empty()) pts += " ";
      pts += detail::g6(px(series[n].time(i))) + "," + detail::g6(py(series[n].value(i)));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    const double ly = mt + 16 + 16 * static_cast<double>(n);
    svg += "<line x1=\"" + detail::g6(ml + pw - 150) + "\" y1=\"" + detail::g6(ly - 4) + "\" x2=\"" +
           detail::g6(ml + pw - 130) + "\" y2=\"" + detail::g6(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::g6(ml + pw - 124) + "\" y=\"" + detail::g6(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + labels[n] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_survival_svg(const std::string& path, const std::vector<SurvivalSeries>& series,
                               const std::vector<std::string>& labels, const std::string& title,
                               bool log_y = false) {
  write_text_file(path, survival_svg(series, labels, title, log_y));
}

}  // namespace zenolab
