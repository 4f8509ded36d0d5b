#pragma once

// Self-contained SVG line charts of a trajectory, one file per quantity.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cubix/csv.hpp"

namespace cubix {

struct Series {
  std::string label;
  std::vector<double> y;
};

struct Chart {
  std::string file;  // without extension
  std::string title;
  std::string unit;
  std::vector<Series> series;
};

namespace plot_detail {

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

/// Round tick spacing covering [lo, hi] in about five steps.
inline double tick_step(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace plot_detail

inline std::string render_svg(const Chart& c, const std::vector<double>& t, const std::vector<std::pair<double, std::string>>& phases) {
  using namespace plot_detail;
  const double W = 800, H = 420, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : c.series)
    for (double v : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double t0 = t.empty() ? 0.0 : t.front();
  const double t1 = t.empty() || t.back() <= t0 ? t0 + 1.0 : t.back();
  auto X = [&](double v) { return left + (v - t0) / (t1 - t0) * pw; };
  auto Y = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(c.title) << "</text>\n";

  const double ys = tick_step(lo, hi);
  for (double v = std::ceil(lo / ys) * ys; v <= hi; v += ys) {
    o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << num(Y(v)) << "\" y2=\"" << num(Y(v))
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(Y(v) + 4) << "\" text-anchor=\"end\">" << num(std::abs(v) < 1e-12 ? 0.0 : v)
      << "</text>\n";
  }
  const double xs = tick_step(t0, t1);
  for (double v = std::ceil(t0 / xs) * xs; v <= t1 + 1e-9; v += xs) {
    o << "<line x1=\"" << num(X(v)) << "\" x2=\"" << num(X(v)) << "\" y1=\"" << top + ph << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(X(v)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(v) << "</text>\n";
  }
  for (const auto& [at, name] : phases) {
    o << "<line x1=\"" << num(X(at)) << "\" x2=\"" << num(X(at)) << "\" y1=\"" << top << "\" y2=\"" << top + ph
      << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    o << "<text x=\"" << num(X(at) + 4) << "\" y=\"" << top + 12 << "\" fill=\"#555\">" << escape(name) << "</text>\n";
  }
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">time [s]</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << escape(c.unit)
    << "</text>\n";

  // At most ~1500 vertices per line.
  const std::size_t stride = std::max<std::size_t>(1, t.size() / 1500);
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& s = c.series[k];
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[k % 8] << "\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); i += stride) o << num(X(t[i])) << ',' << num(Y(s.y[i])) << ' ';
    if (!s.y.empty()) o << num(X(t[s.y.size() - 1])) << ',' << num(Y(s.y.back()));
    o << "\"/>\n";
    if (c.series.size() > 1) {
      const double lx = left + pw - 70, ly = top + 14 + 15 * static_cast<double>(k);
      o << "<line x1=\"" << lx << "\" x2=\"" << lx + 18 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4 << "\" stroke=\""
        << kPalette[k % 8] << "\" stroke-width=\"2\"/>\n";
      o << "<text x=\"" << lx + 22 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

inline std::vector<Chart> trajectory_charts(const TrajectoryLog& log) {
  auto column = [&](const std::function<double(const LogRow&)>& f) {
    std::vector<double> v;
    v.reserve(log.rows.size());
    for (const auto& r : log.rows) v.push_back(f(r));
    return v;
  };
  std::vector<Chart> charts = {
      {"plot_z", "Base height", "z [m]", {{"z", column([](const LogRow& r) { return r.position.z(); })}}},
      {"plot_xy", "Base horizontal position", "[m]",
       {{"x", column([](const LogRow& r) { return r.position.x(); })},
        {"y", column([](const LogRow& r) { return r.position.y(); })}}},
      {"plot_roll", "Roll", "roll [rad]", {{"roll", column([](const LogRow& r) { return r.attitude.roll; })}}},
      {"plot_pitch", "Pitch", "pitch [rad]", {{"pitch", column([](const LogRow& r) { return r.attitude.pitch; })}}},
      {"plot_yaw", "Yaw", "yaw [rad]", {{"yaw", column([](const LogRow& r) { return r.attitude.yaw; })}}},
  };
  Chart tension{"plot_tension", "Target wire tension", "f_ref [N]", {}};
  Chart length{"plot_length", "Wire length", "l [m]", {}};
  for (int i = 0; i < kMaxWires; ++i) {
    if (!log.wire_present[i]) continue;
    tension.series.push_back({"wire " + std::to_string(i), column([i](const LogRow& r) { return r.f_ref[i]; })});
    length.series.push_back({"wire " + std::to_string(i), column([i](const LogRow& r) { return r.l[i]; })});
  }
  charts.push_back(std::move(tension));
  charts.push_back(std::move(length));
  return charts;
}

/// Writes one SVG per chart into `dir` and returns the file paths.
inline std::vector<std::string> emit_plots(const TrajectoryLog& log, const std::string& dir) {
  if (log.rows.empty()) throw Error("EmptyLog", "cannot plot an empty trajectory");
  std::vector<double> t;
  for (const auto& r : log.rows) t.push_back(r.t);
  std::vector<std::pair<double, std::string>> phases;
  for (std::size_t k = 0; k < log.phase_start.size() && k < log.phase_names.size(); ++k)
    phases.emplace_back(static_cast<double>(log.phase_start[k]) * log.dt, log.phase_names[k]);

  std::vector<std::string> paths;
  for (const auto& c : trajectory_charts(log)) {
    const std::string path = (std::filesystem::path(dir) / (c.file + ".svg")).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("IoError", "cannot open '" + path + "' for writing");
    f << render_svg(c, t, phases);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace cubix
