#pragma once

// Trajectory CSV, scenario presets and a small SVG line plotter.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "polarix/disturbance.hpp"
#include "polarix/dynamics.hpp"
#include "polarix/error.hpp"
#include "polarix/graph.hpp"

namespace polarix {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// CSV: t,x1..xn,M,m,D[,d1..dn]

inline std::string trajectory_to_csv(const Trajectory& traj) {
  const Index n = traj.agents();
  const bool with_d = !traj.disturbance_trace.empty();
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t";
  for (Index i = 1; i <= n; ++i) out << ",x" << i;
  out << ",M,m,D";
  if (with_d)
    for (Index i = 1; i <= n; ++i) out << ",d" << i;
  out << '\n';
  for (Index k = 0; k < traj.size(); ++k) {
    out << traj.times[k];
    for (double v : traj.states[k]) out << ',' << v;
    out << ',' << traj.max_state[k] << ',' << traj.min_state[k] << ',' << traj.range[k];
    if (with_d)
      for (double v : traj.disturbance_trace[k]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_cell(const std::string& s, Index row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("csv row " + std::to_string(row) + ": not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw InputError("csv row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

// Parses the CSV layout above. M/m/D columns are recomputed from the states;
// the stored values are ignored.
inline Trajectory trajectory_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw InputError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 5 || header[0] != "t") throw InputError("csv: header must start with t,x1");
  Index n = 0;
  while (1 + n < header.size() && header[1 + n] == "x" + std::to_string(n + 1)) ++n;
  if (n < 2) throw InputError("csv: need at least x1,x2");
  if (header.size() < 4 + n || header[1 + n] != "M" || header[2 + n] != "m" || header[3 + n] != "D")
    throw InputError("csv: expected M,m,D after the state columns");
  const Index extra = header.size() - (4 + n);
  if (extra != 0 && extra != n) throw InputError("csv: disturbance columns must be d1..dn");
  for (Index i = 0; i < extra; ++i)
    if (header[4 + n + i] != "d" + std::to_string(i + 1)) throw InputError("csv: bad disturbance header");

  Trajectory traj;
  Index row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw InputError("csv row " + std::to_string(row) + ": wrong number of columns");
    const double t = detail::parse_cell(cells[0], row);
    if (!traj.times.empty() && !(t > traj.times.back()))
      throw InputError("csv row " + std::to_string(row) + ": times must increase");
    StateVector x(n);
    for (Index i = 0; i < n; ++i) x[i] = detail::parse_cell(cells[1 + i], row);
    if (extra) {
      StateVector d(n);
      for (Index i = 0; i < n; ++i) d[i] = detail::parse_cell(cells[4 + n + i], row);
      traj.disturbance_trace.push_back(std::move(d));
    }
    traj.append(t, std::move(x));
  }
  if (traj.size() == 0) throw InputError("csv: no data rows");
  traj.detect_consensus(0.0);
  return traj;
}

// ---------------------------------------------------------------------------
// Scenario presets

struct ScenarioPreset {
  std::string label;
  WeightedDigraph graph = WeightedDigraph::zero(2);
  StateVector x0;
  DisturbanceSpec disturbance = ZeroDisturbance{};
  SimConfig config;
  // When set, the scenario is the extremal construction on (v1, v2) instead
  // of a simulation; empty sets mean "use the exhaustive witness".
  std::optional<std::pair<NodeSet, NodeSet>> extremal;
};

inline nlohmann::ordered_json to_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"t_end", c.t_end},
          {"integrator", to_string(c.integrator)},
          {"consensus_tol", c.consensus_tol},
          {"record_stride", c.record_stride},
          {"record_disturbance", c.record_disturbance}};
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config must be an object");
  SimConfig c;
  try {
    c.dt = j.value("dt", c.dt);
    c.t_end = j.value("t_end", c.t_end);
    c.consensus_tol = j.value("consensus_tol", c.consensus_tol);
    c.record_stride = j.value("record_stride", c.record_stride);
    c.record_disturbance = j.value("record_disturbance", c.record_disturbance);
    const std::string integ = j.value("integrator", std::string("euler"));
    if (integ == "euler") c.integrator = Integrator::euler;
    else if (integ == "rk4") c.integrator = Integrator::rk4;
    else throw InputError("unknown integrator '" + integ + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ScenarioPreset preset_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("preset must be a JSON object");
  for (const char* key : {"graph", "x0"})
    if (!j.contains(key)) throw InputError(std::string("preset: missing '") + key + "'");
  ScenarioPreset p;
  p.label = j.value("label", std::string());
  p.graph = graph_from_json(j.at("graph"));
  const Index n = p.graph.size();
  if (!j.at("x0").is_array()) throw InputError("preset: x0 must be an array");
  for (const auto& v : j.at("x0")) {
    if (!v.is_number()) throw InputError("preset: x0 entries must be numbers");
    p.x0.push_back(v.get<double>());
  }
  if (p.x0.size() != n) throw InputError("preset: x0 length must equal n");
  if (j.contains("disturbance")) p.disturbance = disturbance_from_json(j.at("disturbance"));
  validate_disturbance(p.disturbance, p.graph);
  if (j.contains("config")) p.config = sim_config_from_json(j.at("config"));
  if (j.contains("extremal")) {
    const auto& e = j.at("extremal");
    const auto ids = [&](const char* key) {
      if (!e.contains(key) || !e.at(key).is_array()) throw InputError("preset: extremal needs v1 and v2");
      std::vector<std::int64_t> v;
      for (const auto& x : e.at(key)) {
        if (!x.is_number_integer()) throw InputError("preset: extremal ids must be integers");
        v.push_back(x.get<std::int64_t>());
      }
      return NodeSet::from_one_based(v, n);
    };
    if (e.is_boolean()) {
      if (e.get<bool>()) p.extremal.emplace();
    } else if (e.is_object()) {
      p.extremal.emplace(ids("v1"), ids("v2"));
    } else {
      throw InputError("preset: extremal must be true or {v1, v2}");
    }
  }
  return p;
}

inline ScenarioPreset load_preset(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return preset_from_json(j);
}

// ---------------------------------------------------------------------------
// SVG

struct PlotOptions {
  std::string title;
  std::optional<double> envelope_rate;  // draws max{0, D0 + rate t} around the midpoint
};

inline std::string trajectory_to_svg(const Trajectory& traj, const PlotOptions& opt = {}) {
  constexpr double width = 1200, height = 600, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  const double t0 = traj.size() ? traj.times.front() : 0.0;
  const double t1 = traj.size() ? traj.times.back() : 1.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Index k = 0; k < traj.size(); ++k) {
    lo = std::min(lo, traj.min_state[k]);
    hi = std::max(hi, traj.max_state[k]);
  }
  if (!std::isfinite(lo)) lo = -1, hi = 1;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double span_t = t1 > t0 ? t1 - t0 : 1.0;
  const auto px = [&](double t) { return left + (t - t0) / span_t * pw; };
  const auto py = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  // Subsample long runs to at most ~2000 vertices per line.
  const Index stride = std::max<Index>(1, traj.size() / 2000);
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1200\" height=\"600\" viewBox=\"0 0 1200 600\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = t0 + span_t * k / 5.0, v = lo + (hi - lo) * k / 5.0;
    s << "<text x=\"" << px(t) << "\" y=\"" << height - bottom + 20
      << "\" font-size=\"12\" text-anchor=\"middle\">" << std::setprecision(3) << t << "</text>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(v) + 4
      << "\" font-size=\"12\" text-anchor=\"end\">" << v << "</text>\n";
    s << std::setprecision(2);
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
    << "\" font-size=\"13\" text-anchor=\"middle\">t</text>\n";
  if (!opt.title.empty())
    s << "<text x=\"" << left + pw / 2 << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
      << opt.title << "</text>\n";

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const auto polyline = [&](auto value, const char* color, const char* extra) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\"" << extra
      << " points=\"";
    for (Index k = 0; k < traj.size(); k += stride) s << px(traj.times[k]) << ',' << py(value(k)) << ' ';
    if (traj.size() && (traj.size() - 1) % stride != 0)
      s << px(traj.times.back()) << ',' << py(value(traj.size() - 1));
    s << "\"/>\n";
  };
  for (Index i = 0; i < traj.agents(); ++i)
    polyline([&](Index k) { return traj.states[k][i]; }, palette[i % 10], "");

  if (opt.envelope_rate && traj.size()) {
    // Band of half-width envelope/2 centred on the initial midpoint.
    const double d0 = traj.range.front();
    const double mid = 0.5 * (traj.max_state.front() + traj.min_state.front());
    const auto env = [&](Index k) { return std::max(0.0, d0 + *opt.envelope_rate * (traj.times[k] - t0)); };
    polyline([&](Index k) { return mid + 0.5 * env(k); }, "#000", " stroke-dasharray=\"6,4\"");
    polyline([&](Index k) { return mid - 0.5 * env(k); }, "#000", " stroke-dasharray=\"6,4\"");
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace polarix
