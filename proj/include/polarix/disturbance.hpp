#pragma once

// Disturbance models d(t, x). Every model respects |d_i| <= w_ii.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "polarix/error.hpp"
#include "polarix/graph.hpp"

namespace polarix {

using StateVector = std::vector<double>;

inline int sgn(double v) noexcept { return (v > 0.0) - (v < 0.0); }

struct ZeroDisturbance {};

// State-independent random signal: piecewise-constant white noise, a few
// low-frequency harmonics and Poisson impulses, clamped to [-w_ii, w_ii].
// Amplitudes are fractions of w_ii. The signal is a pure function of
// (seed, agent, t), so repeated runs and RK4 stages see the same values.
struct BoundedNoise {
  std::uint64_t seed = 0;
  double white_amplitude = 0.5;
  double white_interval = 1.0 / 1024.0;  // seconds per white-noise sample
  double harmonic_amplitude = 0.3;       // total over all harmonics
  int harmonics = 2;
  double min_period = 1.0;
  double max_period = 5.0;
  double impulse_rate = 0.5;   // mean impulses per second
  double impulse_height = 1.0;  // maximal impulse height
  double impulse_width = 0.05;  // seconds, at most 1
};

// Pushes agents near the maximum up and agents near the minimum down.
struct WorstCase {
  double margin = 0.01;
};

// Each agent pulls toward its own initial opinion with strength w_ii.
// An empty snapshot is filled with x0 by simulate().
struct Stubborn {
  StateVector x0_snapshot;
};

struct FixedSource {
  double opinion = 0.0;
  double weight = 0.0;
};

// Per-agent fixed external opinions; the total weight on agent i must not
// exceed w_ii. An empty outer list means no sources at all.
struct FixedSources {
  std::vector<std::vector<FixedSource>> per_agent;
};

using DisturbanceSpec = std::variant<ZeroDisturbance, BoundedNoise, WorstCase, Stubborn, FixedSources>;

inline const char* disturbance_name(const DisturbanceSpec& d) {
  struct {
    const char* operator()(const ZeroDisturbance&) const { return "zero"; }
    const char* operator()(const BoundedNoise&) const { return "bounded_noise"; }
    const char* operator()(const WorstCase&) const { return "worst_case"; }
    const char* operator()(const Stubborn&) const { return "stubborn"; }
    const char* operator()(const FixedSources&) const { return "fixed_sources"; }
  } visitor;
  return std::visit(visitor, d);
}

inline void validate_disturbance(const DisturbanceSpec& spec, const WeightedDigraph& g) {
  const Index n = g.size();
  if (const auto* noise = std::get_if<BoundedNoise>(&spec)) {
    if (!(noise->white_amplitude >= 0.0) || !(noise->harmonic_amplitude >= 0.0) ||
        !(noise->impulse_height >= 0.0) || !(noise->impulse_rate >= 0.0))
      throw InputError("bounded_noise: amplitudes and rates must be nonnegative");
    if (!(noise->white_interval > 0.0)) throw InputError("bounded_noise: white_interval must be positive");
    if (noise->harmonics < 0) throw InputError("bounded_noise: harmonics must be nonnegative");
    if (!(noise->min_period > 0.0) || noise->max_period < noise->min_period)
      throw InputError("bounded_noise: need 0 < min_period <= max_period");
    if (!(noise->impulse_width > 0.0 && noise->impulse_width <= 1.0))
      throw InputError("bounded_noise: impulse_width must lie in (0, 1]");
  } else if (const auto* wc = std::get_if<WorstCase>(&spec)) {
    if (!(wc->margin >= 0.0)) throw InputError("worst_case: margin must be nonnegative");
  } else if (const auto* st = std::get_if<Stubborn>(&spec)) {
    if (!st->x0_snapshot.empty() && st->x0_snapshot.size() != n)
      throw InputError("stubborn: snapshot length must equal n");
  } else if (const auto* fs = std::get_if<FixedSources>(&spec)) {
    if (!fs->per_agent.empty() && fs->per_agent.size() != n)
      throw InputError("fixed_sources: need one source list per agent");
    for (Index i = 0; i < fs->per_agent.size(); ++i) {
      double total = 0.0;
      for (const auto& src : fs->per_agent[i]) {
        if (!std::isfinite(src.opinion) || !std::isfinite(src.weight) || src.weight < 0.0)
          throw InputError("fixed_sources: opinions must be finite and weights nonnegative");
        total += src.weight;
      }
      if (total > g.disturbance_bound(i))
        throw InputError("fixed_sources: total source weight on agent " + std::to_string(i + 1) +
                         " exceeds its disturbance bound");
    }
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform draw in [0, 1).
inline double unit_draw(std::uint64_t seed, std::uint64_t agent, std::uint64_t stream,
                        std::uint64_t counter) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ agent);
  h = splitmix64(h ^ (stream * 0x100000001b3ULL));
  h = splitmix64(h ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint64_t cell_index(double t, double width) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(t / width)));
}

inline double impulses_in_cell(const BoundedNoise& p, Index agent, std::int64_t cell, double t, double bound) {
  if (cell < 0 || p.impulse_rate <= 0.0) return 0.0;
  const auto c = static_cast<std::uint64_t>(cell);
  // Poisson count by inverse transform, capped.
  double prob = std::exp(-p.impulse_rate);
  double cdf = prob;
  const double u = unit_draw(p.seed, agent, 3, c);
  int count = 0;
  while (u > cdf && count < 64) {
    ++count;
    prob *= p.impulse_rate / count;
    cdf += prob;
  }
  double total = 0.0;
  for (int q = 0; q < count; ++q) {
    const std::uint64_t key = c * 64 + static_cast<std::uint64_t>(q);
    const double start = static_cast<double>(cell) + unit_draw(p.seed, agent, 4, key);
    if (t < start || t >= start + p.impulse_width) continue;
    const double height = p.impulse_height * bound * unit_draw(p.seed, agent, 5, key);
    total += unit_draw(p.seed, agent, 6, key) < 0.5 ? -height : height;
  }
  return total;
}

inline double noise_value(const BoundedNoise& p, Index agent, double t, double bound) {
  if (bound <= 0.0) return 0.0;
  double value = p.white_amplitude * bound *
                 (2.0 * unit_draw(p.seed, agent, 0, cell_index(t, p.white_interval)) - 1.0);
  if (p.harmonics > 0) {
    const double amp = p.harmonic_amplitude * bound / p.harmonics;
    for (int h = 0; h < p.harmonics; ++h) {
      const auto key = static_cast<std::uint64_t>(h);
      const double period = p.min_period + (p.max_period - p.min_period) * unit_draw(p.seed, agent, 1, key);
      const double phase = 2.0 * std::numbers::pi * unit_draw(p.seed, agent, 2, key);
      value += amp * std::sin(2.0 * std::numbers::pi * t / period + phase);
    }
  }
  const auto cell = static_cast<std::int64_t>(std::floor(t));
  value += impulses_in_cell(p, agent, cell, t, bound) + impulses_in_cell(p, agent, cell - 1, t, bound);
  return std::clamp(value, -bound, bound);
}

}  // namespace detail

// Writes d(t, x) into `out` (resized to n).
inline void eval_disturbance_into(const DisturbanceSpec& spec, const WeightedDigraph& g, double t,
                                  const StateVector& x, StateVector& out) {
  const Index n = g.size();
  out.assign(n, 0.0);
  if (const auto* noise = std::get_if<BoundedNoise>(&spec)) {
    for (Index i = 0; i < n; ++i) out[i] = detail::noise_value(*noise, i, t, g.disturbance_bound(i));
  } else if (const auto* wc = std::get_if<WorstCase>(&spec)) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double top = *hi - wc->margin;
    const double bottom = *lo + wc->margin;
    for (Index i = 0; i < n; ++i) {
      const double w = g.disturbance_bound(i);
      if (x[i] >= top) out[i] = w;
      else if (x[i] <= bottom) out[i] = -w;
    }
  } else if (const auto* st = std::get_if<Stubborn>(&spec)) {
    if (st->x0_snapshot.size() != n) throw InputError("stubborn: snapshot length must equal n");
    for (Index i = 0; i < n; ++i) out[i] = g.disturbance_bound(i) * sgn(st->x0_snapshot[i] - x[i]);
  } else if (const auto* fs = std::get_if<FixedSources>(&spec)) {
    for (Index i = 0; i < fs->per_agent.size(); ++i)
      for (const auto& src : fs->per_agent[i]) out[i] += src.weight * sgn(src.opinion - x[i]);
  }
}

inline StateVector eval_disturbance(const DisturbanceSpec& spec, const WeightedDigraph& g, double t,
                                    const StateVector& x) {
  if (x.size() != g.size()) throw InputError("state length must equal n");
  validate_disturbance(spec, g);
  StateVector out;
  eval_disturbance_into(spec, g, t, x, out);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const DisturbanceSpec& spec) {
  nlohmann::ordered_json j;
  j["type"] = disturbance_name(spec);
  if (const auto* p = std::get_if<BoundedNoise>(&spec)) {
    j["seed"] = p->seed;
    j["white_amplitude"] = p->white_amplitude;
    j["white_interval"] = p->white_interval;
    j["harmonic_amplitude"] = p->harmonic_amplitude;
    j["harmonics"] = p->harmonics;
    j["min_period"] = p->min_period;
    j["max_period"] = p->max_period;
    j["impulse_rate"] = p->impulse_rate;
    j["impulse_height"] = p->impulse_height;
    j["impulse_width"] = p->impulse_width;
  } else if (const auto* wc = std::get_if<WorstCase>(&spec)) {
    j["margin"] = wc->margin;
  } else if (const auto* st = std::get_if<Stubborn>(&spec)) {
    if (!st->x0_snapshot.empty()) j["x0_snapshot"] = st->x0_snapshot;
  } else if (const auto* fs = std::get_if<FixedSources>(&spec)) {
    auto agents = nlohmann::ordered_json::array();
    for (const auto& list : fs->per_agent) {
      auto sources = nlohmann::ordered_json::array();
      for (const auto& s : list) sources.push_back({s.opinion, s.weight});
      agents.push_back(std::move(sources));
    }
    j["sources"] = std::move(agents);
  }
  return j;
}

inline DisturbanceSpec disturbance_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw InputError("disturbance needs a string field \"type\"");
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "zero") return ZeroDisturbance{};
    if (type == "bounded_noise") {
      BoundedNoise p;
      p.seed = j.value("seed", p.seed);
      p.white_amplitude = j.value("white_amplitude", p.white_amplitude);
      p.white_interval = j.value("white_interval", p.white_interval);
      p.harmonic_amplitude = j.value("harmonic_amplitude", p.harmonic_amplitude);
      p.harmonics = j.value("harmonics", p.harmonics);
      p.min_period = j.value("min_period", p.min_period);
      p.max_period = j.value("max_period", p.max_period);
      p.impulse_rate = j.value("impulse_rate", p.impulse_rate);
      p.impulse_height = j.value("impulse_height", p.impulse_height);
      p.impulse_width = j.value("impulse_width", p.impulse_width);
      return p;
    }
    if (type == "worst_case") return WorstCase{j.value("margin", 0.01)};
    if (type == "stubborn") {
      Stubborn s;
      if (j.contains("x0_snapshot")) s.x0_snapshot = j["x0_snapshot"].get<StateVector>();
      return s;
    }
    if (type == "fixed_sources") {
      FixedSources fs;
      for (const auto& list : j.at("sources")) {
        std::vector<FixedSource> sources;
        for (const auto& s : list) {
          if (!s.is_array() || s.size() != 2) throw InputError("fixed source must be [opinion, weight]");
          sources.push_back({s[0].get<double>(), s[1].get<double>()});
        }
        fs.per_agent.push_back(std::move(sources));
      }
      return fs;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad disturbance field: " + std::string(e.what()));
  }
  throw InputError("unknown disturbance type '" + type + "'");
}

}  // namespace polarix
