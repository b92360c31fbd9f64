#pragma once

// Fixed-step simulation of x_i' = d_i(t, x) + sum_j w_ji sgn(x_j - x_i),
// trajectory diagnostics, and the analytic extremal trajectory whose range
// grows at exactly the polarization index.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polarix/disturbance.hpp"
#include "polarix/error.hpp"
#include "polarix/graph.hpp"
#include "polarix/indices.hpp"

namespace polarix {

// sgn(0) = 0 throughout.
inline void vector_field_into(const WeightedDigraph& g, const DisturbanceSpec& dist, double t,
                              const StateVector& x, StateVector& out) {
  const Index n = g.size();
  eval_disturbance_into(dist, g, t, x, out);
  for (Index i = 0; i < n; ++i) {
    double acc = out[i];
    const double xi = x[i];
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = g.weight(j, i);
      if (w != 0.0) acc += w * sgn(x[j] - xi);
    }
    out[i] = acc;
  }
}

inline StateVector vector_field(const WeightedDigraph& g, const DisturbanceSpec& dist, double t,
                                const StateVector& x) {
  if (x.size() != g.size()) throw InputError("state length must equal n");
  validate_disturbance(dist, g);
  StateVector out;
  vector_field_into(g, dist, t, x, out);
  return out;
}

inline double range_seminorm(const StateVector& x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

enum class Integrator { euler, rk4 };

inline const char* to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk4"; }

struct SimConfig {
  double dt = 1.0 / 1024.0;
  double t_end = 1.0;
  Integrator integrator = Integrator::euler;
  double consensus_tol = 1e-9;
  Index record_stride = 1;
  bool record_disturbance = false;
};

inline void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InputError("dt must be positive");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw InputError("t_end must be nonnegative");
  if (!(cfg.consensus_tol >= 0.0)) throw InputError("consensus_tol must be nonnegative");
  if (cfg.record_stride < 1) throw InputError("record_stride must be >= 1");
}

// Sampled trajectory with per-sample extremal diagnostics. S_M / S_m use
// exact equality with the extreme value.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> max_state;
  std::vector<double> min_state;
  std::vector<double> range;
  std::vector<NodeSet> top_set;
  std::vector<NodeSet> bottom_set;
  std::optional<double> consensus_time;
  std::vector<StateVector> disturbance_trace;  // empty unless recorded

  Index size() const noexcept { return times.size(); }
  Index agents() const noexcept { return states.empty() ? 0 : states.front().size(); }

  void append(double t, StateVector x) {
    const double hi = *std::max_element(x.begin(), x.end());
    const double lo = *std::min_element(x.begin(), x.end());
    std::vector<Index> top, bottom;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] == hi) top.push_back(i);
      if (x[i] == lo) bottom.push_back(i);
    }
    times.push_back(t);
    max_state.push_back(hi);
    min_state.push_back(lo);
    range.push_back(hi - lo);
    top_set.emplace_back(std::move(top));
    bottom_set.emplace_back(std::move(bottom));
    states.push_back(std::move(x));
  }

  // First sample time from which the range stays within tol to the end.
  void detect_consensus(double tol) {
    consensus_time.reset();
    for (Index k = size(); k-- > 0;) {
      if (range[k] > tol) break;
      consensus_time = times[k];
    }
  }
};

inline Index step_count(double t_end, double dt) {
  return static_cast<Index>(std::floor(t_end / dt + 1e-9));
}

// Explicit Euler or classical RK4 on the grid t_k = k * dt, k = 0..N with
// N = floor(t_end / dt).
inline Trajectory simulate(const WeightedDigraph& g, const StateVector& x0, DisturbanceSpec dist,
                           const SimConfig& cfg) {
  validate(cfg);
  const Index n = g.size();
  if (x0.size() != n) throw InputError("initial state length must equal n");
  for (double v : x0)
    if (!std::isfinite(v)) throw InputError("initial state must be finite");
  if (auto* st = std::get_if<Stubborn>(&dist); st && st->x0_snapshot.empty()) st->x0_snapshot = x0;
  validate_disturbance(dist, g);

  const Index steps = step_count(cfg.t_end, cfg.dt);
  const double dt = cfg.dt;
  Trajectory traj;
  StateVector x = x0;
  StateVector k1, k2, k3, k4, tmp, d;

  const auto record = [&](Index k) {
    const double t = static_cast<double>(k) * dt;
    if (cfg.record_disturbance) {
      eval_disturbance_into(dist, g, t, x, d);
      traj.disturbance_trace.push_back(d);
    }
    traj.append(t, x);
  };

  record(0);
  for (Index k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (cfg.integrator == Integrator::euler) {
      vector_field_into(g, dist, t, x, k1);
      for (Index i = 0; i < n; ++i) x[i] += dt * k1[i];
    } else {
      vector_field_into(g, dist, t, x, k1);
      tmp.resize(n);
      for (Index i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
      vector_field_into(g, dist, t + 0.5 * dt, tmp, k2);
      for (Index i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
      vector_field_into(g, dist, t + 0.5 * dt, tmp, k3);
      for (Index i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
      vector_field_into(g, dist, t + dt, tmp, k4);
      for (Index i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (double v : x)
      if (!std::isfinite(v)) throw NumericError("non-finite state", t + dt);
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == steps) record(k + 1);
  }
  traj.detect_consensus(cfg.consensus_tol);
  return traj;
}

// Largest amount by which the range exceeds max{0, range(0) + A t}.
inline double envelope_excess(const Trajectory& traj, double polarization_index) {
  if (traj.size() == 0) return 0.0;
  const double r0 = traj.range.front();
  const double t0 = traj.times.front();
  double worst = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < traj.size(); ++k) {
    const double envelope = std::max(0.0, r0 + polarization_index * (traj.times[k] - t0));
    worst = std::max(worst, traj.range[k] - envelope);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Extremal trajectory

struct ExtremalPlan {
  NodeSet v1;
  NodeSet v2;
  double autonomy_v1 = 0.0;  // V1 rises at this rate
  double autonomy_v2 = 0.0;  // V2 falls at this rate
  double growth_rate = 0.0;  // autonomy_v1 + autonomy_v2
  StateVector initial_state;
  StateVector constant_disturbance;  // zero outside V1 u V2

  // Time at which the two groups meet, or +inf if they never do.
  double collapse_time() const {
    return growth_rate < 0.0 ? 2.0 / -growth_rate : std::numeric_limits<double>::infinity();
  }
};

// V1 starts at 1 and V2 at -1 (everything else at 0). Each group's common
// velocity is split coordinatewise into a part the network can produce and
// a constant disturbance inside [-w_ii, w_ii].
inline ExtremalPlan build_extremal(const WeightedDigraph& g, const NodeSet& v1, const NodeSet& v2) {
  const Index n = g.size();
  if (v1.empty() || v2.empty()) throw InputError("build_extremal: both sets must be nonempty");
  if (v1.intersects(v2)) throw InputError("build_extremal: sets must be disjoint");
  const auto a1 = autonomy(g, v1);
  const auto a2 = autonomy(g, v2);
  if (!a1.is_finite() || !a2.is_finite())
    throw InputError("build_extremal: autonomy index is -infinity on one of the sets");

  ExtremalPlan plan;
  plan.v1 = v1;
  plan.v2 = v2;
  plan.autonomy_v1 = a1.value();
  plan.autonomy_v2 = a2.value();
  plan.growth_rate = plan.autonomy_v1 + plan.autonomy_v2;
  plan.initial_state.assign(n, 0.0);
  plan.constant_disturbance.assign(n, 0.0);

  // Network part on a maximal group V: [-sum_{j != i} w_ji, sum_{j in V, j != i} w_ji - sum_{j not in V} w_ji].
  const auto decompose = [&](const NodeSet& v, double velocity, double orientation) {
    const auto in_v = v.membership(n);
    for (Index i : v) {
      double inside = 0.0, outside = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        (in_v[j] ? inside : outside) += g.weight(j, i);
      }
      const double target = orientation * velocity;  // velocity as seen by a maximal group
      const double network = std::clamp(target, -(inside + outside), inside - outside);
      plan.constant_disturbance[i] = orientation * (target - network);
    }
  };
  for (Index i : v1) plan.initial_state[i] = 1.0;
  for (Index i : v2) plan.initial_state[i] = -1.0;
  decompose(v1, plan.autonomy_v1, 1.0);
  decompose(v2, -plan.autonomy_v2, -1.0);
  return plan;
}

// V1 at 1 + A1 t and V2 at -1 - A2 t until they meet; remaining agents follow
// the protocol (Euler, step dt) with V1/V2 pinned to those lines, clamped into
// the band between them. After the meeting time everything sits at the
// meeting point.
inline Trajectory extremal_trajectory(const WeightedDigraph& g, const ExtremalPlan& plan, double t_end,
                                      double dt = 1.0 / 1024.0) {
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (!(t_end >= 0.0)) throw InputError("t_end must be nonnegative");
  const Index n = g.size();
  const Index steps = step_count(t_end, dt);
  const double collapse = plan.collapse_time();
  const double meet = collapse < std::numeric_limits<double>::infinity()
                          ? (plan.autonomy_v2 - plan.autonomy_v1) / plan.growth_rate
                          : 0.0;
  const auto in_v1 = plan.v1.membership(n);
  const auto in_v2 = plan.v2.membership(n);
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i)
    if (!in_v1[i] && !in_v2[i]) rest.push_back(i);

  const auto upper = [&](double t) { return 1.0 + plan.autonomy_v1 * t; };
  const auto lower = [&](double t) { return -1.0 - plan.autonomy_v2 * t; };

  Trajectory traj;
  StateVector x = plan.initial_state;
  StateVector velocity(n, 0.0);
  for (Index k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= collapse) {
      std::fill(x.begin(), x.end(), meet);
    } else {
      for (Index i = 0; i < n; ++i) {
        if (in_v1[i]) x[i] = upper(t);
        else if (in_v2[i]) x[i] = lower(t);
      }
    }
    traj.append(t, x);
    traj.disturbance_trace.push_back(plan.constant_disturbance);
    if (k == steps || rest.empty() || t >= collapse) continue;

    for (Index i : rest) {
      double acc = 0.0;
      for (Index j = 0; j < n; ++j)
        if (j != i) acc += g.weight(j, i) * sgn(x[j] - x[i]);
      velocity[i] = acc;
    }
    const double t_next = t + dt;
    for (Index i : rest) x[i] = std::clamp(x[i] + dt * velocity[i], lower(t_next), upper(t_next));
  }
  traj.detect_consensus(0.0);
  return traj;
}

// Least-squares slope of the mean state of `nodes` over samples in [t0, t1].
inline double waveform_velocity(const Trajectory& traj, const NodeSet& nodes, double t0, double t1) {
  if (nodes.empty()) throw InputError("waveform_velocity: node set must be nonempty");
  if (nodes.members().back() >= traj.agents()) throw InputError("waveform_velocity: node out of range");
  std::vector<double> ts, ys;
  for (Index k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    if (t < t0 || t > t1) continue;
    double mean = 0.0;
    for (Index i : nodes) mean += traj.states[k][i];
    ts.push_back(t);
    ys.push_back(mean / static_cast<double>(nodes.size()));
  }
  if (ts.size() < 2) throw InputError("waveform_velocity: window holds fewer than 2 samples");
  const double m = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (Index k = 0; k < ts.size(); ++k) {
    tm += ts[k];
    ym += ys[k];
  }
  tm /= m;
  ym /= m;
  double num = 0.0, den = 0.0;
  for (Index k = 0; k < ts.size(); ++k) {
    num += (ts[k] - tm) * (ys[k] - ym);
    den += (ts[k] - tm) * (ts[k] - tm);
  }
  return num / den;
}

}  // namespace polarix
