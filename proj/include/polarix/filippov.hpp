#pragma once

// Interval-box form of the set-valued right-hand side and trajectory checks
// against it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "polarix/dynamics.hpp"
#include "polarix/error.hpp"
#include "polarix/graph.hpp"
#include "polarix/indices.hpp"

namespace polarix {

struct IntervalBox {
  std::vector<double> lo;
  std::vector<double> hi;

  Index size() const noexcept { return lo.size(); }

  bool contains(const std::vector<double>& v, double tol = 0.0) const {
    if (v.size() != lo.size()) return false;
    for (Index i = 0; i < v.size(); ++i)
      if (v[i] < lo[i] - tol || v[i] > hi[i] + tol) return false;
    return true;
  }

  // Distance by which v[i] leaves [lo_i, hi_i]; zero inside.
  double excess(Index i, double v) const { return std::max({0.0, lo[i] - v, v - hi[i]}); }
};

// Pairs closer than eq_tol get the full [-w, w] sign interval.
inline IntervalBox filippov_box(const WeightedDigraph& g, double /*t*/, const StateVector& x,
                                double eq_tol = 0.0) {
  const Index n = g.size();
  if (x.size() != n) throw InputError("state length must equal n");
  if (!(eq_tol >= 0.0)) throw InputError("eq_tol must be nonnegative");
  IntervalBox box{std::vector<double>(n), std::vector<double>(n)};
  for (Index i = 0; i < n; ++i) {
    double lo = -g.disturbance_bound(i);
    double hi = g.disturbance_bound(i);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = g.weight(j, i);
      if (w == 0.0) continue;
      const double gap = x[j] - x[i];
      if (std::abs(gap) <= eq_tol) {
        lo -= w;
        hi += w;
      } else {
        const double s = w * sgn(gap);
        lo += s;
        hi += s;
      }
    }
    box.lo[i] = lo;
    box.hi[i] = hi;
  }
  return box;
}

struct InclusionViolation {
  double t = 0.0;
  std::string what;  // "x3", "dM/dt", ...
  double excess = 0.0;
};

struct InclusionReport {
  bool pass = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  Index samples_checked = 0;
  std::vector<InclusionViolation> violations;

  void record(double t, std::string what, double excess) {
    worst_violation = std::max(worst_violation, excess);
    if (excess > tolerance) {
      pass = false;
      violations.push_back({t, std::move(what), excess});
    }
  }

  void merge(const InclusionReport& other) {
    pass = pass && other.pass;
    worst_violation = std::max(worst_violation, other.worst_violation);
    samples_checked += other.samples_checked;
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
};

inline nlohmann::ordered_json to_json(const InclusionReport& r) {
  nlohmann::ordered_json j;
  j["pass"] = r.pass;
  j["worst_violation"] = r.worst_violation;
  j["tolerance"] = r.tolerance;
  j["samples_checked"] = r.samples_checked;
  j["violation_count"] = r.violations.size();
  auto worst = r.violations;
  std::stable_sort(worst.begin(), worst.end(),
                   [](const auto& a, const auto& b) { return a.excess > b.excess; });
  if (worst.size() > 10) worst.resize(10);
  auto list = nlohmann::ordered_json::array();
  for (const auto& v : worst) list.push_back({{"t", v.t}, {"what", v.what}, {"excess", v.excess}});
  j["worst"] = std::move(list);
  return j;
}

namespace detail {

inline void require_samples(const WeightedDigraph& g, const Trajectory& traj) {
  if (traj.size() < 2) throw InputError("trajectory needs at least 2 samples");
  if (traj.agents() != g.size()) throw InputError("trajectory width must equal n");
}

// Sample k is skipped when its difference stencil [t_{k-1}, t_{k+1}] contains
// a breakpoint (kinks are allowed there).
inline bool straddles(const std::vector<double>& breakpoints, double a, double b) {
  return std::any_of(breakpoints.begin(), breakpoints.end(),
                     [&](double p) { return p >= a && p <= b; });
}

inline double central_difference(const std::vector<double>& t, const std::vector<double>& y, Index k) {
  return (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1]);
}

}  // namespace detail

// Central finite-difference velocity at every interior sample must lie in
// filippov_box(eq_tol) inflated by deriv_tol.
inline InclusionReport check_inclusion(const WeightedDigraph& g, const Trajectory& traj, double eq_tol,
                                       double deriv_tol, const std::vector<double>& breakpoints = {}) {
  detail::require_samples(g, traj);
  const Index n = g.size();
  InclusionReport report;
  report.tolerance = deriv_tol;
  StateVector v(n);
  for (Index k = 1; k + 1 < traj.size(); ++k) {
    const double ta = traj.times[k - 1], tb = traj.times[k + 1];
    if (detail::straddles(breakpoints, ta, tb)) continue;
    for (Index i = 0; i < n; ++i) v[i] = (traj.states[k + 1][i] - traj.states[k - 1][i]) / (tb - ta);
    const auto box = filippov_box(g, traj.times[k], traj.states[k], eq_tol);
    ++report.samples_checked;
    for (Index i = 0; i < n; ++i) {
      const double e = box.excess(i, v[i]);
      if (e > 0.0) report.record(traj.times[k], "x" + std::to_string(i + 1), e);
    }
  }
  return report;
}

// dM/dt <= Au(S_M) and -dm/dt <= Au(S_m) at interior samples, with S_M/S_m
// taken as the nodes within eq_tol of the extreme.
inline InclusionReport extremal_derivative_bounds(const WeightedDigraph& g, const Trajectory& traj,
                                                  double eq_tol = 0.0, double tol = 1e-9,
                                                  const std::vector<double>& breakpoints = {}) {
  detail::require_samples(g, traj);
  if (!(eq_tol >= 0.0)) throw InputError("eq_tol must be nonnegative");
  const Index n = g.size();
  InclusionReport report;
  report.tolerance = tol;
  for (Index k = 1; k + 1 < traj.size(); ++k) {
    if (detail::straddles(breakpoints, traj.times[k - 1], traj.times[k + 1])) continue;
    const auto& x = traj.states[k];
    const double hi = traj.max_state[k], lo = traj.min_state[k];
    std::vector<Index> top, bottom;
    for (Index i = 0; i < n; ++i) {
      if (x[i] >= hi - eq_tol) top.push_back(i);
      if (x[i] <= lo + eq_tol) bottom.push_back(i);
    }
    const double d_max = detail::central_difference(traj.times, traj.max_state, k);
    const double d_min = detail::central_difference(traj.times, traj.min_state, k);
    ++report.samples_checked;
    const double e_top = d_max - autonomy_upper(g, NodeSet(std::move(top)));
    const double e_bottom = -d_min - autonomy_upper(g, NodeSet(std::move(bottom)));
    if (e_top > 0.0) report.record(traj.times[k], "dM/dt", e_top);
    if (e_bottom > 0.0) report.record(traj.times[k], "-dm/dt", e_bottom);
  }
  return report;
}

}  // namespace polarix
