#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "polarix.hpp"

using namespace polarix;

namespace {

WeightedDigraph triad() { return WeightedDigraph(3, {0, 2, 0, 3, 0, 1, 1, 0, 0}); }
WeightedDigraph mutual_pair() { return WeightedDigraph(2, {0, 1, 1, 0}); }
constexpr double kDt = 1.0 / 1024.0;

}  // namespace

TEST(Disturbance, WorstCase) {
  const WeightedDigraph g(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(eval_disturbance(WorstCase{}, g, 0.0, {0, 5, 10}), (StateVector{-1, 0, 1}));
  // everyone within the margin of the maximum: all pushed up
  EXPECT_EQ(eval_disturbance(WorstCase{}, g, 0.0, {1, 1, 1}), (StateVector{1, 1, 1}));
}

TEST(Disturbance, StubbornAtSnapshotIsZero) {
  const WeightedDigraph g(2, {2, 0, 0, 3});
  const StateVector x0{0.3, -1.2};
  EXPECT_EQ(eval_disturbance(Stubborn{x0}, g, 0.0, x0), (StateVector{0, 0}));
  EXPECT_EQ(eval_disturbance(Stubborn{x0}, g, 0.0, {1.0, -2.0}), (StateVector{-2, 3}));
}

TEST(Disturbance, FixedSources) {
  const WeightedDigraph g(2, {1, 0, 0, 0});
  FixedSources f;
  f.per_agent = {{{10.0, 0.5}}, {}};
  EXPECT_EQ(eval_disturbance(f, g, 0.0, {3.0, 0.0}), (StateVector{0.5, 0.0}));
  f.per_agent = {{{10.0, 0.7}, {-1.0, 0.7}}, {}};
  EXPECT_THROW(eval_disturbance(f, g, 0.0, {3.0, 0.0}), InputError);
}

TEST(Disturbance, BoundedNoiseRespectsBoundAndIsDeterministic) {
  gen::Rng r(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 6), 9, true);
    BoundedNoise b;
    b.seed = r.eng();
    const auto x = gen::state(r, g.size());
    double energy = 0;
    for (int k = 0; k < 2000; ++k) {
      const double t = k * 0.0037;
      const auto d = eval_disturbance(b, g, t, x);
      EXPECT_EQ(d, eval_disturbance(b, g, t, x));
      for (Index i = 0; i < g.size(); ++i) {
        EXPECT_LE(std::abs(d[i]), g.disturbance_bound(i));
        energy += std::abs(d[i]);
      }
    }
    if (g.max_disturbance_bound() > 0) { EXPECT_GT(energy, 0.0); }
  }
}

TEST(Disturbance, AllModelsBounded) {
  gen::Rng r(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 7), 9, true);
    const auto x0 = gen::state(r, g.size());
    const auto dist = gen::disturbance(r, g, trial, x0);
    const auto x = gen::state(r, g.size());
    const auto d = eval_disturbance(dist, g, r.real(0, 5), x);
    for (Index i = 0; i < g.size(); ++i) EXPECT_LE(std::abs(d[i]), g.disturbance_bound(i) + 1e-12);
  }
}

TEST(Disturbance, JsonRoundTrip) {
  gen::Rng r(43);
  for (int kind = 0; kind < 5; ++kind) {
    const auto g = gen::graph(r, 4, 9, true);
    const auto dist = gen::disturbance(r, g, kind, gen::state(r, 4));
    const auto back = disturbance_from_json(to_json(dist));
    EXPECT_EQ(to_json(back).dump(), to_json(dist).dump());
    EXPECT_EQ(disturbance_name(back), disturbance_name(dist));
  }
  EXPECT_THROW(disturbance_from_json(nlohmann::json{{"type", "mystery"}}), InputError);
}

TEST(Dynamics, VectorFieldExamples) {
  EXPECT_EQ(vector_field(triad(), ZeroDisturbance{}, 0, {0, 1, 2}), (StateVector{4, -2, -1}));
  EXPECT_EQ(vector_field(triad(), ZeroDisturbance{}, 0, {7, 7, 7}), (StateVector{0, 0, 0}));
  EXPECT_EQ(vector_field(mutual_pair(), ZeroDisturbance{}, 0, {0, 1}), (StateVector{1, -1}));
  EXPECT_THROW(vector_field(mutual_pair(), ZeroDisturbance{}, 0, {0, 1, 2}), InputError);
}

TEST(Dynamics, RangeSeminorm) {
  EXPECT_EQ(range_seminorm({0, 1, 2}), 2.0);
  EXPECT_EQ(range_seminorm({3, 3, 3}), 0.0);
  EXPECT_EQ(range_seminorm({-1, 1}), 2.0);
}

TEST(Dynamics, TwoNodeMeetingTime) {
  SimConfig cfg;
  cfg.t_end = 1.0;
  const auto tr = simulate(mutual_pair(), {0, 1}, ZeroDisturbance{}, cfg);
  ASSERT_TRUE(tr.consensus_time.has_value());
  EXPECT_NEAR(*tr.consensus_time, 0.5, kDt);
  EXPECT_EQ(tr.size(), 1025u);
  EXPECT_EQ(tr.times.back(), 1.0);
}

TEST(Dynamics, ZeroGraphIsFlat) {
  SimConfig cfg;
  cfg.t_end = 0.5;
  const StateVector x0{1.5, -2.0, 0.25};
  const auto tr = simulate(WeightedDigraph::zero(3), x0, ZeroDisturbance{}, cfg);
  for (const auto& x : tr.states) EXPECT_EQ(x, x0);
  for (double d : tr.range) EXPECT_EQ(d, 3.5);
  EXPECT_FALSE(tr.consensus_time.has_value());
}

TEST(Dynamics, TriadEnvelope) {
  SimConfig cfg;
  cfg.t_end = 5.0;
  const auto g = triad();
  const auto tr = simulate(g, {0, 1, 2}, ZeroDisturbance{}, cfg);
  const double c = 4 * (g.max_in_strength() + g.max_disturbance_bound());
  EXPECT_LE(envelope_excess(tr, 1.0), c * cfg.dt);
}

TEST(Dynamics, RecordStrideKeepsLastSample) {
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.record_stride = 100;
  cfg.record_disturbance = true;
  const auto tr = simulate(mutual_pair(), {0, 1}, ZeroDisturbance{}, cfg);
  EXPECT_EQ(tr.times.back(), 1.0);
  EXPECT_EQ(tr.size(), 1024u / 100 + 2);
  EXPECT_EQ(tr.disturbance_trace.size(), tr.size());
}

TEST(Dynamics, Rk4Runs) {
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.integrator = Integrator::rk4;
  const auto tr = simulate(mutual_pair(), {0, 1}, ZeroDisturbance{}, cfg);
  EXPECT_LE(tr.range.back(), 4 * kDt);
}

TEST(Dynamics, SimulateValidates) {
  SimConfig cfg;
  cfg.dt = 0;
  EXPECT_THROW(simulate(mutual_pair(), {0, 1}, ZeroDisturbance{}, cfg), InputError);
  cfg = {};
  EXPECT_THROW(simulate(mutual_pair(), {0}, ZeroDisturbance{}, cfg), InputError);
  EXPECT_THROW(simulate(mutual_pair(), {0, NAN}, ZeroDisturbance{}, cfg), InputError);
}

TEST(Dynamics, BlowUpReportsTime) {
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 1e300;
  cfg.t_end = 3e300;
  const WeightedDigraph g(2, {0, 1e300, 1e300, 0});
  try {
    simulate(g, {0, 1}, ZeroDisturbance{}, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.time(), 0.0);
  }
}

TEST(Dynamics, ExtremalTriad) {
  const auto g = triad();
  const auto plan = build_extremal(g, NodeSet{0, 1}, NodeSet{2});
  EXPECT_EQ(plan.growth_rate, 1.0);
  EXPECT_EQ(plan.initial_state, (StateVector{1, 1, -1}));
  EXPECT_EQ(plan.autonomy_v1, 2.0);
  EXPECT_EQ(plan.autonomy_v2, -1.0);
  EXPECT_EQ(plan.constant_disturbance, (StateVector{0, 0, 0}));
  const auto tr = extremal_trajectory(g, plan, 3.0);
  for (Index k = 0; k < tr.size(); ++k) EXPECT_EQ(tr.range[k], 2.0 + tr.times[k]);
  EXPECT_NEAR(waveform_velocity(tr, NodeSet{0, 1}, 0.5, 2.5), 2.0, 1e-12);
  EXPECT_NEAR(waveform_velocity(tr, NodeSet{2}, 0.0, 3.0), 1.0, 1e-12);
}

TEST(Dynamics, ExtremalSymmetricPair) {
  const auto plan = build_extremal(mutual_pair(), NodeSet{0}, NodeSet{1});
  EXPECT_EQ(plan.growth_rate, -2.0);
  EXPECT_EQ(plan.collapse_time(), 1.0);
  const auto tr = extremal_trajectory(mutual_pair(), plan, 3.0);
  for (Index k = 0; k < tr.size(); ++k)
    EXPECT_NEAR(tr.range[k], std::max(0.0, 2.0 - 2.0 * tr.times[k]), 1e-12);
  EXPECT_EQ(tr.range.back(), 0.0);
}

TEST(Dynamics, ExtremalRejectsBadSets) {
  std::vector<double> w(9, 0.0);
  w[2 * 3 + 0] = 10;
  const WeightedDigraph h(3, w);
  EXPECT_THROW(build_extremal(h, NodeSet{0, 1}, NodeSet{2}), InputError);
  EXPECT_THROW(build_extremal(triad(), NodeSet{0, 1}, NodeSet{1}), InputError);
  EXPECT_THROW(build_extremal(triad(), NodeSet{}, NodeSet{1}), InputError);
}

TEST(Dynamics, WaveformVelocityConstantAndShortWindow) {
  SimConfig cfg;
  cfg.t_end = 1;
  const auto tr = simulate(WeightedDigraph::zero(2), {1, 2}, ZeroDisturbance{}, cfg);
  EXPECT_EQ(waveform_velocity(tr, NodeSet{0, 1}, 0, 1), 0.0);
  EXPECT_THROW(waveform_velocity(tr, NodeSet{0}, 0.5, 0.5), InputError);
}

// ---------------------------------------------------------------------------
// Properties

TEST(DynamicsProperty, ExtremalPlanDecomposition) {
  gen::Rng r(51);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 8), 9, r.coin());
    const auto e = polarization_exhaustive(g);
    const auto plan = build_extremal(g, e.v1, e.v2);
    EXPECT_EQ(plan.growth_rate, e.value);
    for (Index i = 0; i < g.size(); ++i)
      EXPECT_LE(std::abs(plan.constant_disturbance[i]), g.disturbance_bound(i));
    const auto box = filippov_box(g, 0, plan.initial_state, 0);
    for (Index i : e.v1) {
      EXPECT_GE(plan.autonomy_v1, box.lo[i]);
      EXPECT_LE(plan.autonomy_v1, box.hi[i]);
    }
  }
}

TEST(DynamicsProperty, Determinism) {
  gen::Rng r(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 8), 9, true);
    const auto x0 = gen::state(r, g.size());
    const auto dist = gen::disturbance(r, g, trial, x0);
    SimConfig cfg;
    cfg.t_end = 1;
    const auto a = simulate(g, x0, dist, cfg), b = simulate(g, x0, dist, cfg);
    EXPECT_EQ(a.states, b.states);
  }
}

TEST(DynamicsProperty, MaximumPrinciple) {
  gen::Rng r(53);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 8), 9, false);
    // states on a coarse lattice so the minimum gap exceeds dt * in-strength
    StateVector x0(g.size());
    for (auto& v : x0) v = r.integer(-20, 20);
    SimConfig cfg;
    cfg.t_end = 2;
    cfg.dt = 1.0 / 4096.0;
    const auto tr = simulate(g, x0, ZeroDisturbance{}, cfg);
    const double step = cfg.dt * g.max_in_strength();
    for (Index k = 1; k < tr.size(); ++k) {
      auto sorted = tr.states[k - 1];
      std::sort(sorted.begin(), sorted.end());
      double gap = 1e300;
      for (Index i = 1; i < sorted.size(); ++i)
        if (sorted[i] > sorted[i - 1]) gap = std::min(gap, sorted[i] - sorted[i - 1]);
      if (!(step < gap)) continue;
      EXPECT_LE(tr.max_state[k], tr.max_state[k - 1] + 1e-12);
      EXPECT_GE(tr.min_state[k], tr.min_state[k - 1] - 1e-12);
    }
  }
}

TEST(DynamicsProperty, NodeSplitEquivalence) {
  gen::Rng r(54);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = gen::graph(r, r.integer(2, 6), 5, false);
    const auto [s, map] = split_nodes(g);
    const auto x0 = gen::state(r, g.size());
    StateVector y0(s.size());
    for (Index a = 0; a < s.size(); ++a) y0[a] = x0[map.backward[a]];
    SimConfig cfg;
    cfg.t_end = 1;
    const auto tg = simulate(g, x0, ZeroDisturbance{}, cfg);
    const auto ts = simulate(s, y0, ZeroDisturbance{}, cfg);
    for (Index k = 0; k < tg.size(); ++k)
      for (Index a = 0; a < s.size(); ++a) ASSERT_EQ(ts.states[k][a], tg.states[k][map.backward[a]]);
  }
}
