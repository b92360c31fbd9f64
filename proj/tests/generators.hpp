#pragma once

// Hand-rolled random instance generators for property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "polarix.hpp"

namespace gen {

using polarix::Index;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng); }
};

// Integer weights 0..max_weight on off-diagonal entries; optional diagonal.
inline polarix::WeightedDigraph graph(Rng& r, Index n, int max_weight = 9, bool self_loops = false) {
  std::vector<double> w(n * n, 0.0);
  const double density = r.real(0.2, 1.0);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j && !self_loops) continue;
      if (r.coin(density)) w[j * n + i] = r.integer(0, max_weight);
    }
  return polarix::WeightedDigraph(n, std::move(w));
}

inline polarix::NodeSet nonempty_subset(Rng& r, Index n) {
  std::vector<Index> v;
  while (v.empty())
    for (Index i = 0; i < n; ++i)
      if (r.coin()) v.push_back(i);
  return polarix::NodeSet(std::move(v));
}

inline polarix::SignVector sign_vector(Rng& r, Index n) {
  polarix::SignVector a(n);
  do {
    for (Index i = 0; i < n; ++i) a.set(i, r.coin() ? 1 : -1);
  } while (a.all_equal());
  return a;
}

inline polarix::StateVector state(Rng& r, Index n, double lo = -5.0, double hi = 5.0) {
  polarix::StateVector x(n);
  for (auto& v : x) v = r.real(lo, hi);
  return x;
}

inline std::vector<Index> permutation(Rng& r, Index n) {
  std::vector<Index> p(n);
  for (Index i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), r.eng);
  return p;
}

// One of the five disturbance families, sized for g.
inline polarix::DisturbanceSpec disturbance(Rng& r, const polarix::WeightedDigraph& g, int kind,
                                            const polarix::StateVector& x0) {
  switch (kind % 5) {
    case 0: return polarix::ZeroDisturbance{};
    case 1: {
      polarix::BoundedNoise b;
      b.seed = r.eng();
      return b;
    }
    case 2: return polarix::WorstCase{};
    case 3: return polarix::Stubborn{x0};
    default: {
      polarix::FixedSources f;
      f.per_agent.resize(g.size());
      for (Index i = 0; i < g.size(); ++i) {
        const double cap = g.disturbance_bound(i);
        if (cap <= 0.0) continue;
        const double w1 = r.real(0.0, cap / 2), w2 = r.real(0.0, cap / 2);
        f.per_agent[i].push_back({r.real(-5, 5), w1});
        f.per_agent[i].push_back({r.real(-5, 5), w2});
      }
      return f;
    }
  }
}

}  // namespace gen
