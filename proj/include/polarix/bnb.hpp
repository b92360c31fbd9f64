#pragma once

// Branch-and-bound over sign vectors for the best complementary split.
//
// A complete sign vector a in {-1,+1}^n (not all equal) encodes the split
// V+ = {a_i = +1}, V- = {a_i = -1}. With v = W^T a, the inner minimization
// over b has the closed-form value
//   min_{i in V+} v_i - max_{i in V-} v_i = Au(V+) + Au(V-),
// and z-dagger is its maximum over a. z-dagger lower-bounds the
// polarization index and equals it whenever z-dagger <= 0.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "polarix/error.hpp"
#include "polarix/graph.hpp"
#include "polarix/indices.hpp"

namespace polarix {

// Entries in {-1, 0, +1}; 0 marks an unassigned coordinate.
class SignVector {
 public:
  explicit SignVector(Index n) : s_(n, 0) {}
  SignVector(std::initializer_list<int> signs) : s_(signs.begin(), signs.end()) {
    for (int s : s_)
      if (s < -1 || s > 1) throw InputError("sign entries must be -1, 0 or +1");
  }

  static SignVector from_split(Index n, const NodeSet& positive) {
    SignVector a(n);
    for (Index i = 0; i < n; ++i) a.s_[i] = -1;
    for (Index i : positive) a.s_.at(i) = 1;
    return a;
  }

  Index size() const noexcept { return s_.size(); }
  int operator[](Index i) const { return s_[i]; }
  void set(Index i, int sign) { s_.at(i) = sign; }

  bool complete() const {
    return std::none_of(s_.begin(), s_.end(), [](int s) { return s == 0; });
  }
  // Complete and every entry the same: excluded by -n < 1^T a < n.
  bool all_equal() const {
    return complete() && std::all_of(s_.begin(), s_.end(), [&](int s) { return s == s_.front(); });
  }

  NodeSet with_sign(int sign) const {
    std::vector<Index> v;
    for (Index i = 0; i < s_.size(); ++i)
      if (s_[i] == sign) v.push_back(i);
    return NodeSet(std::move(v));
  }
  NodeSet positive() const { return with_sign(1); }
  NodeSet negative() const { return with_sign(-1); }

  SignVector flipped() const {
    SignVector out(*this);
    for (auto& s : out.s_) s = -s;
    return out;
  }

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  std::vector<int> s_;
};

struct InnerDualSolution {
  double value = 0.0;  // 2 * c2
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> slack;  // c_3 .. c_{n+2}
};

struct BnbResult {
  double z_dagger = 0.0;
  SignVector witness{0};
  SearchStats stats;
};

struct BnbOptions {
  unsigned threads = 1;
  double time_budget = 0.0;  // seconds; 0 disables the budget
};

namespace detail {

inline void require_feasible(const WeightedDigraph& g, const SignVector& a, const char* op) {
  if (a.size() != g.size()) throw InputError(std::string(op) + ": sign vector length must equal n");
  if (!a.complete()) throw InputError(std::string(op) + ": sign vector must be complete");
  if (a.all_equal()) throw InputError(std::string(op) + ": sign vector must not be all-equal");
}

inline std::vector<double> transpose_times(const WeightedDigraph& g, const SignVector& a) {
  const Index n = g.size();
  std::vector<double> v(n, 0.0);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) v[i] += g.weight(j, i) * a[j];
  return v;
}

struct SplitExtremes {
  double min_positive = std::numeric_limits<double>::infinity();
  double max_negative = -std::numeric_limits<double>::infinity();
};

inline SplitExtremes split_extremes(const std::vector<double>& v, const SignVector& a) {
  SplitExtremes e;
  for (Index i = 0; i < v.size(); ++i) {
    if (a[i] > 0) e.min_positive = std::min(e.min_positive, v[i]);
    else e.max_negative = std::max(e.max_negative, v[i]);
  }
  return e;
}

}  // namespace detail

inline double inner_value(const WeightedDigraph& g, const SignVector& a) {
  detail::require_feasible(g, a, "inner_value");
  const auto e = detail::split_extremes(detail::transpose_times(g, a), a);
  return e.min_positive - e.max_negative;
}

// Optimal point of the inner dual LP  max 2 c2  s.t.  c1 + a_i c2 + a_i c_{i+2} = (W^T a)_i,
// c_{i+2} >= 0, in closed form.
inline InnerDualSolution inner_dual_certificate(const WeightedDigraph& g, const SignVector& a) {
  detail::require_feasible(g, a, "inner_dual_certificate");
  const auto v = detail::transpose_times(g, a);
  const auto e = detail::split_extremes(v, a);
  InnerDualSolution sol;
  sol.c1 = (e.min_positive + e.max_negative) / 2.0;
  sol.c2 = (e.min_positive - e.max_negative) / 2.0;
  sol.value = 2.0 * sol.c2;
  sol.slack.resize(v.size());
  for (Index i = 0; i < v.size(); ++i) sol.slack[i] = a[i] * (v[i] - sol.c1) - sol.c2;
  return sol;
}

namespace detail {

// Upper bound on inner_value over every feasible completion, from the
// assigned partial sums s_i = sum_{j assigned} w_ji a_j and the unassigned
// in-mass r_i = sum_{j unassigned} w_ji. Any completion has
// v_i <= s_i + r_i and v_i >= s_i - r_i; the minimum over V+ is at most the
// value at any node forced into V+, and the maximum over V- at least the
// value at any node forced into V-.
inline double partial_bound(const std::vector<double>& s, const std::vector<double>& r,
                            const std::vector<int>& assigned) {
  double min_pos = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  double free_hi = -std::numeric_limits<double>::infinity();
  double free_lo = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.size(); ++i) {
    const double hi = s[i] + r[i];
    const double lo = s[i] - r[i];
    if (assigned[i] > 0) {
      min_pos = std::min(min_pos, hi);
    } else if (assigned[i] < 0) {
      max_neg = std::max(max_neg, lo);
    } else {
      free_hi = std::max(free_hi, hi);
      free_lo = std::min(free_lo, lo);
    }
  }
  const double upper = std::isinf(min_pos) ? free_hi : min_pos;
  const double lower = std::isinf(max_neg) ? free_lo : max_neg;
  return upper - lower;
}

}  // namespace detail

// Admissible upper bound for a partial sign vector; exact for complete ones.
inline double bound(const WeightedDigraph& g, const SignVector& a) {
  if (a.size() != g.size()) throw InputError("bound: sign vector length must equal n");
  if (a.complete()) return inner_value(g, a);
  const Index n = g.size();
  std::vector<double> s(n, 0.0), r(n, 0.0);
  std::vector<int> assigned(n);
  for (Index j = 0; j < n; ++j) {
    assigned[j] = a[j];
    for (Index i = 0; i < n; ++i) {
      if (a[j] == 0) r[i] += g.weight(j, i);
      else s[i] += g.weight(j, i) * a[j];
    }
  }
  return detail::partial_bound(s, r, assigned);
}

namespace detail {

// Branching order: descending total in-strength, ties by index.
inline std::vector<Index> branching_order(const WeightedDigraph& g) {
  std::vector<Index> order(g.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&g](Index x, Index y) { return g.in_strength(x) > g.in_strength(y); });
  return order;
}

// Positive net out-minus-in strength goes to +1, the rest to -1; a
// one-sided split moves the last node in branching order to the other side.
inline SignVector greedy_split(const WeightedDigraph& g, const std::vector<Index>& order) {
  const Index n = g.size();
  SignVector a(n);
  for (Index j = 0; j < n; ++j) {
    double net = 0.0;
    for (Index i = 0; i < n; ++i) net += g.weight(j, i) - g.weight(i, j);
    a.set(j, net > 0.0 ? 1 : -1);
  }
  if (a.all_equal()) a.set(order.back(), -a[order.back()]);
  if (a[order.front()] < 0) a = a.flipped();
  return a;
}

inline void atomic_max(std::atomic<double>& target, double value) {
  double cur = target.load(std::memory_order_relaxed);
  while (value > cur && !target.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
  }
}

class SignSearch {
 public:
  using Clock = std::chrono::steady_clock;

  SignSearch(const WeightedDigraph& g, const std::vector<Index>& order, std::atomic<double>& incumbent,
             std::atomic<bool>& stop, Clock::time_point deadline, bool has_deadline)
      : g_(g),
        order_(order),
        n_(g.size()),
        incumbent_(incumbent),
        stop_(stop),
        deadline_(deadline),
        has_deadline_(has_deadline),
        s_(n_ + 1, std::vector<double>(n_, 0.0)),
        r_(n_ + 1, std::vector<double>(n_, 0.0)),
        assigned_(n_, 0),
        best_(n_) {
    for (Index i = 0; i < n_; ++i) r_[0][i] = g_.in_strength(i);
  }

  // Explores the subtree below the given prefix of the branching order.
  void run(const std::vector<int>& prefix) {
    for (Index d = 0; d < prefix.size(); ++d) assign(d, prefix[d]);
    negatives_ = static_cast<Index>(std::count(prefix.begin(), prefix.end(), -1));
    dfs(prefix.size());
    for (Index d = 0; d < prefix.size(); ++d) assigned_[order_[d]] = 0;
  }

  std::uint64_t nodes() const noexcept { return nodes_; }
  bool found() const noexcept { return found_; }
  double best_value() const noexcept { return best_value_; }
  const SignVector& best() const noexcept { return best_; }

 private:
  void assign(Index depth, int sign) {
    const Index node = order_[depth];
    assigned_[node] = sign;
    const auto& s = s_[depth];
    const auto& r = r_[depth];
    auto& s_next = s_[depth + 1];
    auto& r_next = r_[depth + 1];
    for (Index i = 0; i < n_; ++i) {
      const double w = g_.weight(node, i);
      s_next[i] = s[i] + w * sign;
      r_next[i] = r[i] - w;
    }
  }

  bool out_of_time() {
    if (stop_.load(std::memory_order_relaxed)) return true;
    if (has_deadline_ && (nodes_ & 1023u) == 0 && Clock::now() >= deadline_) {
      stop_.store(true, std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  void dfs(Index depth) {
    ++nodes_;
    if (out_of_time()) return;
    if (depth == n_) {
      double min_pos = std::numeric_limits<double>::infinity();
      double max_neg = -std::numeric_limits<double>::infinity();
      const auto& v = s_[n_];
      for (Index i = 0; i < n_; ++i) {
        if (assigned_[i] > 0) min_pos = std::min(min_pos, v[i]);
        else max_neg = std::max(max_neg, v[i]);
      }
      const double value = min_pos - max_neg;
      if (value > incumbent_.load(std::memory_order_relaxed)) {
        atomic_max(incumbent_, value);
        best_value_ = value;
        found_ = true;
        for (Index i = 0; i < n_; ++i) best_.set(i, assigned_[i]);
      }
      return;
    }
    if (partial_bound(s_[depth], r_[depth], assigned_) <= incumbent_.load(std::memory_order_relaxed))
      return;
    const bool last = depth + 1 == n_;
    for (int sign : {1, -1}) {
      if (depth == 0 && sign < 0) continue;             // sign-flip symmetry
      if (last && sign > 0 && negatives_ == 0) continue;  // all +1 is infeasible
      assign(depth, sign);
      if (sign < 0) ++negatives_;
      dfs(depth + 1);
      if (sign < 0) --negatives_;
      assigned_[order_[depth]] = 0;
    }
  }

  const WeightedDigraph& g_;
  const std::vector<Index>& order_;
  Index n_;
  std::atomic<double>& incumbent_;
  std::atomic<bool>& stop_;
  Clock::time_point deadline_;
  bool has_deadline_;
  std::vector<std::vector<double>> s_;
  std::vector<std::vector<double>> r_;
  std::vector<int> assigned_;
  Index negatives_ = 0;
  std::uint64_t nodes_ = 0;
  bool found_ = false;
  double best_value_ = -std::numeric_limits<double>::infinity();
  SignVector best_;
};

}  // namespace detail

// Exact z-dagger (unless a time budget expires; then stats.complete is false
// and z_dagger is the best value found). With threads == 1 the search, the
// witness and the node count are deterministic.
inline BnbResult bnb_solve(const WeightedDigraph& g, BnbOptions opt = {}) {
  using Clock = detail::SignSearch::Clock;
  const auto start = Clock::now();
  const Index n = g.size();
  const auto order = detail::branching_order(g);

  BnbResult result;
  result.witness = detail::greedy_split(g, order);
  std::atomic<double> incumbent{inner_value(g, result.witness)};
  std::atomic<bool> stop{false};
  const bool has_deadline = opt.time_budget > 0.0;
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opt.time_budget));

  // Prefixes of the branching order explored as independent tasks. The
  // root is pinned to +1; a prefix never ends all-positive at full length.
  std::vector<std::vector<int>> tasks;
  const unsigned threads = std::max(1u, opt.threads);
  if (threads == 1) {
    tasks.push_back({});
  } else {
    Index depth = 1;
    while (depth < n - 1 && (std::size_t{1} << (depth - 1)) < 8 * static_cast<std::size_t>(threads)) ++depth;
    const std::size_t count = std::size_t{1} << (depth - 1);
    for (std::size_t code = 0; code < count; ++code) {
      std::vector<int> prefix{1};
      for (Index d = 1; d < depth; ++d) prefix.push_back(((code >> (depth - 1 - d)) & 1u) ? -1 : 1);
      tasks.push_back(std::move(prefix));
    }
  }

  struct TaskOutcome {
    bool found = false;
    double value = 0.0;
    SignVector witness{0};
  };
  std::vector<TaskOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> nodes{0};

  const auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      detail::SignSearch search(g, order, incumbent, stop, deadline, has_deadline);
      search.run(tasks[t]);
      nodes += search.nodes();
      if (search.found()) outcomes[t] = {true, search.best_value(), search.best()};
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes)
    if (o.found && o.value > best) {
      best = o.value;
      result.witness = o.witness;
    }
  result.z_dagger = inner_value(g, result.witness);
  result.stats.nodes_explored = nodes.load();
  result.stats.complete = !stop.load();
  result.stats.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

struct PolarizationOptions {
  BnbOptions bnb;
  Index exhaustive_limit = 16;
};

// Polarization index via z-dagger, falling back to exhaustive enumeration
// when z-dagger > 0 and the graph is small enough. Large graphs with
// z-dagger > 0 get a certified lower bound (exact = false), which still
// proves that dissensus solutions exist.
inline PolarizationResult polarization(const WeightedDigraph& g, PolarizationOptions opt = {}) {
  const auto bnb = bnb_solve(g, opt.bnb);
  PolarizationResult r;
  r.value = bnb.z_dagger;
  r.v1 = bnb.witness.positive();
  r.v2 = bnb.witness.negative();
  r.method = SolveMethod::branch_and_bound;
  r.stats = bnb.stats;
  if (!bnb.stats.complete) {
    r.exact = false;
    return r;
  }
  if (bnb.z_dagger <= 0.0) {
    r.exact = true;
    return r;
  }
  if (g.size() <= opt.exhaustive_limit) {
    auto full = polarization_exhaustive(g, {opt.exhaustive_limit, true});
    full.method = SolveMethod::hybrid;
    full.stats = bnb.stats;
    return full;
  }
  r.exact = false;
  return r;
}

}  // namespace polarix
