#pragma once

// Autonomy and polarization indices of a weighted digraph.
//
// For a node set V and i in V, the signed strength of i is
//   beta_i = sum_{j in V} w_ji - sum_{j not in V} w_ji   (internal - external)
// and alpha_i = -sum_j w_ji. The upper autonomy index is min_i beta_i, the
// lower one is max_i alpha_i; the autonomy index equals the upper one when
// lower <= upper and is -infinity otherwise. The polarization index is the
// best sum of upper autonomy over pairs of disjoint nonempty sets.

#include <bit>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polarix/error.hpp"
#include "polarix/graph.hpp"

namespace polarix {

// A real number or -infinity (the supremum of an empty set).
class ExtendedReal {
 public:
  constexpr ExtendedReal(double v) : value_(v), neg_inf_(false) {}  // NOLINT(implicit)
  static constexpr ExtendedReal neg_infinity() { return ExtendedReal(); }

  constexpr bool is_neg_infinity() const noexcept { return neg_inf_; }
  constexpr bool is_finite() const noexcept { return !neg_inf_; }

  double value() const {
    if (neg_inf_) throw std::domain_error("ExtendedReal: value() on -infinity");
    return value_;
  }
  // -infinity maps to the IEEE value; only for display and plotting.
  constexpr double to_double() const noexcept {
    return neg_inf_ ? -std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.neg_inf_ && b.neg_inf_) return std::partial_ordering::equivalent;
    if (a.neg_inf_) return std::partial_ordering::less;
    if (b.neg_inf_) return std::partial_ordering::greater;
    return a.value_ <=> b.value_;
  }

 private:
  constexpr ExtendedReal() : value_(0.0), neg_inf_(true) {}
  double value_;
  bool neg_inf_;
};

struct NodeStrength {
  Index node;
  double internal;  // sum_{j in V} w_ji
  double external;  // sum_{j not in V} w_ji
  double beta;      // internal - external
  double alpha;     // -sum_j w_ji
};

using AutonomyBreakdown = std::vector<NodeStrength>;

namespace detail {

inline void require_nonempty(const WeightedDigraph& g, const NodeSet& v, const char* op) {
  if (v.empty()) throw InputError(std::string(op) + ": node set must be nonempty");
  if (v.members().back() >= g.size())
    throw InputError(std::string(op) + ": node index out of range");
}

}  // namespace detail

inline AutonomyBreakdown autonomy_breakdown(const WeightedDigraph& g, const NodeSet& v) {
  detail::require_nonempty(g, v, "autonomy_breakdown");
  const Index n = g.size();
  const auto in_v = v.membership(n);
  AutonomyBreakdown out;
  out.reserve(v.size());
  for (Index i : v) {
    double internal = 0.0, external = 0.0;
    for (Index j = 0; j < n; ++j) (in_v[j] ? internal : external) += g.weight(j, i);
    out.push_back({i, internal, external, internal - external, -g.in_strength(i)});
  }
  return out;
}

inline double autonomy_upper(const WeightedDigraph& g, const NodeSet& v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : autonomy_breakdown(g, v)) best = std::min(best, s.beta);
  return best;
}

inline double autonomy_lower(const WeightedDigraph& g, const NodeSet& v) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : autonomy_breakdown(g, v)) best = std::max(best, s.alpha);
  return best;
}

// Exact comparison, no tolerance.
inline ExtendedReal autonomy(const WeightedDigraph& g, const NodeSet& v) {
  const double upper = autonomy_upper(g, v);
  const double lower = autonomy_lower(g, v);
  if (lower <= upper) return upper;
  return ExtendedReal::neg_infinity();
}

inline bool is_strong_community(const WeightedDigraph& g, const NodeSet& v) {
  return autonomy_upper(g, v) > 0.0;
}

// Members of V attaining the minimum signed strength.
inline NodeSet key_nodes(const WeightedDigraph& g, const NodeSet& v) {
  const auto breakdown = autonomy_breakdown(g, v);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : breakdown) best = std::min(best, s.beta);
  std::vector<Index> keys;
  for (const auto& s : breakdown)
    if (s.beta == best) keys.push_back(s.node);
  return NodeSet(std::move(keys));
}

// Least upper bound on the consensus time from initial range r, given the
// polarization index A of the graph. Only defined for A < 0.
inline double consensus_time_bound(double r, double polarization_index) {
  if (r < 0.0) throw InputError("consensus_time_bound: r must be nonnegative");
  if (!(polarization_index < 0.0))
    throw InputError("no finite strong-consensus bound: polarization index is not negative");
  return r / -polarization_index;
}

// ---------------------------------------------------------------------------
// Polarization index

enum class SolveMethod { exhaustive, complement_exhaustive, branch_and_bound, hybrid };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::exhaustive: return "exhaustive";
    case SolveMethod::complement_exhaustive: return "complement_exhaustive";
    case SolveMethod::branch_and_bound: return "branch_and_bound";
    case SolveMethod::hybrid: return "hybrid";
  }
  return "unknown";
}

struct SearchStats {
  std::uint64_t nodes_explored = 0;
  double wall_time = 0.0;  // seconds
  bool complete = true;    // false when a time budget cut the search short
};

struct PolarizationResult {
  double value = 0.0;
  NodeSet v1;
  NodeSet v2;
  SolveMethod method = SolveMethod::exhaustive;
  bool exact = false;
  std::optional<SearchStats> stats;
};

inline nlohmann::ordered_json to_json(const PolarizationResult& r) {
  nlohmann::ordered_json j;
  j["value"] = r.value;
  j["v1"] = r.v1.one_based();
  j["v2"] = r.v2.one_based();
  j["method"] = to_string(r.method);
  j["exact"] = r.exact;
  if (r.stats) {
    j["nodes_explored"] = r.stats->nodes_explored;
    j["wall_time"] = r.stats->wall_time;
    j["search_complete"] = r.stats->complete;
  }
  return j;
}

struct EnumerationOptions {
  Index max_n = 16;
  bool force = false;
};

namespace detail {

inline void guard_size(const WeightedDigraph& g, const EnumerationOptions& opt, const char* op) {
  if (g.size() > 40) throw SizeLimitError(std::string(op) + ": n > 40 is not enumerable");
  if (g.size() > opt.max_n && !opt.force)
    throw SizeLimitError(std::string(op) + ": n = " + std::to_string(g.size()) + " exceeds the limit " +
                         std::to_string(opt.max_n) + "; use the branch-and-bound solver or force");
}

// Upper autonomy of the node set encoded by `mask`.
inline double autonomy_upper_mask(const WeightedDigraph& g, std::uint64_t mask) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
    const auto i = static_cast<Index>(std::countr_zero(rest));
    double internal = 0.0;
    for (std::uint64_t m = mask; m != 0; m &= m - 1)
      internal += g.weight(static_cast<Index>(std::countr_zero(m)), i);
    best = std::min(best, 2.0 * internal - g.in_strength(i));
  }
  return best;
}

// Upper autonomy for every nonempty mask over n nodes.
inline std::vector<double> autonomy_upper_table(const WeightedDigraph& g) {
  const std::uint64_t count = std::uint64_t{1} << g.size();
  std::vector<double> table(count, std::numeric_limits<double>::quiet_NaN());
  for (std::uint64_t mask = 1; mask < count; ++mask) table[mask] = autonomy_upper_mask(g, mask);
  return table;
}

// Lexicographic order on ternary assignment vectors (node 1 most
// significant; 0 = neither, 1 = first set, 2 = second set).
inline bool ternary_less(std::uint64_t a1, std::uint64_t a2, std::uint64_t b1, std::uint64_t b2) {
  const std::uint64_t diff = (a1 ^ b1) | (a2 ^ b2);
  if (diff == 0) return false;
  const int i = std::countr_zero(diff);
  const auto code = [i](std::uint64_t s1, std::uint64_t s2) {
    return ((s1 >> i) & 1u) ? 1 : (((s2 >> i) & 1u) ? 2 : 0);
  };
  return code(a1, a2) < code(b1, b2);
}

struct PairSearch {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t v1 = 0, v2 = 0;

  void offer(double candidate, std::uint64_t c1, std::uint64_t c2) {
    if (candidate > value || (candidate == value && ternary_less(c1, c2, v1, v2))) {
      value = candidate;
      v1 = c1;
      v2 = c2;
    }
  }
};

}  // namespace detail

// Exact polarization index by enumerating every ordered pair of disjoint
// nonempty sets, modulo swapping (the lowest-indexed member of V1 u V2 sits
// in V1). Ties go to the lexicographically smallest ternary assignment.
inline PolarizationResult polarization_exhaustive(const WeightedDigraph& g, EnumerationOptions opt = {}) {
  detail::guard_size(g, opt, "polarization_exhaustive");
  const Index n = g.size();
  const auto table = detail::autonomy_upper_table(g);
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  detail::PairSearch best;
  for (std::uint64_t v1 = 1; v1 <= full; ++v1) {
    const std::uint64_t low1 = v1 & (~v1 + 1);
    const double a1 = table[v1];
    const std::uint64_t rest = full & ~v1;
    // Submasks of `rest` whose lowest bit lies above v1's lowest bit.
    for (std::uint64_t v2 = rest; v2 != 0; v2 = (v2 - 1) & rest) {
      if ((v2 & (~v2 + 1)) < low1) continue;
      best.offer(a1 + table[v2], v1, v2);
    }
  }
  PolarizationResult r;
  r.value = best.value;
  r.v1 = NodeSet::from_mask(best.v1);
  r.v2 = NodeSet::from_mask(best.v2);
  r.method = SolveMethod::exhaustive;
  r.exact = true;
  return r;
}

// Best complementary split z* = max_V [Au(V) + Au(V^c)]. It lower-bounds
// the polarization index and equals it when z* <= 0.
inline PolarizationResult complement_z_star(const WeightedDigraph& g, EnumerationOptions opt = {}) {
  detail::guard_size(g, opt, "complement_z_star");
  const Index n = g.size();
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  detail::PairSearch best;
  // Node 1 always in V; s enumerates the membership of nodes 2..n.
  const std::uint64_t last = (std::uint64_t{1} << (n - 1)) - 1;
  for (std::uint64_t s = 0; s < last; ++s) {
    const std::uint64_t v = 1 | (s << 1);
    const std::uint64_t vc = full & ~v;
    best.offer(detail::autonomy_upper_mask(g, v) + detail::autonomy_upper_mask(g, vc), v, vc);
  }
  PolarizationResult r;
  r.value = best.value;
  r.v1 = NodeSet::from_mask(best.v1);
  r.v2 = NodeSet::from_mask(best.v2);
  r.method = SolveMethod::complement_exhaustive;
  r.exact = best.value <= 0.0;
  return r;
}

struct ComplementarySplit {
  NodeSet v1;
  NodeSet v2;
  double score;  // min(Au(v1), Au(v2))
};

// Complementary split maximizing the weaker side's upper autonomy.
inline ComplementarySplit best_complementary_split(const WeightedDigraph& g) {
  const Index n = g.size();
  if (n > 30) throw SizeLimitError("best_complementary_split: n > 30 is not enumerable");
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  const std::uint64_t last = (std::uint64_t{1} << (n - 1)) - 1;
  detail::PairSearch best;
  for (std::uint64_t s = 0; s < last; ++s) {
    const std::uint64_t v = 1 | (s << 1);
    const std::uint64_t vc = full & ~v;
    best.offer(std::min(detail::autonomy_upper_mask(g, v), detail::autonomy_upper_mask(g, vc)), v, vc);
  }
  return {NodeSet::from_mask(best.v1), NodeSet::from_mask(best.v2), best.value};
}

// A complementary pair of strong communities, if one exists.
inline std::optional<std::pair<NodeSet, NodeSet>> find_satisfactory_partition(const WeightedDigraph& g) {
  auto split = best_complementary_split(g);
  if (split.score > 0.0) return std::make_pair(std::move(split.v1), std::move(split.v2));
  return std::nullopt;
}

// Some strong community (smallest mask first), by exhaustive search.
inline std::optional<NodeSet> find_strong_community(const WeightedDigraph& g) {
  const Index n = g.size();
  if (n > 30) throw SizeLimitError("find_strong_community: n > 30 is not enumerable");
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < count; ++mask)
    if (detail::autonomy_upper_mask(g, mask) > 0.0) return NodeSet::from_mask(mask);
  return std::nullopt;
}

// Replaces a side whose autonomy index is -infinity by the singleton of its
// least-constrained member (largest alpha). That singleton's autonomy is at
// least the side's upper autonomy, so a maximizing pair stays maximizing and
// both sides can then move rigidly.
inline std::pair<NodeSet, NodeSet> realizable_pair(const WeightedDigraph& g, const NodeSet& v1,
                                                   const NodeSet& v2) {
  const auto refine = [&g](const NodeSet& v) {
    if (autonomy(g, v).is_finite()) return v;
    const auto breakdown = autonomy_breakdown(g, v);
    const NodeStrength* best = &breakdown.front();
    for (const auto& s : breakdown)
      if (s.alpha > best->alpha) best = &s;
    return NodeSet{best->node};
  };
  return {refine(v1), refine(v2)};
}

}  // namespace polarix
