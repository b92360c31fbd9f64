#pragma once

// Weighted digraphs for the signum consensus protocol.
//
// Weight convention: weight(j, i) is the influence of agent j on agent i
// (row j, column i). The diagonal weight(i, i) is not an edge in the usual
// sense; it bounds the disturbance acting on agent i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polarix/error.hpp"

namespace polarix {

using Index = std::size_t;

// Sorted set of 0-based agent indices. Documents and CLI output use 1-based
// indices; conversion happens at the I/O boundary only.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<Index> members) : members_(members) { normalize(); }
  explicit NodeSet(std::vector<Index> members) : members_(std::move(members)) { normalize(); }

  static NodeSet from_mask(std::uint64_t mask) {
    NodeSet s;
    for (Index i = 0; mask != 0; ++i, mask >>= 1) {
      if (mask & 1u) s.members_.push_back(i);
    }
    return s;
  }

  static NodeSet all(Index n) {
    std::vector<Index> v(n);
    std::iota(v.begin(), v.end(), Index{0});
    return NodeSet(std::move(v));
  }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (Index i : members_) {
      if (i >= 64) throw InputError("node set does not fit a 64-bit mask");
      m |= std::uint64_t{1} << i;
    }
    return m;
  }

  NodeSet complement(Index n) const {
    std::vector<Index> out;
    auto it = members_.begin();
    for (Index i = 0; i < n; ++i) {
      if (it != members_.end() && *it == i) {
        ++it;
      } else {
        out.push_back(i);
      }
    }
    return NodeSet(std::move(out));
  }

  // Dense membership flags, used by the hot loops.
  std::vector<char> membership(Index n) const {
    std::vector<char> flags(n, 0);
    for (Index i : members_) flags.at(i) = 1;
    return flags;
  }

  bool contains(Index i) const { return std::binary_search(members_.begin(), members_.end(), i); }
  bool empty() const noexcept { return members_.empty(); }
  Index size() const noexcept { return members_.size(); }
  Index front() const { return members_.front(); }
  const std::vector<Index>& members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  bool intersects(const NodeSet& other) const {
    auto a = members_.begin();
    auto b = other.members_.begin();
    while (a != members_.end() && b != other.members_.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a; else ++b;
    }
    return false;
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

  // 1-based rendering for messages and documents.
  std::vector<Index> one_based() const {
    std::vector<Index> v(members_);
    for (auto& i : v) ++i;
    return v;
  }

  static NodeSet from_one_based(const std::vector<std::int64_t>& ids, Index n) {
    std::vector<Index> v;
    v.reserve(ids.size());
    for (auto id : ids) {
      if (id < 1 || static_cast<Index>(id) > n) {
        throw InputError("node index " + std::to_string(id) + " out of range 1.." +
                         std::to_string(n));
      }
      v.push_back(static_cast<Index>(id - 1));
    }
    return NodeSet(std::move(v));
  }

 private:
  void normalize() {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  std::vector<Index> members_;
};

// Immutable n x n nonnegative weight matrix, n >= 2.
class WeightedDigraph {
 public:
  WeightedDigraph(Index n, std::vector<double> row_major) : n_(n), w_(std::move(row_major)) {
    if (n_ < 2) throw InputError("graph needs at least 2 agents, got " + std::to_string(n_));
    if (w_.size() != n_ * n_) throw InputError("weight matrix must have n*n entries");
    for (Index k = 0; k < w_.size(); ++k) {
      const double w = w_[k];
      if (!std::isfinite(w)) {
        throw InputError("non-finite weight at (" + std::to_string(k / n_ + 1) + "," +
                         std::to_string(k % n_ + 1) + ")");
      }
      if (w < 0.0) {
        throw InputError("negative weight at (" + std::to_string(k / n_ + 1) + "," +
                         std::to_string(k % n_ + 1) + ")");
      }
    }
    in_strength_.assign(n_, 0.0);
    for (Index j = 0; j < n_; ++j)
      for (Index i = 0; i < n_; ++i) in_strength_[i] += w_[j * n_ + i];
  }

  static WeightedDigraph zero(Index n) { return WeightedDigraph(n, std::vector<double>(n * n, 0.0)); }

  Index size() const noexcept { return n_; }

  // Influence of `from` on `to`.
  double weight(Index from, Index to) const { return w_[from * n_ + to]; }
  double disturbance_bound(Index i) const { return w_[i * n_ + i]; }

  // Total in-strength sum_j w_ji, diagonal included.
  double in_strength(Index i) const { return in_strength_[i]; }
  double max_in_strength() const { return *std::max_element(in_strength_.begin(), in_strength_.end()); }

  double max_disturbance_bound() const {
    double m = 0.0;
    for (Index i = 0; i < n_; ++i) m = std::max(m, disturbance_bound(i));
    return m;
  }

  bool has_self_loops() const {
    for (Index i = 0; i < n_; ++i)
      if (disturbance_bound(i) > 0.0) return true;
    return false;
  }

  const std::vector<double>& matrix() const noexcept { return w_; }

  WeightedDigraph scaled(double c) const {
    std::vector<double> w(w_);
    for (auto& x : w) x *= c;
    return WeightedDigraph(n_, std::move(w));
  }

  // Relabel: node i of this graph becomes node perm[i].
  WeightedDigraph permuted(const std::vector<Index>& perm) const {
    std::vector<double> w(n_ * n_, 0.0);
    for (Index j = 0; j < n_; ++j)
      for (Index i = 0; i < n_; ++i) w[perm[j] * n_ + perm[i]] = weight(j, i);
    return WeightedDigraph(n_, std::move(w));
  }

  friend bool operator==(const WeightedDigraph& a, const WeightedDigraph& b) {
    return a.n_ == b.n_ && a.w_ == b.w_;
  }

 private:
  Index n_;
  std::vector<double> w_;
  std::vector<double> in_strength_;
};

// Maps between an integer-weighted graph and its node-split unweighted form.
struct SplitMap {
  std::vector<std::vector<Index>> forward;  // original node -> subnodes
  std::vector<Index> backward;              // subnode -> original node
};

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json graph_to_json(const WeightedDigraph& g) {
  nlohmann::ordered_json doc;
  doc["n"] = g.size();
  auto edges = nlohmann::ordered_json::array();
  for (Index j = 0; j < g.size(); ++j)
    for (Index i = 0; i < g.size(); ++i) {
      const double w = g.weight(j, i);
      if (w > 0.0) edges.push_back(nlohmann::ordered_json::array({j + 1, i + 1, w}));
    }
  doc["edges"] = std::move(edges);
  return doc;
}

inline WeightedDigraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("graph document must be a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw InputError("graph document needs an integer field \"n\"");
  const auto n_signed = doc["n"].get<std::int64_t>();
  if (n_signed < 2) throw InputError("graph needs at least 2 agents, got " + std::to_string(n_signed));
  const auto n = static_cast<Index>(n_signed);
  if (!doc.contains("edges") || !doc["edges"].is_array())
    throw InputError("graph document needs an array field \"edges\"");

  std::vector<double> w(n * n, 0.0);
  std::vector<char> seen(n * n, 0);
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number())
      throw InputError("each edge must be [j, i, w] with integer j, i and numeric w");
    const auto j = e[0].get<std::int64_t>();
    const auto i = e[1].get<std::int64_t>();
    const double wt = e[2].get<double>();
    if (j < 1 || i < 1 || j > n_signed || i > n_signed)
      throw InputError("edge index out of range: [" + std::to_string(j) + "," + std::to_string(i) + "]");
    if (!std::isfinite(wt)) throw InputError("non-finite weight on edge");
    if (wt < 0.0) throw InputError("negative weight on edge");
    if (wt == 0.0) throw InputError("edge weights must be positive");
    const Index k = static_cast<Index>(j - 1) * n + static_cast<Index>(i - 1);
    if (seen[k]) throw InputError("duplicate edge [" + std::to_string(j) + "," + std::to_string(i) + "]");
    seen[k] = 1;
    w[k] = wt;
  }
  return WeightedDigraph(n, std::move(w));
}

inline WeightedDigraph load_graph(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {  // also number overflow
    throw InputError(std::string("malformed graph document: ") + e.what());
  }
  return graph_from_json(doc);
}

inline std::string save_graph(const WeightedDigraph& g) { return graph_to_json(g).dump(); }

// n lines of n numbers, row j column i = w_ji.
inline std::string to_matrix_text(const WeightedDigraph& g) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index j = 0; j < g.size(); ++j) {
    for (Index i = 0; i < g.size(); ++i) {
      if (i) out << ' ';
      out << g.weight(j, i);
    }
    out << '\n';
  }
  return out.str();
}

inline WeightedDigraph from_matrix_text(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw InputError("bad number '" + tok + "' in matrix text");
      } catch (const std::logic_error&) {
        throw InputError("bad number '" + tok + "' in matrix text");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const Index n = rows.size();
  std::vector<double> w;
  w.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw InputError("matrix text must be square");
    w.insert(w.end(), r.begin(), r.end());
  }
  return WeightedDigraph(n, std::move(w));
}

// ---------------------------------------------------------------------------
// Transforms and generators

// Splits every node whose largest outgoing weight p exceeds 1 into p
// subnodes. In-edges are copied to all subnodes; an out-edge of weight k
// becomes unit edges from the first k subnodes. The diagonal is carried over
// unchanged to every subnode as its disturbance bound and takes no part in
// the split.
inline std::pair<WeightedDigraph, SplitMap> split_nodes(const WeightedDigraph& g) {
  const Index n = g.size();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const double w = g.weight(j, i);
      if (w != std::round(w))
        throw InputError("split_nodes needs integer weights; (" + std::to_string(j + 1) + "," +
                         std::to_string(i + 1) + ") is fractional");
    }

  SplitMap map;
  map.forward.resize(n);
  for (Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Index k = 0; k < n; ++k)
      if (k != i) p = std::max(p, g.weight(i, k));
    for (Index s = 0; s < static_cast<Index>(p); ++s) {
      map.forward[i].push_back(map.backward.size());
      map.backward.push_back(i);
    }
  }

  const Index m = map.backward.size();
  std::vector<double> w(m * m, 0.0);
  for (Index i = 0; i < n; ++i)
    for (Index sub : map.forward[i]) w[sub * m + sub] = g.disturbance_bound(i);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const auto k = static_cast<Index>(g.weight(j, i));
      for (Index a = 0; a < k; ++a)
        for (Index target : map.forward[i]) w[map.forward[j][a] * m + target] = 1.0;
    }
  return {WeightedDigraph(m, std::move(w)), std::move(map)};
}

// Seeded random integer-weighted digraph: each ordered pair (and each
// diagonal entry when self_loops is set) carries an edge with probability
// `density`, weight uniform in 1..max_weight.
inline WeightedDigraph random_graph(Index n, int max_weight, double density, bool self_loops,
                                    std::uint64_t seed) {
  if (n < 2) throw InputError("random_graph: n must be >= 2");
  if (max_weight < 1) throw InputError("random_graph: max_weight must be >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw InputError("random_graph: density must lie in [0, 1]");

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(density);
  std::uniform_int_distribution<int> weight(1, max_weight);
  std::vector<double> w(n * n, 0.0);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j && !self_loops) continue;
      if (edge(rng)) w[j * n + i] = static_cast<double>(weight(rng));
    }
  return WeightedDigraph(n, std::move(w));
}

}  // namespace polarix
