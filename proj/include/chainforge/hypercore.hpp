#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"
#include "rational.hpp"

namespace chainforge {

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

template <class EdgeRange>
EdgePartition vertex_components(int n, const EdgeRange& edges) {
  DisjointSets ds(static_cast<std::size_t>(n) + 1);
  for (const auto& e : edges)
    for (std::size_t i = 1; i < e.size(); ++i) ds.unite(static_cast<std::size_t>(e[0]), static_cast<std::size_t>(e[i]));

  std::map<std::size_t, std::size_t> block_of_root;
  EdgePartition out;
  for (const auto& e : edges) {
    if (e.size() < 2) continue;
    auto root = ds.find(static_cast<std::size_t>(e[0]));
    auto [it, inserted] = block_of_root.emplace(root, out.blocks.size());
    if (inserted) out.blocks.emplace_back();
    out.blocks[it->second].push_back(e);
  }
  // Shorter tuples join the block of their vertex, if it has one.
  for (const auto& e : edges) {
    if (e.size() != 1) continue;
    auto it = block_of_root.find(ds.find(static_cast<std::size_t>(e[0])));
    if (it != block_of_root.end()) out.blocks[it->second].push_back(e);
  }
  for (const auto& block : out.blocks) {
    std::set<Vertex> vs;
    for (const auto& e : block) vs.insert(e.begin(), e.end());
    out.vertex_sets.emplace_back(vs.begin(), vs.end());
  }
  return out;
}

inline std::set<Edge> pairs_of(const std::vector<Edge>& edges) {
  std::set<Edge> pairs;
  for (const auto& e : edges)
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i + 1; j < e.size(); ++j) pairs.insert({std::min(e[i], e[j]), std::max(e[i], e[j])});
  return pairs;
}

}  // namespace detail

/// Minimum d-degree: the least number of edges containing a d-set of vertices.
inline std::int64_t degree_min(const Hypergraph& g, int d) {
  if (d < 1 || d > g.k() - 1) throw ParameterError("degree order d must satisfy 1 <= d <= k-1");
  if (g.n() < g.k()) throw ParameterError("degree_min needs n >= k");
  std::map<Edge, std::int64_t> counter;
  for (const auto& e : g.edges()) {
    for_each_combination(e, d, [&](const std::vector<Vertex>& s) {
      ++counter[s];
      return true;
    });
  }
  // d-sets missing from the counter have degree zero.
  if (BigInt(counter.size()) < binomial(g.n(), d)) return 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& [set, c] : counter) best = std::min(best, c);
  return best;
}

/// The 2-shadow: uv is an edge iff some edge contains both u and v.
inline Hypergraph shadow2(const Hypergraph& h) { return Hypergraph::from_edge_set(h.n(), 2, detail::pairs_of(h.edges())); }

/// 2-shadow of a digraph; orientation is ignored.
inline Hypergraph shadow2(const Digraph& h) { return Hypergraph::from_edge_set(h.n(), 2, detail::pairs_of(h.tuples())); }

/// The l-shadow: all l-sets contained in some edge.
inline Hypergraph l_shadow(const Hypergraph& g, int ell) {
  if (ell < 1 || ell >= g.k()) throw ParameterError("shadow order must satisfy 1 <= l < k");
  std::set<Edge> sets;
  for (const auto& e : g.edges()) {
    for_each_combination(e, ell, [&](const std::vector<Vertex>& s) {
      sets.insert(s);
      return true;
    });
  }
  return Hypergraph::from_edge_set(g.n(), ell, sets);
}

/// Line graph on edge indices 1..e(G): two edges are adjacent when they share k-1 vertices.
inline Hypergraph line_graph(const Hypergraph& g) {
  std::map<Edge, std::vector<int>> by_face;
  const auto& edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for_each_combination(edges[i], g.k() - 1, [&](const std::vector<Vertex>& face) {
      by_face[face].push_back(static_cast<int>(i) + 1);
      return true;
    });
  }
  std::set<Edge> adj;
  for (const auto& [face, ids] : by_face)
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a + 1; b < ids.size(); ++b) adj.insert({ids[a], ids[b]});
  return Hypergraph::from_edge_set(static_cast<int>(edges.size()), 2, adj);
}

/// Tight components: connected components of the line graph, as edge blocks.
inline EdgePartition tight_components(const Hypergraph& g) {
  const auto& edges = g.edges();
  detail::DisjointSets ds(edges.size());
  std::map<Edge, std::size_t> first_with_face;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for_each_combination(edges[i], g.k() - 1, [&](const std::vector<Vertex>& face) {
      auto [it, inserted] = first_with_face.emplace(face, i);
      if (!inserted) ds.unite(it->second, i);
      return true;
    });
  }
  EdgePartition out;
  std::map<std::size_t, std::size_t> block_of_root;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [it, inserted] = block_of_root.emplace(ds.find(i), out.blocks.size());
    if (inserted) out.blocks.emplace_back();
    out.blocks[it->second].push_back(edges[i]);
  }
  for (const auto& block : out.blocks) {
    std::set<Vertex> vs;
    for (const auto& e : block) vs.insert(e.begin(), e.end());
    out.vertex_sets.emplace_back(vs.begin(), vs.end());
  }
  return out;
}

/// Components of the 2-shadow that contain at least one edge, with their edges.
inline EdgePartition components2(const Hypergraph& h) { return detail::vertex_components(h.n(), h.edges()); }
inline EdgePartition components2(const Digraph& h) { return detail::vertex_components(h.n(), h.tuples()); }

/// Edges of the clique graph K_t(G): t-sets all of whose k-subsets are edges of G.
inline Hypergraph clique_graph(const Hypergraph& g, int t) {
  if (t < g.k()) throw ParameterError("clique graph needs t >= k");
  const int k = g.k();
  std::vector<Edge> cliques;
  std::vector<Vertex> current;
  // Grow cliques in increasing vertex order; a new vertex must close an edge
  // with every (k-1)-subset of the current set.
  auto extends = [&](Vertex v) {
    if (static_cast<int>(current.size()) < k - 1) return true;
    bool ok = true;
    for_each_combination(current, k - 1, [&](const std::vector<Vertex>& face) {
      Edge e = face;
      e.push_back(v);
      if (!g.contains(e)) ok = false;
      return ok;
    });
    return ok;
  };
  auto rec = [&](auto&& self, Vertex from) -> void {
    if (static_cast<int>(current.size()) == t) {
      cliques.push_back(current);
      return;
    }
    for (Vertex v = from; v <= g.n(); ++v) {
      if (g.n() - v + 1 < t - static_cast<int>(current.size())) break;
      if (!extends(v)) continue;
      current.push_back(v);
      self(self, v + 1);
      current.pop_back();
    }
  };
  rec(rec, 1);
  return Hypergraph(g.n(), t, std::move(cliques));
}

/// All orientations of every edge: C->(G).
inline Digraph orient_all(const Hypergraph& g) {
  std::vector<Edge> tuples;
  for (const auto& e : g.edges()) {
    Edge p = e;
    do {
      tuples.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }
  return Digraph(g.n(), std::move(tuples));
}

inline Digraph digraph_union(const Digraph& a, const Digraph& b) {
  if (a.n() != b.n()) throw ParameterError("digraph union needs equal vertex counts");
  std::set<Edge> all(a.tuples().begin(), a.tuples().end());
  all.insert(b.tuples().begin(), b.tuples().end());
  return Digraph::from_tuple_set(a.n(), all);
}

/// The (k,l)-digraph C->(G) u C->(shadow_l G) in which l-cycles of G become chains.
/// For l = 0 or l >= k only the k-tuples are produced.
inline Digraph ell_cycle_host(const Hypergraph& g, int ell) {
  Digraph oriented = orient_all(g);
  if (ell <= 0 || ell >= g.k()) return oriented;
  return digraph_union(oriented, orient_all(l_shadow(g, ell)));
}

enum class DensityMode { exhaustive, sampled };

struct UniformDensityResult {
  bool holds = true;
  // X_1..X_k of the first violated inequality.
  std::optional<std::vector<std::vector<Vertex>>> witness;
  std::uint64_t tuples_tested = 0;
};

namespace detail {

// Number of ordered tuples (v_1..v_k) with {v_1..v_k} an edge and v_i in X_i.
inline std::int64_t tuple_count(const Hypergraph& g, std::span<const VertexMask> xs) {
  const int k = g.k();
  std::int64_t total = 0;
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (const auto& e : g.edges()) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) ok = (xs[static_cast<std::size_t>(i)] & vertex_bit(e[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])])) != 0;
      if (ok) ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return total;
}

}  // namespace detail

/// Tests e_G(X_1..X_k) >= d |X_1|...|X_k| - eps*n over all (or sampled) k-tuples of vertex sets.
/// The slack term is eps*n, taken verbatim; e_G counts ordered tuples v_i in X_i.
/// Exhaustive mode visits unordered k-multisets of subsets (e_G is symmetric in the X_i)
/// and requires n*k <= exhaustive_bits.
inline UniformDensityResult is_uniformly_dense(const Hypergraph& g, const Rational& eps, const Rational& d,
                                               DensityMode mode = DensityMode::exhaustive,
                                               std::uint64_t samples = 10000, std::uint64_t seed = 0,
                                               int exhaustive_bits = 20) {
  if (d <= 0 || d > 1) throw ParameterError("density d must lie in (0,1]");
  if (eps < 0) throw ParameterError("eps must be nonnegative");
  if (g.n() > kMaxMaskVertices) throw ParameterError("uniform density check supports n <= 64");
  const int n = g.n();
  const int k = g.k();
  const Rational slack = eps * n;
  UniformDensityResult result;
  std::vector<VertexMask> xs(static_cast<std::size_t>(k), 0);

  auto test = [&]() {
    ++result.tuples_tested;
    Rational rhs = d;
    for (auto x : xs) rhs *= std::popcount(x);
    rhs -= slack;
    if (Rational(detail::tuple_count(g, xs)) < rhs) {
      result.holds = false;
      std::vector<std::vector<Vertex>> w;
      for (auto x : xs) w.push_back(mask_vertices(x));
      result.witness = std::move(w);
      return false;
    }
    return true;
  };

  if (mode == DensityMode::exhaustive) {
    if (n * k > exhaustive_bits) {
      throw BudgetExceeded("exhaustive uniform-density check needs n*k <= " + std::to_string(exhaustive_bits));
    }
    const VertexMask full = n == 64 ? ~VertexMask{0} : (VertexMask{1} << n) - 1;
    // Masks X_1 >= X_2 >= ... >= X_k (as integers), starting from the full set;
    // every multiset of subsets is visited exactly once.
    auto rec_desc = [&](auto&& self, int pos, VertexMask hi) -> bool {
      if (pos == k) return test();
      for (VertexMask x = hi;; --x) {
        xs[static_cast<std::size_t>(pos)] = x;
        if (!self(self, pos + 1, x)) return false;
        if (x == 0) break;
      }
      return true;
    };
    rec_desc(rec_desc, 0, full);
    return result;
  }

  std::mt19937_64 rng(seed);
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (auto& x : xs) {
      x = 0;
      // Random density per set so that small and large sets are both visited.
      const std::uint64_t threshold = rng();
      for (int v = 1; v <= n; ++v)
        if (rng() < threshold) x |= vertex_bit(v);
    }
    if (!test()) break;
  }
  return result;
}

/// Degree-sequence class DegSeq_{t,mu}: sorted degrees satisfy d_i > (t-2)n/t + i + mu*n for i <= n/t.
inline bool check_degree_sequence(const Hypergraph& g, int t, const Rational& mu) {
  if (g.k() != 2) throw ParameterError("degree sequences are defined for 2-graphs");
  if (t < 2) throw ParameterError("t must be at least 2");
  const int n = g.n();
  auto deg = g.degrees();
  std::vector<int> sorted(deg.begin() + 1, deg.end());
  std::sort(sorted.begin(), sorted.end());
  for (int i = 1; static_cast<std::int64_t>(i) * t <= n; ++i) {
    Rational bound = Rational(t - 2) * n / t + i + mu * n;
    if (!(Rational(sorted[static_cast<std::size_t>(i - 1)]) > bound)) return false;
  }
  return true;
}

}  // namespace chainforge
