#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace chainforge {

// Vertices are the dense integers 1..n.
using Vertex = int;
// A sorted vertex set (undirected edge) or an ordered tuple (directed edge).
using Edge = std::vector<Vertex>;
using VertexMask = std::uint64_t;

inline constexpr int kMaxMaskVertices = 64;
inline constexpr int kMaxTupleLength = 7;
inline constexpr int kMaxIndexedVertex = 255;

inline VertexMask vertex_bit(Vertex v) { return VertexMask{1} << (v - 1); }

inline VertexMask mask_of(std::span<const Vertex> vertices) {
  VertexMask m = 0;
  for (Vertex v : vertices) m |= vertex_bit(v);
  return m;
}

inline std::vector<Vertex> mask_vertices(VertexMask m) {
  std::vector<Vertex> out;
  while (m) {
    out.push_back(std::countr_zero(m) + 1);
    m &= m - 1;
  }
  return out;
}

inline std::vector<Vertex> iota_vertices(int n) {
  std::vector<Vertex> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  return v;
}

/// Calls fn(subset) for every r-subset of `ground` in lexicographic order of positions.
/// Stops early when fn returns false. Returns false iff stopped early.
template <class Fn>
bool for_each_combination(std::span<const Vertex> ground, int r, Fn&& fn) {
  const int n = static_cast<int>(ground.size());
  if (r < 0 || r > n) return true;
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::vector<Vertex> subset(static_cast<std::size_t>(r));
  while (true) {
    for (int i = 0; i < r; ++i) subset[static_cast<std::size_t>(i)] = ground[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    if (!fn(std::as_const(subset))) return false;
    int i = r - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) return true;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

/// Undirected k-uniform hypergraph on [n]. Edges are sorted k-sets; the edge list is sorted.
class Hypergraph {
 public:
  Hypergraph() = default;

  Hypergraph(int n, int k, std::vector<Edge> edges) : n_(n), k_(k), edges_(std::move(edges)) {
    if (k_ < 1) throw ParameterError("uniformity must be positive");
    if (n_ < 0) throw ParameterError("vertex count must be nonnegative");
    for (auto& e : edges_) {
      if (static_cast<int>(e.size()) != k_) {
        throw ParameterError("edge of size " + std::to_string(e.size()) + " in a " +
                             std::to_string(k_) + "-graph");
      }
      std::sort(e.begin(), e.end());
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] < 1 || e[i] > n_) throw ParameterError("vertex " + std::to_string(e[i]) + " out of range");
        if (i > 0 && e[i] == e[i - 1]) throw ParameterError("repeated vertex in edge");
      }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
      throw ParameterError("duplicate edge");
    }
  }

  /// Builds from a possibly redundant edge collection, silently merging duplicates.
  static Hypergraph from_edge_set(int n, int k, const std::set<Edge>& edges) {
    std::vector<Edge> list;
    list.reserve(edges.size());
    for (const auto& e : edges) {
      Edge s = e;
      std::sort(s.begin(), s.end());
      list.push_back(std::move(s));
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    return Hypergraph(n, k, std::move(list));
  }

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }

  bool contains(std::span<const Vertex> edge) const {
    Edge e(edge.begin(), edge.end());
    std::sort(e.begin(), e.end());
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  /// The subgraph induced on `vertices` (labels are kept, vertex count stays n).
  Hypergraph induced(std::span<const Vertex> vertices) const {
    std::vector<bool> in(static_cast<std::size_t>(n_) + 1, false);
    for (Vertex v : vertices) in[static_cast<std::size_t>(v)] = true;
    std::vector<Edge> kept;
    for (const auto& e : edges_) {
      if (std::all_of(e.begin(), e.end(), [&](Vertex v) { return in[static_cast<std::size_t>(v)]; })) {
        kept.push_back(e);
      }
    }
    return Hypergraph(n_, k_, std::move(kept));
  }

  std::vector<int> degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_) + 1, 0);
    for (const auto& e : edges_)
      for (Vertex v : e) ++d[static_cast<std::size_t>(v)];
    return d;
  }

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  int n_ = 0;
  int k_ = 2;
  std::vector<Edge> edges_;
};

inline Hypergraph complete_hypergraph(int n, int k) {
  std::vector<Edge> edges;
  auto all = iota_vertices(n);
  for_each_combination(all, k, [&](const std::vector<Vertex>& s) {
    edges.push_back(s);
    return true;
  });
  return Hypergraph(n, k, std::move(edges));
}

/// Tight cycle C_n^(k): every k cyclically consecutive vertices of 1..n form an edge.
inline Hypergraph tight_cycle(int n, int k) {
  if (n <= k) throw ParameterError("tight cycle needs n > k");
  std::set<Edge> edges;
  for (int i = 0; i < n; ++i) {
    Edge e;
    for (int j = 0; j < k; ++j) e.push_back((i + j) % n + 1);
    edges.insert(e);
  }
  return Hypergraph::from_edge_set(n, k, edges);
}

/// Directed hypergraph on [n]: tuples of distinct vertices, mixed lengths allowed.
/// Tuples are kept sorted lexicographically; a hashed index gives O(1) membership.
class Digraph {
 public:
  Digraph() = default;

  Digraph(int n, std::vector<Edge> tuples) : n_(n), tuples_(std::move(tuples)) {
    if (n_ < 0) throw ParameterError("vertex count must be nonnegative");
    for (const auto& t : tuples_) {
      if (t.size() > static_cast<std::size_t>(kMaxTupleLength)) {
        throw ParameterError("tuple longer than " + std::to_string(kMaxTupleLength));
      }
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < 1 || t[i] > n_) throw ParameterError("vertex " + std::to_string(t[i]) + " out of range");
        for (std::size_t j = 0; j < i; ++j)
          if (t[i] == t[j]) throw ParameterError("repeated vertex in tuple");
      }
    }
    std::sort(tuples_.begin(), tuples_.end(), tuple_less);
    if (std::adjacent_find(tuples_.begin(), tuples_.end()) != tuples_.end()) {
      throw ParameterError("duplicate tuple");
    }
    rebuild_index();
  }

  static Digraph from_tuple_set(int n, const std::set<Edge>& tuples) {
    return Digraph(n, std::vector<Edge>(tuples.begin(), tuples.end()));
  }

  int n() const noexcept { return n_; }
  const std::vector<Edge>& tuples() const noexcept { return tuples_; }
  std::size_t num_tuples() const noexcept { return tuples_.size(); }
  const std::set<int>& uniformities() const noexcept { return uniformities_; }

  bool has(std::span<const Vertex> tuple) const {
    if (tuple.size() > static_cast<std::size_t>(kMaxTupleLength)) return false;
    return index_.count(encode(tuple)) > 0;
  }

  /// Tuples of one length (the restriction G^(len)).
  std::vector<Edge> tuples_of(int len) const {
    std::vector<Edge> out;
    for (const auto& t : tuples_)
      if (static_cast<int>(t.size()) == len) out.push_back(t);
    return out;
  }

  Digraph restrict_to_length(int len) const { return Digraph(n_, tuples_of(len)); }

  bool operator==(const Digraph& o) const { return n_ == o.n_ && tuples_ == o.tuples_; }

  static std::uint64_t encode(std::span<const Vertex> tuple) {
    std::uint64_t key = tuple.size();
    int shift = 8;
    for (Vertex v : tuple) {
      key |= static_cast<std::uint64_t>(v) << shift;
      shift += 8;
    }
    return key;
  }

 private:
  static bool tuple_less(const Edge& a, const Edge& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }

  void rebuild_index() {
    if (n_ > kMaxIndexedVertex) throw ParameterError("digraphs support at most 255 vertices");
    index_.clear();
    index_.reserve(tuples_.size() * 2);
    for (const auto& t : tuples_) {
      index_.insert(encode(t));
      uniformities_.insert(static_cast<int>(t.size()));
    }
  }

  int n_ = 0;
  std::vector<Edge> tuples_;
  std::set<int> uniformities_;
  std::unordered_set<std::uint64_t> index_;
};

/// Complete (k,l)-digraph: every k-tuple and every l-tuple of distinct vertices.
inline Digraph complete_digraph(int n, int k, int ell) {
  std::set<Edge> tuples;
  auto all = iota_vertices(n);
  for (int len : {k, ell}) {
    if (len <= 0) continue;
    for_each_combination(all, len, [&](const std::vector<Vertex>& s) {
      Edge p = s;
      do {
        tuples.insert(p);
      } while (std::next_permutation(p.begin(), p.end()));
      return true;
    });
  }
  return Digraph::from_tuple_set(n, tuples);
}

/// Blocks of an edge partition together with the vertex support of each block.
struct EdgePartition {
  std::vector<std::vector<Edge>> blocks;
  std::vector<std::vector<Vertex>> vertex_sets;

  std::size_t size() const noexcept { return blocks.size(); }
};

}  // namespace chainforge
