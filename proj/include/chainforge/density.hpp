#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"
#include "rational.hpp"

namespace chainforge {

/// d_1(F) = e(F) / (v(F) - 1), with v(F) = F.n().
inline Rational one_density(const Hypergraph& f) {
  if (f.n() < 2) throw ParameterError("1-density needs at least two vertices");
  return make_rational(static_cast<std::int64_t>(f.num_edges()), f.n() - 1);
}

/// True iff every proper subgraph F' (an edge subset with its vertex support, at
/// least one edge) has d_1(F') < d_1(F). Enumerates all edge subsets.
inline bool is_strictly_one_balanced(const Hypergraph& f, int max_edges = 24) {
  const Rational whole = one_density(f);
  const int e = static_cast<int>(f.num_edges());
  if (e > max_edges) throw BudgetExceeded("strict 1-balance check needs e(F) <= " + std::to_string(max_edges));
  if (f.n() > kMaxMaskVertices) throw BudgetExceeded("strict 1-balance check supports at most 64 vertices");
  std::vector<VertexMask> masks;
  for (const auto& edge : f.edges()) masks.push_back(mask_of(edge));
  const std::uint64_t total = std::uint64_t{1} << e;
  for (std::uint64_t subset = 1; subset < total; ++subset) {
    VertexMask support = 0;
    for (int i = 0; i < e; ++i)
      if ((subset >> i) & 1U) support |= masks[static_cast<std::size_t>(i)];
    const int v = std::popcount(support);
    const int edges_in = std::popcount(subset);
    if (edges_in == e && v == f.n()) continue;  // F itself
    if (make_rational(edges_in, v - 1) >= whole) return false;
  }
  return true;
}

namespace density_detail {

// Is there a bijection phi: [m] -> y with phi(e) in E(G) for every edge e of F?
class CopyFinder {
 public:
  CopyFinder(const Hypergraph& g, const Hypergraph& f) : g_(g), f_(f) {
    const int m = f.n();
    auto deg = f.degrees();
    order_.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order_[static_cast<std::size_t>(i)] = i + 1;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
    });
    position_.assign(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 0; i < m; ++i) position_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])] = i;
    // Each F edge is checked once its last vertex (in assignment order) is placed.
    closing_.resize(static_cast<std::size_t>(m));
    for (const auto& e : f.edges()) {
      int last = 0;
      for (Vertex x : e) last = std::max(last, position_[static_cast<std::size_t>(x)]);
      closing_[static_cast<std::size_t>(last)].push_back(e);
    }
    f_degree_ = std::move(deg);
  }

  bool has_copy(const std::vector<Vertex>& y) {
    const Hypergraph sub = g_.induced(y);
    g_degree_ = sub.degrees();
    sub_ = &sub;
    target_ = y;
    used_.assign(y.size(), false);
    image_.assign(static_cast<std::size_t>(f_.n()) + 1, 0);
    const bool found = extend(0);
    sub_ = nullptr;
    return found;
  }

 private:
  bool extend(int depth) {
    if (depth == f_.n()) return true;
    const Vertex x = order_[static_cast<std::size_t>(depth)];
    for (std::size_t j = 0; j < target_.size(); ++j) {
      if (used_[j]) continue;
      const Vertex v = target_[j];
      if (g_degree_[static_cast<std::size_t>(v)] < f_degree_[static_cast<std::size_t>(x)]) continue;
      image_[static_cast<std::size_t>(x)] = v;
      bool ok = true;
      for (const auto& e : closing_[static_cast<std::size_t>(depth)]) {
        Edge img;
        for (Vertex w : e) img.push_back(image_[static_cast<std::size_t>(w)]);
        if (!sub_->contains(img)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      used_[j] = true;
      if (extend(depth + 1)) return true;
      used_[j] = false;
    }
    return false;
  }

  const Hypergraph& g_;
  const Hypergraph& f_;
  std::vector<int> order_;
  std::vector<int> position_;
  std::vector<std::vector<Edge>> closing_;
  std::vector<int> f_degree_;
  std::vector<int> g_degree_;
  const Hypergraph* sub_ = nullptr;
  std::vector<Vertex> target_;
  std::vector<bool> used_;
  std::vector<Vertex> image_;
};

}  // namespace density_detail

/// The v(F)-graph on V(G) whose edges are the v(F)-sets Y such that G[Y] contains
/// a copy of F. Perfect matchings of the result are perfect F-tilings of G.
inline Hypergraph f_copy_hypergraph(const Hypergraph& g, const Hypergraph& f, std::uint64_t budget = 2'000'000) {
  if (f.k() != g.k()) throw ParameterError("F and G must have the same uniformity");
  const int m = f.n();
  if (m < 1 || m > g.n()) throw ParameterError("v(F) must be between 1 and n");
  if (binomial(g.n(), m) > BigInt(budget)) throw BudgetExceeded("too many v(F)-subsets to test");
  density_detail::CopyFinder finder(g, f);
  std::vector<Edge> edges;
  auto all = iota_vertices(g.n());
  for_each_combination(all, m, [&](const std::vector<Vertex>& y) {
    if (finder.has_copy(y)) edges.push_back(y);
    return true;
  });
  return Hypergraph(g.n(), m, std::move(edges));
}

}  // namespace chainforge
