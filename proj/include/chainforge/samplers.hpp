#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"
#include "random.hpp"

namespace chainforge {

namespace sampler_detail {

inline void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0,1]");
}

}  // namespace sampler_detail

/// Keeps each edge independently with probability p; the vertex set is unchanged.
inline Hypergraph sparsify(const Hypergraph& g, double p, SeededStream& stream) {
  sampler_detail::check_probability(p, "retention probability");
  std::vector<Edge> kept;
  for (const auto& e : g.edges())
    if (stream.bernoulli(p)) kept.push_back(e);
  return Hypergraph(g.n(), g.k(), std::move(kept));
}

/// Digraph version: every tuple (of every length) is an edge and is kept independently.
inline Digraph sparsify(const Digraph& d, double p, SeededStream& stream) {
  sampler_detail::check_probability(p, "retention probability");
  std::vector<Edge> kept;
  for (const auto& t : d.tuples())
    if (stream.bernoulli(p)) kept.push_back(t);
  return Digraph(d.n(), std::move(kept));
}

/// Number of k-tuples of distinct entries from [n].
inline std::uint64_t falling_factorial(int n, int k) {
  std::uint64_t out = 1;
  for (int i = 0; i < k; ++i) {
    const auto f = static_cast<std::uint64_t>(n - i);
    if (f != 0 && out > ~std::uint64_t{0} / f) throw BudgetExceeded("tuple universe exceeds 64 bits");
    out *= f;
  }
  return out;
}

/// The index-th k-tuple of distinct entries of [n] in lexicographic order.
inline Edge unrank_tuple(int n, int k, std::uint64_t index) {
  std::vector<Vertex> pool = iota_vertices(n);
  Edge t;
  std::uint64_t block = falling_factorial(n - 1, k - 1);
  for (int i = 0; i < k; ++i) {
    const auto pos = static_cast<std::size_t>(index / block);
    index %= block;
    t.push_back(pool[pos]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos));
    if (i + 1 < k) block /= static_cast<std::uint64_t>(n - i - 1);
  }
  return t;
}

/// q-binomial subset of the k-tuples of distinct entries of [n], in lexicographic order.
/// Gaps between kept tuples are geometric, so the universe is never materialized.
inline std::vector<Edge> binomial_tuple_set(int n, int k, double q, SeededStream& stream) {
  sampler_detail::check_probability(q, "inclusion probability");
  if (k < 1 || n < k) throw ParameterError("binomial_tuple_set needs 1 <= k <= n");
  const std::uint64_t total = falling_factorial(n, k);
  std::vector<Edge> out;
  if (q == 0.0) return out;
  if (q == 1.0) {
    for (std::uint64_t i = 0; i < total; ++i) out.push_back(unrank_tuple(n, k, i));
    return out;
  }
  const double log_miss = std::log1p(-q);
  std::uint64_t index = 0;
  while (true) {
    // Number of skipped tuples before the next kept one: floor(log U / log(1-q)).
    const double u = 1.0 - stream.uniform01();  // in (0, 1]
    const double skip = std::floor(std::log(u) / log_miss);
    if (skip >= static_cast<double>(total - index)) break;
    index += static_cast<std::uint64_t>(skip);
    out.push_back(unrank_tuple(n, k, index));
    if (++index >= total) break;
  }
  return out;
}

/// Uniform Hamilton cycle of K_n as its sorted list of n 2-edges. Each cycle arises from
/// exactly 2n vertex orderings, so a uniform ordering gives a uniform cycle.
inline std::vector<Edge> sample_hamilton_cycle_uniform(int n, SeededStream& stream) {
  if (n < 3) throw ParameterError("Hamilton cycles need n >= 3");
  auto order = iota_vertices(n);
  stream.shuffle(order);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    Vertex a = order[static_cast<std::size_t>(i)];
    Vertex b = order[static_cast<std::size_t>((i + 1) % n)];
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace chainforge
