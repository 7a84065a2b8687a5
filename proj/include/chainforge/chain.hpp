#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"
#include "link.hpp"

namespace chainforge {

/// Closed L-chain on [n]: ordering is a permutation of 1..n and every cyclic
/// window of r+l consecutive positions starting at a multiple of r carries an
/// order-preserving copy of the link.
struct ClosedChain {
  Link link;
  int n = 0;
  std::vector<Vertex> ordering;
  Digraph edges;
};

/// Open L-chain along an ordering of distinct vertices (not necessarily all of [n]).
struct OpenChain {
  Link link;
  std::vector<Vertex> ordering;
  Digraph edges;

  std::vector<Vertex> start() const {
    return {ordering.begin(), ordering.begin() + link.ell()};
  }
  std::vector<Vertex> end() const {
    return {ordering.end() - link.ell(), ordering.end()};
  }
};

namespace chain_detail {

inline bool is_permutation_of_range(std::span<const Vertex> ordering) {
  std::vector<bool> seen(ordering.size() + 1, false);
  for (Vertex v : ordering) {
    if (v < 1 || static_cast<std::size_t>(v) > ordering.size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

inline bool has_distinct_vertices(std::span<const Vertex> ordering) {
  std::set<Vertex> s(ordering.begin(), ordering.end());
  return s.size() == ordering.size();
}

inline std::set<Edge> realize(const Link& link, std::span<const Vertex> ordering, bool closed) {
  std::set<Edge> tuples;
  for (const auto& pos : chain_position_tuples(link, static_cast<int>(ordering.size()), closed)) {
    Edge t;
    t.reserve(pos.size());
    for (int p : pos) t.push_back(ordering[static_cast<std::size_t>(p)]);
    tuples.insert(std::move(t));
  }
  return tuples;
}

inline bool contains_chain(const Link& link, const Digraph& host, std::span<const Vertex> ordering, bool closed) {
  Edge t;
  for (const auto& pos : chain_position_tuples(link, static_cast<int>(ordering.size()), closed)) {
    t.clear();
    for (int p : pos) t.push_back(ordering[static_cast<std::size_t>(p)]);
    if (!host.has(t)) return false;
  }
  return true;
}

}  // namespace chain_detail

inline ClosedChain build_closed_chain(const Link& link, std::span<const Vertex> ordering) {
  const int n = static_cast<int>(ordering.size());
  if (n % link.r() != 0) throw ParameterError("closed chain order must be divisible by r");
  if (n < 2 * link.order()) throw ParameterError("closed chain needs n >= 2(r+l)");
  if (!chain_detail::is_permutation_of_range(ordering)) throw ParameterError("ordering is not a permutation of 1..n");
  auto tuples = chain_detail::realize(link, ordering, true);
  const std::size_t expected = static_cast<std::size_t>(n / link.r()) * link.num_edges();
  if (tuples.size() != expected) {
    throw InvariantViolation("closed chain windows collide: " + std::to_string(tuples.size()) + " tuples, expected " +
                             std::to_string(expected));
  }
  return ClosedChain{link, n, {ordering.begin(), ordering.end()}, Digraph::from_tuple_set(n, tuples)};
}

/// Builds the open chain along `ordering`; the result lives on vertex set [n_total].
inline OpenChain build_open_chain(const Link& link, std::span<const Vertex> ordering, int n_total) {
  const int n = static_cast<int>(ordering.size());
  if (!valid_open_length(link, n)) throw ParameterError("open chain order must be >= r+l and congruent to l mod r");
  if (!chain_detail::has_distinct_vertices(ordering)) throw ParameterError("open chain ordering repeats a vertex");
  auto tuples = chain_detail::realize(link, ordering, false);
  const std::size_t expected = static_cast<std::size_t>((n - link.ell()) / link.r()) * link.num_edges();
  if (tuples.size() != expected) throw InvariantViolation("open chain windows collide");
  return OpenChain{link, {ordering.begin(), ordering.end()}, Digraph::from_tuple_set(n_total, tuples)};
}

/// True iff `host` contains every tuple of the closed chain along `ordering`
/// (a permutation of 1..n with n = host.n()).
inline bool validate_closed_chain(const Link& link, const Digraph& host, std::span<const Vertex> ordering) {
  const int n = static_cast<int>(ordering.size());
  if (n != host.n() || !valid_closed_length(link, n)) return false;
  if (!chain_detail::is_permutation_of_range(ordering)) return false;
  return chain_detail::contains_chain(link, host, ordering, true);
}

/// True iff `host` contains every tuple of the open chain along `ordering` (distinct vertices).
inline bool validate_open_chain(const Link& link, const Digraph& host, std::span<const Vertex> ordering) {
  if (!valid_open_length(link, static_cast<int>(ordering.size()))) return false;
  for (Vertex v : ordering)
    if (v < 1 || v > host.n()) return false;
  if (!chain_detail::has_distinct_vertices(ordering)) return false;
  return chain_detail::contains_chain(link, host, ordering, false);
}

}  // namespace chainforge
