#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "hypercore.hpp"
#include "hypergraph.hpp"
#include "link.hpp"
#include "search.hpp"

namespace chainforge {

enum class Truth { yes, no, unknown };

inline const char* to_string(Truth t) {
  switch (t) {
    case Truth::yes: return "true";
    case Truth::no: return "false";
    case Truth::unknown: return "unknown";
  }
  return "?";
}

struct ConnectivityReport {
  Truth value = Truth::no;
  std::string reason;
  // Endpoint pair (X, Y) whose chain is missing (value no) or undecided (value unknown).
  std::optional<std::pair<Edge, Edge>> pair;
  std::uint64_t searches = 0;
};

namespace hamilton_detail {

inline bool disjoint(const Edge& a, const Edge& b) {
  for (Vertex x : a)
    for (Vertex y : b)
      if (x == y) return false;
  return true;
}

}  // namespace hamilton_detail

/// Hamilton L-connectedness of host[vertices]: at least two disjoint l-tuples of the host
/// lie inside the set, and every ordered pair (X, Y) of disjoint ones is joined by a
/// spanning open L-chain from X to Y. For l = 0 this reads: a spanning open chain exists.
inline ConnectivityReport is_hamilton_L_connected(const Digraph& host, const Link& link, std::span<const Vertex> vertices,
                                                  SearchOptions options = {}) {
  ConnectivityReport report;
  const int n = static_cast<int>(vertices.size());
  if (!valid_open_length(link, n)) {
    report.reason = "vertex count admits no spanning open chain";
    return report;
  }
  if (link.ell() == 0) {
    auto res = find_hamilton_chain(host, link, vertices, std::nullopt, std::nullopt, false, options);
    report.searches = 1;
    report.value = res.status == SearchStatus::found ? Truth::yes
                   : res.status == SearchStatus::none ? Truth::no
                                                      : Truth::unknown;
    if (report.value == Truth::no) report.reason = "no spanning open chain";
    if (report.value == Truth::unknown) report.reason = "search budget exhausted";
    return report;
  }
  VertexMask inside = mask_of(vertices);
  // Every search below reads only tuples inside the set, so restrict the host once.
  std::vector<Edge> within;
  for (const auto& t : host.tuples())
    if ((mask_of(t) & ~inside) == 0) within.push_back(t);
  const Digraph sub(host.n(), std::move(within));
  std::vector<Edge> ends;
  for (const auto& t : sub.tuples())
    if (static_cast<int>(t.size()) == link.ell() && (mask_of(t) & ~inside) == 0) ends.push_back(t);
  bool two_disjoint = false;
  for (std::size_t a = 0; a < ends.size() && !two_disjoint; ++a)
    for (std::size_t b = a + 1; b < ends.size() && !two_disjoint; ++b) two_disjoint = hamilton_detail::disjoint(ends[a], ends[b]);
  if (!two_disjoint) {
    report.reason = "fewer than two disjoint l-tuples";
    return report;
  }
  const auto incident = std::make_shared<const search_detail::IncidentLists>(search_detail::incident_masks(sub, link, inside));
  std::optional<std::pair<Edge, Edge>> undecided;
  for (const auto& x : ends) {
    for (const auto& y : ends) {
      if (!hamilton_detail::disjoint(x, y)) continue;
      auto res = search_detail::HamiltonSearch(sub, link, vertices, x, y, false, options, incident).run();
      ++report.searches;
      if (res.status == SearchStatus::none) {
        report.value = Truth::no;
        report.reason = "no spanning chain between an endpoint pair";
        report.pair = std::make_pair(x, y);
        return report;
      }
      if (res.status == SearchStatus::unknown && !undecided) undecided = std::make_pair(x, y);
    }
  }
  if (undecided) {
    report.value = Truth::unknown;
    report.reason = "search budget exhausted";
    report.pair = undecided;
    return report;
  }
  report.value = Truth::yes;
  return report;
}

inline ConnectivityReport is_hamilton_L_connected(const Digraph& host, const Link& link, SearchOptions options = {}) {
  auto all = iota_vertices(host.n());
  return is_hamilton_L_connected(host, link, all, options);
}

/// Strong Hamilton l-connectedness of a k-graph: delta_l(G) > 0 and every two disjoint
/// ordered l-sets of the l-shadow are the ends of a Hamilton l-path. Decided on the
/// digraph C->(G) u C->(shadow_l G) with the l-cycle link.
inline ConnectivityReport is_strongly_hamilton_l_connected(const Hypergraph& g, int ell, SearchOptions options = {}) {
  if (ell < 1 || ell >= g.k()) throw ParameterError("strong Hamilton l-connectedness needs 1 <= l < k");
  ConnectivityReport report;
  if (g.n() < g.k() || degree_min(g, ell) == 0) {
    report.reason = "minimum l-degree is zero";
    return report;
  }
  return is_hamilton_L_connected(ell_cycle_host(g, ell), ell_cycle_link(g.k(), ell), options);
}

}  // namespace chainforge
