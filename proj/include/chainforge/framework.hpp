#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hypercore.hpp"
#include "hypergraph.hpp"
#include "lp.hpp"
#include "rational.hpp"

namespace chainforge {

struct FractionalMatchingResult {
  bool perfect = false;
  Rational size;    // maximum fractional matching size
  Rational target;  // |S|/k
  std::vector<Rational> weights;       // per edge of the input, in edge order (when perfect)
  std::map<Vertex, Rational> cover;    // fractional vertex cover of weight `size` (when not perfect)
};

/// Maximum fractional matching of G on vertex set S (edges outside S are ignored), solved
/// exactly. Perfect iff the maximum equals |S|/k; then `weights` is a witness. Otherwise the
/// optimal dual, a fractional vertex cover of total weight < |S|/k, certifies infeasibility.
inline FractionalMatchingResult has_perfect_fractional_matching(const Hypergraph& g, std::span<const Vertex> vertices) {
  FractionalMatchingResult out;
  out.target = make_rational(static_cast<std::int64_t>(vertices.size()), g.k());
  std::vector<int> row(static_cast<std::size_t>(g.n()) + 1, -1);
  int rows = 0;
  for (Vertex v : vertices) row[static_cast<std::size_t>(v)] = rows++;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const auto& e = g.edges()[i];
    if (std::all_of(e.begin(), e.end(), [&](Vertex v) { return row[static_cast<std::size_t>(v)] >= 0; })) used.push_back(i);
  }
  std::vector<std::vector<Rational>> a(static_cast<std::size_t>(rows), std::vector<Rational>(used.size()));
  for (std::size_t j = 0; j < used.size(); ++j)
    for (Vertex v : g.edges()[used[j]]) a[static_cast<std::size_t>(row[static_cast<std::size_t>(v)])][j] = 1;
  std::vector<Rational> b(static_cast<std::size_t>(rows), Rational(1));
  std::vector<Rational> c(used.size(), Rational(1));
  auto lp = solve_lp(a, b, c);
  out.size = lp.objective;
  out.perfect = out.size == out.target;
  if (out.perfect) {
    out.weights.assign(g.edges().size(), Rational(0));
    for (std::size_t j = 0; j < used.size(); ++j) out.weights[used[j]] = lp.x[j];
  } else {
    for (Vertex v : vertices)
      if (lp.y[static_cast<std::size_t>(row[static_cast<std::size_t>(v)])] != 0) out.cover[v] = lp.y[static_cast<std::size_t>(row[static_cast<std::size_t>(v)])];
  }
  return out;
}

inline FractionalMatchingResult has_perfect_fractional_matching(const Hypergraph& g) {
  auto all = iota_vertices(g.n());
  return has_perfect_fractional_matching(g, all);
}

struct AperiodicityResult {
  bool aperiodic = false;
  std::optional<int> walk_order;  // shortest closed tight walk of order 1 mod k
  std::size_t states = 0;
};

/// Searches for a closed tight walk whose order is 1 mod k. States are ordered (k-1)-tuples
/// that extend to an edge; a step appends a vertex completing an edge and drops the oldest.
/// BFS over (state, walk length mod k) from each start state.
inline AperiodicityResult is_aperiodic(const Hypergraph& g, std::size_t max_states = 20'000) {
  const int k = g.k();
  AperiodicityResult out;
  std::map<Edge, int> index;
  std::vector<Edge> states;
  for (const auto& e : g.edges()) {
    Edge p = e;
    do {
      Edge s(p.begin(), p.end() - 1);
      if (index.emplace(s, static_cast<int>(states.size())).second) {
        states.push_back(s);
        if (states.size() > max_states) throw BudgetExceeded("aperiodicity state space exceeds the budget");
      }
    } while (std::next_permutation(p.begin(), p.end()));
  }
  out.states = states.size();
  std::vector<std::vector<int>> next(states.size());
  for (const auto& e : g.edges()) {
    Edge p = e;
    do {
      Edge from(p.begin(), p.end() - 1);
      Edge to(p.begin() + 1, p.end());
      next[static_cast<std::size_t>(index.at(from))].push_back(index.at(to));
    } while (std::next_permutation(p.begin(), p.end()));
  }
  const std::size_t num = states.size();
  std::vector<int> dist(num * static_cast<std::size_t>(k));
  for (std::size_t start = 0; start < num; ++start) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<std::size_t> queue;
    dist[start * static_cast<std::size_t>(k)] = 0;
    queue.push_back(start * static_cast<std::size_t>(k));
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      const std::size_t s = cur / static_cast<std::size_t>(k);
      const int res = static_cast<int>(cur % static_cast<std::size_t>(k));
      for (int t : next[s]) {
        const std::size_t nxt = static_cast<std::size_t>(t) * static_cast<std::size_t>(k) + static_cast<std::size_t>((res + 1) % k);
        if (dist[nxt] >= 0) continue;
        dist[nxt] = dist[cur] + 1;
        queue.push_back(nxt);
      }
    }
    const int back = dist[start * static_cast<std::size_t>(k) + static_cast<std::size_t>(1 % k)];
    if (back > 0 && (!out.walk_order || back < *out.walk_order)) out.walk_order = back;
  }
  out.aperiodic = out.walk_order.has_value();
  return out;
}

/// True iff the graph has at least one edge and its line graph is connected.
inline bool is_tightly_connected(const Hypergraph& g) { return !g.empty() && tight_components(g).size() == 1; }

/// Maps an induced subgraph (given with its vertex set) to a chosen subgraph.
using FrameworkSelector = std::function<Hypergraph(const Hypergraph&, std::span<const Vertex>)>;

/// Largest tight component that has a perfect fractional matching on the whole vertex set;
/// ties go to the lexicographically smallest edge list. If none qualifies, the largest component.
inline Hypergraph default_framework_selector(const Hypergraph& g, std::span<const Vertex> vertices) {
  auto comps = tight_components(g);
  std::optional<std::vector<Edge>> best;
  bool best_pfm = false;
  for (const auto& block : comps.blocks) {
    Hypergraph h(g.n(), g.k(), block);
    const bool pfm = has_perfect_fractional_matching(h, vertices).perfect;
    auto better = [&] {
      if (!best) return true;
      if (pfm != best_pfm) return pfm;
      if (block.size() != best->size()) return block.size() > best->size();
      return block < *best;
    };
    if (better()) {
      best = block;
      best_pfm = pfm;
    }
  }
  return Hypergraph(g.n(), g.k(), best ? *best : std::vector<Edge>{});
}

struct FrameworkReport {
  bool tight_component = false;
  bool perfect_fractional_matching = false;
  bool aperiodic = false;
  std::size_t component_count = 0;  // tight components of G
  Hypergraph selected;              // F(G)
  FractionalMatchingResult matching;
  AperiodicityResult walk;

  bool holds() const { return tight_component && perfect_fractional_matching && aperiodic; }
};

/// (F1)-(F3) for a single graph: F(G) is a spanning tight component (every vertex of G is
/// covered), has a perfect fractional matching, and has a closed tight walk of order 1 mod k.
inline FrameworkReport check_framework(const Hypergraph& g, const FrameworkSelector& selector = default_framework_selector) {
  FrameworkReport report;
  auto all = iota_vertices(g.n());
  report.component_count = tight_components(g).size();
  report.selected = selector(g, all);
  for (const auto& e : report.selected.edges())
    if (!g.contains(e)) throw ParameterError("framework selector returned a non-subgraph");
  const auto& f = report.selected;
  std::set<Vertex> covered;
  for (const auto& e : f.edges()) covered.insert(e.begin(), e.end());
  report.tight_component = is_tightly_connected(f) && static_cast<int>(covered.size()) == g.n();
  report.matching = has_perfect_fractional_matching(f, all);
  report.perfect_fractional_matching = report.matching.perfect;
  report.walk = is_aperiodic(f);
  report.aperiodic = report.walk.aperiodic;
  return report;
}

struct ConsistencyReport {
  bool holds = true;
  std::optional<std::pair<Vertex, Vertex>> failing_pair;  // deleted vertices u < v
};

/// (F4) on an (s+1)-vertex graph: for all distinct u, v the union F(G-u) u F(G-v) is tightly connected.
inline ConsistencyReport check_consistency_pair(const Hypergraph& g_plus,
                                                const FrameworkSelector& selector = default_framework_selector) {
  const int n = g_plus.n();
  std::vector<Hypergraph> chosen;
  for (Vertex u = 1; u <= n; ++u) {
    std::vector<Vertex> rest;
    for (Vertex v = 1; v <= n; ++v)
      if (v != u) rest.push_back(v);
    Hypergraph minus = g_plus.induced(rest);
    Hypergraph f = selector(minus, rest);
    for (const auto& e : f.edges())
      if (!minus.contains(e)) throw ParameterError("framework selector returned a non-subgraph");
    chosen.push_back(std::move(f));
  }
  ConsistencyReport report;
  for (Vertex u = 1; u <= n; ++u)
    for (Vertex v = u + 1; v <= n; ++v) {
      std::set<Edge> all(chosen[static_cast<std::size_t>(u - 1)].edges().begin(), chosen[static_cast<std::size_t>(u - 1)].edges().end());
      all.insert(chosen[static_cast<std::size_t>(v - 1)].edges().begin(), chosen[static_cast<std::size_t>(v - 1)].edges().end());
      if (!is_tightly_connected(Hypergraph::from_edge_set(n, g_plus.k(), all))) {
        report.holds = false;
        report.failing_pair = std::make_pair(u, v);
        return report;
      }
    }
  return report;
}

}  // namespace chainforge
