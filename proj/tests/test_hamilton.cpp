#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include <chainforge/framework.hpp>
#include <chainforge/hamilton.hpp>
#include <chainforge/property_graph.hpp>

#include "test_util.hpp"

using namespace chainforge;

namespace {

// Naive perfect matching test for 2-graphs: try every pairing of the vertex list.
bool pairing_exists(const std::set<Edge>& edges, std::vector<Vertex> rest) {
  if (rest.empty()) return true;
  const Vertex a = rest.front();
  for (std::size_t i = 1; i < rest.size(); ++i) {
    Edge e{a, rest[i]};
    std::sort(e.begin(), e.end());
    if (!edges.count(e)) continue;
    std::vector<Vertex> next;
    for (std::size_t j = 1; j < rest.size(); ++j)
      if (j != i) next.push_back(rest[j]);
    if (pairing_exists(edges, next)) return true;
  }
  return false;
}

Hypergraph k6_minus_matching() {
  std::vector<Edge> edges;
  for (int a = 1; a <= 6; ++a)
    for (int b = a + 1; b <= 6; ++b)
      if (!(a % 2 == 1 && b == a + 1)) edges.push_back({a, b});
  return Hypergraph(6, 2, edges);
}

// Closed tight walks via boolean powers of the state transition matrix; the shortest closed
// walk with a given residue lives in a product graph with k * |states| nodes.
bool aperiodic_oracle(const Hypergraph& g) {
  const int k = g.k();
  std::vector<Edge> states;
  for (const auto& e : g.edges()) {
    Edge p = e;
    do states.emplace_back(p.begin(), p.end() - 1);
    while (std::next_permutation(p.begin(), p.end()));
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  const std::size_t m = states.size();
  auto idx = [&](const Edge& s) { return static_cast<std::size_t>(std::lower_bound(states.begin(), states.end(), s) - states.begin()); };
  std::vector<std::vector<char>> step(m, std::vector<char>(m, 0));
  for (const auto& e : g.edges()) {
    Edge p = e;
    do step[idx(Edge(p.begin(), p.end() - 1))][idx(Edge(p.begin() + 1, p.end()))] = 1;
    while (std::next_permutation(p.begin(), p.end()));
  }
  auto power = step;
  const std::size_t limit = static_cast<std::size_t>(k) * m + 1;
  for (std::size_t len = 1; len <= limit; ++len) {
    if (len % static_cast<std::size_t>(k) == 1 % static_cast<std::size_t>(k))
      for (std::size_t i = 0; i < m; ++i)
        if (power[i][i]) return true;
    std::vector<std::vector<char>> next(m, std::vector<char>(m, 0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (power[i][j])
          for (std::size_t l = 0; l < m; ++l)
            if (step[j][l]) next[i][l] = 1;
    power = std::move(next);
  }
  return false;
}

}  // namespace

TEST(Connectivity, CompleteLooseHost) {
  auto host = complete_digraph(7, 3, 1);
  EXPECT_EQ(is_hamilton_L_connected(host, ell_cycle_link(3, 1)).value, Truth::yes);
}

TEST(Connectivity, K4GraphIsHamiltonConnected) {
  auto host = ell_cycle_host(complete_hypergraph(4, 2), 1);
  auto report = is_hamilton_L_connected(host, ell_cycle_link(2, 1));
  EXPECT_EQ(report.value, Truth::yes);
  EXPECT_EQ(report.searches, 12u);
}

TEST(Connectivity, SingleEndTupleFails) {
  std::vector<Edge> tuples;
  auto all = iota_vertices(5);
  for_each_combination(all, 3, [&](const std::vector<Vertex>& s) {
    Edge p = s;
    do tuples.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return true;
  });
  tuples.push_back({2});
  Digraph host(5, tuples);
  auto report = is_hamilton_L_connected(host, ell_cycle_link(3, 1));
  EXPECT_EQ(report.value, Truth::no);
}

TEST(Connectivity, CompleteHostsWithBuiltinLinks) {
  std::vector<Link> links{ell_cycle_link(2, 1), ell_cycle_link(3, 1), ell_cycle_link(3, 2), matching_link(2),
                          matching_link(3), power_link(2, 3)};
  for (const auto& link : links) {
    for (int n = std::max(link.order(), 2 * link.ell()); n <= 9; ++n) {
      if (!valid_open_length(link, n)) continue;
      if (link.ell() == 2 && n > 7) continue;  // keeps the pair enumeration small
      auto host = complete_digraph(n, link.k(), link.ell());
      EXPECT_EQ(is_hamilton_L_connected(host, link).value, Truth::yes) << serialize(link) << " n=" << n;
    }
  }
}

TEST(Connectivity, InvalidLengthIsFalse) {
  auto host = complete_digraph(6, 3, 1);
  EXPECT_EQ(is_hamilton_L_connected(host, ell_cycle_link(3, 1)).value, Truth::no);
}

TEST(Connectivity, BudgetGivesUnknown) {
  auto host = complete_digraph(9, 3, 1);
  std::vector<Edge> kept;
  for (const auto& t : host.tuples())
    if (!(t.size() == 3 && t[1] == 5)) kept.push_back(t);
  SearchOptions options;
  options.budget = 5;
  auto report = is_hamilton_L_connected(Digraph(9, kept), ell_cycle_link(3, 1), options);
  EXPECT_EQ(report.value, Truth::unknown);
}

TEST(StrongConnectivity, CompleteTripleSystem) {
  EXPECT_EQ(is_strongly_hamilton_l_connected(complete_hypergraph(5, 3), 1).value, Truth::yes);
}

TEST(StrongConnectivity, IsolatedVertex) {
  auto g = complete_hypergraph(4, 3).induced(iota_vertices(4));
  Hypergraph with_isolated(5, 3, g.edges());
  EXPECT_EQ(is_strongly_hamilton_l_connected(with_isolated, 1).value, Truth::no);
}

TEST(StrongConnectivity, DisjointComponents) {
  std::vector<Edge> edges;
  auto left = iota_vertices(5);
  std::vector<Vertex> right{6, 7, 8, 9, 10};
  for_each_combination(left, 3, [&](const std::vector<Vertex>& s) {
    edges.push_back(s);
    return true;
  });
  for_each_combination(right, 3, [&](const std::vector<Vertex>& s) {
    edges.push_back(s);
    return true;
  });
  // Vertex 11 touches both cliques, but no loose path can pass through it.
  edges.push_back({1, 2, 11});
  edges.push_back({6, 7, 11});
  EXPECT_EQ(is_strongly_hamilton_l_connected(Hypergraph(11, 3, edges), 1).value, Truth::no);
}

TEST(StrongConnectivity, RejectsBadEll) {
  EXPECT_THROW(is_strongly_hamilton_l_connected(complete_hypergraph(5, 3), 3), ParameterError);
  EXPECT_THROW(is_strongly_hamilton_l_connected(complete_hypergraph(5, 3), 0), ParameterError);
}

TEST(PropertyGraph, CompleteGraphMatchings) {
  auto pg = property_graph(8, perfect_matching_predicate(complete_hypergraph(8, 2)), 4, {});
  EXPECT_EQ(pg.edges.num_edges(), 70u);
  auto md = property_graph_min_degree(pg, 1);
  EXPECT_EQ(md.ratio, Rational(1));
}

TEST(PropertyGraph, K6MinusMatchingAgainstRecount) {
  const auto g = k6_minus_matching();
  auto pg = property_graph(6, perfect_matching_predicate(g), 4, {});
  const std::set<Edge> edges(g.edges().begin(), g.edges().end());
  std::set<Edge> expected;
  for (int a = 1; a <= 6; ++a)
    for (int b = a + 1; b <= 6; ++b)
      for (int c = b + 1; c <= 6; ++c)
        for (int d = c + 1; d <= 6; ++d)
          if (pairing_exists(edges, {a, b, c, d})) expected.insert({a, b, c, d});
  EXPECT_EQ(cf_test::edge_set(pg.edges.edges()), expected);
  // Every 4-set spans K4 minus at most two disjoint edges, which still has a perfect matching.
  EXPECT_EQ(expected.size(), 15u);

  std::map<Vertex, std::int64_t> per_vertex;
  for (const auto& e : expected)
    for (Vertex v : e) ++per_vertex[v];
  std::int64_t low = std::numeric_limits<std::int64_t>::max();
  for (Vertex v = 1; v <= 6; ++v) low = std::min(low, per_vertex[v]);
  auto md = property_graph_min_degree(pg, 1);
  EXPECT_EQ(md.value, low);
  EXPECT_EQ(md.ratio, Rational(low) / Rational(10));
}

TEST(PropertyGraph, RandomGraphsAgainstRecount) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = cf_test::random_hypergraph(7, 2, 0.6, rng);
    auto pg = property_graph(7, perfect_matching_predicate(g), 4, {});
    const std::set<Edge> edges(g.edges().begin(), g.edges().end());
    std::size_t count = 0;
    auto all = iota_vertices(7);
    for_each_combination(all, 4, [&](const std::vector<Vertex>& s) {
      count += pairing_exists(edges, s);
      return true;
    });
    EXPECT_EQ(pg.edges.num_edges(), count);
  }
}

TEST(PropertyGraph, EmptyGraphRatioZero) {
  auto pg = property_graph(6, perfect_matching_predicate(Hypergraph(6, 2, {})), 4, {});
  EXPECT_EQ(pg.edges.num_edges(), 0u);
  EXPECT_EQ(property_graph_min_degree(pg, 1).ratio, Rational(0));
  EXPECT_EQ(property_graph_min_degree(pg, 2).value, 0);
}

TEST(PropertyGraph, Errors) {
  auto pred = perfect_matching_predicate(complete_hypergraph(5, 2));
  EXPECT_THROW(property_graph(5, pred, 6, {}), ParameterError);
  auto pg = property_graph(5, pred, 4, {});
  EXPECT_THROW(property_graph_min_degree(pg, 4), ParameterError);
  PropertyOptions tiny;
  tiny.budget = 3;
  EXPECT_THROW(property_graph(5, pred, 2, tiny), BudgetExceeded);
  EXPECT_THROW(make_predicate(AnyGraph(complete_hypergraph(5, 2)), "no_such_predicate"), ParameterError);
}

TEST(PropertyGraph, NamedPredicates) {
  AnyGraph host = complete_hypergraph(7, 3);
  auto pred = make_predicate(host, "min_degree_at_least:1,1/2");
  auto pg = property_graph(7, pred, 5, {});
  EXPECT_EQ(pg.edges.num_edges(), 21u);
  auto ham = make_predicate(host, "hamilton_L_connected:ell_cycle:3,1");
  auto set = iota_vertices(5);
  EXPECT_EQ(ham.test(set), Truth::yes);
  auto strong = make_predicate(host, "strongly_hamilton_l_connected:1");
  EXPECT_EQ(strong.test(set), Truth::yes);
}

TEST(PropertyGraph, SampledModeEstimates) {
  // K6 minus a triangle: exactly the 3 four-sets containing the triangle fail, density 12/15.
  std::vector<Edge> edges;
  for (int a = 1; a <= 6; ++a)
    for (int b = a + 1; b <= 6; ++b)
      if (b > 3) edges.push_back({a, b});
  auto pred = perfect_matching_predicate(Hypergraph(6, 2, edges));
  PropertyOptions options;
  options.mode = PropertyMode::sampled;
  options.samples = 4000;
  SeededStream stream(11, 0);
  auto pg = property_graph(6, pred, 4, options, &stream);
  auto [lo, hi] = wilson_interval(pg.sampled_hits, pg.samples, 3.0);
  EXPECT_LE(lo, 0.8);
  EXPECT_GE(hi, 0.8);
  ASSERT_TRUE(pg.weakest_q_set().has_value());
  EXPECT_THROW(property_graph(6, pred, 4, options, nullptr), ParameterError);
}

TEST(FractionalMatching, TightCycle) {
  auto g = tight_cycle(7, 3);
  auto r = has_perfect_fractional_matching(g);
  ASSERT_TRUE(r.perfect);
  EXPECT_EQ(r.size, Rational(7) / 3);
  auto c9 = has_perfect_fractional_matching(tight_cycle(9, 3));
  ASSERT_TRUE(c9.perfect);
  EXPECT_EQ(c9.size, Rational(3));
}

TEST(FractionalMatching, Negative) {
  Hypergraph g(6, 3, {{1, 2, 3}});
  auto r = has_perfect_fractional_matching(g);
  EXPECT_FALSE(r.perfect);
  EXPECT_EQ(r.size, Rational(1));
  Hypergraph iso(7, 3, complete_hypergraph(6, 3).edges());
  EXPECT_FALSE(has_perfect_fractional_matching(iso).perfect);
}

TEST(FractionalMatching, CertificatesReverify) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 5 + trial % 3;
    auto g = cf_test::random_hypergraph(n, 3, 0.3, rng);
    auto r = has_perfect_fractional_matching(g);
    if (r.perfect) {
      Rational total = 0;
      std::vector<Rational> load(static_cast<std::size_t>(n) + 1);
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        EXPECT_GE(r.weights[i], 0);
        total += r.weights[i];
        for (Vertex v : g.edges()[i]) load[static_cast<std::size_t>(v)] += r.weights[i];
      }
      EXPECT_EQ(total, Rational(n) / 3);
      for (Vertex v = 1; v <= n; ++v) EXPECT_LE(load[static_cast<std::size_t>(v)], 1);
    } else {
      // Dual certificate: a fractional vertex cover of weight equal to the optimum, below n/k.
      Rational weight = 0;
      for (const auto& [v, y] : r.cover) {
        EXPECT_GT(y, 0);
        weight += y;
      }
      EXPECT_EQ(weight, r.size);
      EXPECT_LT(weight, Rational(n) / 3);
      for (const auto& e : g.edges()) {
        Rational sum = 0;
        for (Vertex v : e)
          if (r.cover.count(v)) sum += r.cover.at(v);
        EXPECT_GE(sum, 1);
      }
    }
  }
}

TEST(FractionalMatching, VertexSubset) {
  auto g = complete_hypergraph(8, 2);
  std::vector<Vertex> s{2, 4, 7};
  auto r = has_perfect_fractional_matching(g, s);
  EXPECT_TRUE(r.perfect);
  EXPECT_EQ(r.size, Rational(3) / 2);
}

TEST(Aperiodicity, Examples) {
  auto c7 = is_aperiodic(tight_cycle(7, 3));
  EXPECT_TRUE(c7.aperiodic);
  EXPECT_EQ(c7.walk_order, 7);
  EXPECT_FALSE(is_aperiodic(tight_cycle(6, 3)).aperiodic);
  EXPECT_FALSE(is_aperiodic(Hypergraph(3, 3, {{1, 2, 3}})).aperiodic);
  EXPECT_FALSE(is_aperiodic(Hypergraph(5, 3, {})).aperiodic);
  EXPECT_TRUE(is_aperiodic(complete_hypergraph(5, 3)).aperiodic);
  EXPECT_THROW(is_aperiodic(complete_hypergraph(7, 3), 10), BudgetExceeded);
}

TEST(Aperiodicity, AgreesWithMatrixOracle) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 4 + trial % 4;
    const int k = 2 + trial % 2;
    auto g = cf_test::random_hypergraph(n, k, k == 2 ? 0.3 : 0.15, rng);
    auto got = is_aperiodic(g);
    EXPECT_EQ(got.aperiodic, aperiodic_oracle(g)) << "trial " << trial;
    if (got.walk_order) {
      EXPECT_EQ(*got.walk_order % k, 1 % k);
    }
  }
}

TEST(Framework, CompleteAndEdgeless) {
  auto full = check_framework(complete_hypergraph(7, 3));
  EXPECT_TRUE(full.holds());
  EXPECT_EQ(full.component_count, 1u);
  auto none = check_framework(Hypergraph(6, 3, {}));
  EXPECT_FALSE(none.holds());
  EXPECT_FALSE(none.tight_component);
}

TEST(Framework, TightCycles) {
  EXPECT_TRUE(check_framework(tight_cycle(7, 3)).holds());
  auto c6 = check_framework(tight_cycle(6, 3));
  EXPECT_TRUE(c6.tight_component);
  EXPECT_TRUE(c6.perfect_fractional_matching);
  EXPECT_FALSE(c6.aperiodic);
}

TEST(Framework, NonSpanningComponent) {
  // Complete 3-graph on 6 of 7 vertices: one component, but it misses vertex 7.
  Hypergraph g(7, 3, complete_hypergraph(6, 3).edges());
  auto r = check_framework(g);
  EXPECT_FALSE(r.tight_component);
  EXPECT_FALSE(r.perfect_fractional_matching);
}

TEST(Framework, SelectorMustReturnSubgraph) {
  auto bad = [](const Hypergraph& g, std::span<const Vertex>) { return complete_hypergraph(g.n(), g.k()); };
  EXPECT_THROW(check_framework(tight_cycle(7, 3), bad), ParameterError);
  EXPECT_THROW(check_consistency_pair(tight_cycle(7, 3), bad), ParameterError);
}

TEST(Consistency, Examples) {
  auto whole = [](const Hypergraph& g, std::span<const Vertex>) { return g; };
  EXPECT_TRUE(check_consistency_pair(complete_hypergraph(6, 3), whole).holds);
  EXPECT_TRUE(check_consistency_pair(complete_hypergraph(6, 3)).holds);
  EXPECT_TRUE(check_consistency_pair(tight_cycle(7, 3)).holds);

  // Two disjoint K4^(3); the selector keeps the left clique while vertex 1 is present and
  // the right one otherwise, so deleting 1 and deleting 2 select disjoint cliques.
  std::vector<Edge> edges;
  std::vector<Vertex> left{1, 2, 3, 4}, right{5, 6, 7, 8};
  for (auto* side : {&left, &right})
    for_each_combination(*side, 3, [&](const std::vector<Vertex>& s) {
      edges.push_back(s);
      return true;
    });
  auto alternating = [](const Hypergraph& g, std::span<const Vertex> vertices) {
    const bool has_one = std::find(vertices.begin(), vertices.end(), 1) != vertices.end();
    std::vector<Edge> pick;
    for (const auto& block : tight_components(g).blocks)
      if ((block.front().front() <= 4) == has_one) pick = block;
    return Hypergraph(g.n(), g.k(), pick);
  };
  auto r = check_consistency_pair(Hypergraph(8, 3, edges), alternating);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.failing_pair.has_value());
  EXPECT_EQ(r.failing_pair->first, 1);
}
