#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <chainforge/hypercore.hpp>

#include "test_util.hpp"

using namespace chainforge;

namespace {

Hypergraph two_triangles() { return Hypergraph(6, 2, {{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}, {4, 6}}); }

// Independent count of ordered tuples with v_i in X_i: loop over all ordered k-tuples of vertices.
std::int64_t naive_tuple_count(const Hypergraph& g, const std::vector<std::vector<Vertex>>& xs) {
  std::int64_t count = 0;
  const int k = g.k();
  std::vector<Vertex> t(static_cast<std::size_t>(k));
  auto rec = [&](auto&& self, int i) -> void {
    if (i == k) {
      std::set<Vertex> distinct(t.begin(), t.end());
      if (static_cast<int>(distinct.size()) == k && g.contains(t)) ++count;
      return;
    }
    for (Vertex v : xs[static_cast<std::size_t>(i)]) {
      t[static_cast<std::size_t>(i)] = v;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return count;
}

}  // namespace

TEST(DegreeMin, WorkedExamples) {
  auto k4 = complete_hypergraph(4, 3);
  EXPECT_EQ(degree_min(k4, 2), 2);
  EXPECT_EQ(degree_min(k4, 1), 3);
  EXPECT_EQ(degree_min(two_triangles(), 1), 2);
}

TEST(DegreeMin, RejectsBadOrder) {
  auto k4 = complete_hypergraph(4, 3);
  EXPECT_THROW(degree_min(k4, 0), ParameterError);
  EXPECT_THROW(degree_min(k4, 3), ParameterError);
}

TEST(DegreeMin, MissingSetsGiveZero) {
  Hypergraph g(5, 3, {{1, 2, 3}, {1, 2, 4}});
  EXPECT_EQ(degree_min(g, 1), 0);
  EXPECT_EQ(degree_min(g, 2), 0);
}

TEST(DegreeMin, CompleteGraphsMatchBinomial) {
  for (int n = 3; n <= 8; ++n)
    for (int k = 2; k <= n; ++k)
      for (int d = 1; d < k; ++d) {
        auto g = complete_hypergraph(n, k);
        EXPECT_EQ(BigInt(degree_min(g, d)), binomial(n - d, k - d)) << n << ' ' << k << ' ' << d;
      }
}

TEST(Shadow, Examples) {
  Hypergraph one(3, 3, {{1, 2, 3}});
  EXPECT_EQ(shadow2(one), complete_hypergraph(3, 2));
  EXPECT_TRUE(shadow2(Hypergraph(4, 3, {})).empty());
  Hypergraph two(5, 3, {{1, 2, 3}, {1, 4, 5}});
  EXPECT_EQ(shadow2(two), Hypergraph(5, 2, {{1, 2}, {1, 3}, {2, 3}, {1, 4}, {1, 5}, {4, 5}}));
  Digraph d(3, {{3, 1}, {2, 3, 1}});
  EXPECT_EQ(shadow2(d), complete_hypergraph(3, 2));
}

TEST(LShadow, Examples) {
  EXPECT_EQ(l_shadow(Hypergraph(3, 3, {{1, 2, 3}}), 2), complete_hypergraph(3, 2));
  EXPECT_EQ(l_shadow(complete_hypergraph(4, 3), 1).num_edges(), 4u);
  Hypergraph g(5, 3, {{1, 2, 3}, {3, 4, 5}});
  EXPECT_EQ(l_shadow(g, 2), Hypergraph(5, 2, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}));
  EXPECT_THROW(l_shadow(g, 3), ParameterError);
  EXPECT_THROW(l_shadow(g, 0), ParameterError);
}

TEST(LineGraph, Examples) {
  EXPECT_EQ(line_graph(Hypergraph(4, 3, {{1, 2, 3}, {2, 3, 4}})).num_edges(), 1u);
  EXPECT_EQ(line_graph(Hypergraph(5, 3, {{1, 2, 3}, {3, 4, 5}})).num_edges(), 0u);
  EXPECT_EQ(line_graph(complete_hypergraph(4, 3)), complete_hypergraph(4, 2));
}

TEST(TightComponents, Examples) {
  EXPECT_EQ(tight_components(Hypergraph(4, 3, {{1, 2, 3}, {2, 3, 4}})).size(), 1u);
  EXPECT_EQ(tight_components(Hypergraph(5, 3, {{1, 2, 3}, {3, 4, 5}})).size(), 2u);
  EXPECT_EQ(tight_components(Hypergraph(5, 3, {})).size(), 0u);
}

TEST(Components2, Examples) {
  EXPECT_EQ(components2(Hypergraph(6, 3, {{1, 2, 3}, {4, 5, 6}})).size(), 2u);
  EXPECT_EQ(components2(Hypergraph(5, 3, {{1, 2, 3}, {3, 4, 5}})).size(), 1u);
  EXPECT_EQ(components2(Hypergraph(5, 3, {})).size(), 0u);
  Digraph d(6, {{1, 2}, {4, 5}, {2}, {6}});
  auto parts = components2(d);
  ASSERT_EQ(parts.size(), 2u);
  // A 1-tuple joins the block of its vertex; an isolated one forms no block.
  EXPECT_EQ(parts.blocks[0].size(), 2u);
  EXPECT_EQ(parts.vertex_sets[0], (std::vector<Vertex>{1, 2}));
}

TEST(Partitions, RandomGraphsArePartitioned) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + trial % 6;
    const int k = 2 + trial % 3;
    if (k > n) continue;
    auto g = cf_test::random_hypergraph(n, k, 0.3, rng);
    for (const auto& parts : {tight_components(g), components2(g)}) {
      std::multiset<Edge> all;
      for (const auto& b : parts.blocks) {
        EXPECT_FALSE(b.empty());
        all.insert(b.begin(), b.end());
      }
      EXPECT_EQ(all.size(), g.num_edges());
      EXPECT_EQ(std::set<Edge>(all.begin(), all.end()), cf_test::edge_set(g.edges()));
    }
    // Vertex sets of components2 blocks are the nontrivial components of the 2-shadow.
    auto comp = components2(g);
    auto shadow_comp = components2(shadow2(g));
    std::set<std::vector<Vertex>> a(comp.vertex_sets.begin(), comp.vertex_sets.end());
    std::set<std::vector<Vertex>> b(shadow_comp.vertex_sets.begin(), shadow_comp.vertex_sets.end());
    EXPECT_EQ(a, b);
  }
}

TEST(CliqueGraph, Examples) {
  EXPECT_EQ(clique_graph(complete_hypergraph(5, 2), 3), complete_hypergraph(5, 3));
  EXPECT_TRUE(clique_graph(tight_cycle(5, 2), 3).empty());
  Hypergraph k4_minus(4, 2, {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}});
  EXPECT_EQ(clique_graph(k4_minus, 3).num_edges(), 2u);
  EXPECT_THROW(clique_graph(k4_minus, 1), ParameterError);
}

TEST(CliqueGraph, IdentityAtUniformity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = cf_test::random_hypergraph(6 + trial % 3, 2 + trial % 3, 0.5, rng);
    EXPECT_EQ(clique_graph(g, g.k()), g);
  }
}

TEST(CliqueGraph, MatchesNaiveEnumeration) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = cf_test::random_hypergraph(7, 2 + trial % 2, 0.7, rng);
    const int t = g.k() + 1 + trial % 2;
    std::vector<Edge> expected;
    auto all = iota_vertices(g.n());
    for_each_combination(all, t, [&](const std::vector<Vertex>& s) {
      bool ok = true;
      for_each_combination(s, g.k(), [&](const std::vector<Vertex>& e) { return ok = g.contains(e); });
      if (ok) expected.push_back(s);
      return true;
    });
    EXPECT_EQ(clique_graph(g, t).edges(), expected);
  }
}

TEST(OrientAll, Examples) {
  EXPECT_EQ(orient_all(Hypergraph(2, 2, {{1, 2}})), Digraph(2, {{1, 2}, {2, 1}}));
  EXPECT_EQ(orient_all(Hypergraph(3, 3, {{1, 2, 3}})).num_tuples(), 6u);
  EXPECT_EQ(orient_all(complete_hypergraph(4, 3)).num_tuples(), 24u);
}

TEST(EllCycleHost, AddsShadowTuples) {
  auto host = ell_cycle_host(Hypergraph(4, 3, {{1, 2, 3}}), 1);
  EXPECT_EQ(host.tuples_of(3).size(), 6u);
  EXPECT_EQ(host.tuples_of(1).size(), 3u);
  EXPECT_EQ(ell_cycle_host(Hypergraph(4, 3, {{1, 2, 3}}), 2).tuples_of(2).size(), 6u);
}

TEST(UniformDensity, EmptyGraphFailsOnWholeVertexSet) {
  Hypergraph g(5, 2, {});
  auto res = is_uniformly_dense(g, 0, make_rational(1, 2));
  EXPECT_FALSE(res.holds);
  ASSERT_TRUE(res.witness);
  // Sets are visited from the largest mask down, so the first witness is (V, V).
  EXPECT_EQ((*res.witness)[0], iota_vertices(5));
  EXPECT_EQ((*res.witness)[1], iota_vertices(5));
}

TEST(UniformDensity, CompleteGraphWithZeroSlack) {
  // With slack eps*n = 0, overlapping singletons X_1 = X_2 = {v} count 0 tuples but need d > 0,
  // so even the complete graph fails the literal inequality.
  auto g = complete_hypergraph(5, 2);
  auto res = is_uniformly_dense(g, 0, make_rational(1, 2));
  EXPECT_FALSE(res.holds);
  ASSERT_TRUE(res.witness);
  const auto& w = *res.witness;
  EXPECT_LT(Rational(naive_tuple_count(g, w)), make_rational(1, 2) * Rational(w[0].size() * w[1].size()));
  // With enough slack the complete graph passes: e(X,Y) = |X||Y| - |X n Y| >= |X||Y| - n.
  EXPECT_TRUE(is_uniformly_dense(g, 1, 1).holds);
}

TEST(UniformDensity, RandomGraphBelowDensity) {
  std::mt19937_64 rng(3);
  auto g = cf_test::random_hypergraph(8, 2, 0.5, rng);
  auto res = is_uniformly_dense(g, 0, make_rational(9, 10));
  EXPECT_FALSE(res.holds);
  ASSERT_TRUE(res.witness);
  const auto& w = *res.witness;
  const Rational need = make_rational(9, 10) * Rational(w[0].size() * w[1].size());
  EXPECT_LT(Rational(naive_tuple_count(g, w)), need);
}

TEST(UniformDensity, TupleCountMatchesNaive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = cf_test::random_hypergraph(6, 2 + trial % 2, 0.5, rng);
    std::vector<VertexMask> xs;
    std::vector<std::vector<Vertex>> sets;
    for (int i = 0; i < g.k(); ++i) {
      VertexMask m = rng() & 0x3F;
      xs.push_back(m);
      sets.push_back(mask_vertices(m));
    }
    EXPECT_EQ(detail::tuple_count(g, xs), naive_tuple_count(g, sets));
  }
}

TEST(UniformDensity, BudgetAndSampling) {
  auto g = complete_hypergraph(8, 3);
  EXPECT_THROW(is_uniformly_dense(g, 0, make_rational(1, 2)), BudgetExceeded);
  auto res = is_uniformly_dense(g, 0, make_rational(1, 2), DensityMode::sampled, 500, 1);
  EXPECT_LE(res.tuples_tested, 500u);
  auto generous = is_uniformly_dense(g, 1, make_rational(1, 100), DensityMode::sampled, 500, 1);
  EXPECT_TRUE(generous.holds);
  EXPECT_EQ(generous.tuples_tested, 500u);
}

TEST(DegreeSequence, Examples) {
  EXPECT_TRUE(check_degree_sequence(complete_hypergraph(30, 2), 3, make_rational(1, 10)));
  EXPECT_FALSE(check_degree_sequence(Hypergraph(10, 2, {}), 3, 0));
  std::vector<Edge> star;
  for (int v = 2; v <= 8; ++v) star.push_back({1, v});
  EXPECT_FALSE(check_degree_sequence(Hypergraph(8, 2, star), 2, 0));
  EXPECT_THROW(check_degree_sequence(complete_hypergraph(5, 3), 3, 0), ParameterError);
}

TEST(DegreeSequence, BoundaryIsStrict) {
  // K_n: d_i = n-1 against (t-2)n/t + i + mu n; at n=12, t=3, i<=4 the tightest is 11 > 4 + 4 + 12 mu.
  auto g = complete_hypergraph(12, 2);
  EXPECT_TRUE(check_degree_sequence(g, 3, make_rational(1, 4) - make_rational(1, 1000)));
  EXPECT_FALSE(check_degree_sequence(g, 3, make_rational(1, 4)));
}

TEST(Rational, ParsesDecimalsAndFractionsExactly) {
  using chainforge::make_rational;
  using chainforge::parse_rational;
  EXPECT_EQ(parse_rational("0.125"), make_rational(1, 8));
  EXPECT_EQ(parse_rational("0.9"), make_rational(9, 10));
  EXPECT_EQ(parse_rational("-0.5"), make_rational(-1, 2));
  EXPECT_EQ(parse_rational("010/4"), make_rational(5, 2));
  EXPECT_EQ(parse_rational("007"), make_rational(7));
  EXPECT_EQ(parse_rational("0"), make_rational(0));
  EXPECT_EQ(parse_rational("3/-6"), make_rational(-1, 2));
  EXPECT_THROW(parse_rational("1/0"), chainforge::ParameterError);
  EXPECT_THROW(parse_rational("abc"), chainforge::ParameterError);
  EXPECT_THROW(parse_rational("1.2.3"), chainforge::ParameterError);
  EXPECT_THROW(parse_rational("0x10"), chainforge::ParameterError);
  EXPECT_THROW(parse_rational(""), chainforge::ParameterError);
}
