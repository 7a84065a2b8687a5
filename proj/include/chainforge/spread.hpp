#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hypercore.hpp"
#include "hypergraph.hpp"
#include "matching.hpp"
#include "random.hpp"

namespace chainforge {

/// A random structure given by its edge set (edges compared exactly; undirected edges sorted).
using EdgeSampler = std::function<std::vector<Edge>(SeededStream&)>;

struct SizeStatistic {
  std::size_t sets = 0;
  double max_frequency = 0;
  double sum_frequency = 0;
};

struct StrongSpreadRow {
  int j = 0;
  double sum = 0;    // sum over j-subsets I of S of P[I in C]
  double b_hat = 0;  // sum^(1/j) / q_hat
};

struct SpreadReport {
  double q_hat = 0;
  std::uint64_t trials = 0;
  std::vector<double> frequencies;  // per test set, in input order
  std::map<int, SizeStatistic> per_size;
  std::vector<StrongSpreadRow> strong;
};

struct StrongSpreadRequest {
  std::vector<Edge> s;
  double a = 0;
  std::size_t max_subsets = 1'000'000;
};

namespace spread_detail {

inline bool contains_all(const std::vector<Edge>& sorted_c, const std::vector<Edge>& set) {
  return std::all_of(set.begin(), set.end(), [&](const Edge& e) { return std::binary_search(sorted_c.begin(), sorted_c.end(), e); });
}

}  // namespace spread_detail

/// Containment frequencies of the test sets over `trials` draws, q_hat = max P[I in C]^(1/|I|),
/// and optionally the strong-spread sums over j-subsets of S for a|S| <= j <= |S|.
inline SpreadReport estimate_spread(const EdgeSampler& sampler, const std::vector<Edge>& ground,
                                    const std::vector<std::vector<Edge>>& test_sets, std::uint64_t trials,
                                    SeededStream& stream, const std::optional<StrongSpreadRequest>& strong = std::nullopt) {
  if (trials == 0) throw ParameterError("estimate_spread needs at least one trial");
  const std::set<Edge> ground_set(ground.begin(), ground.end());
  auto check_ground = [&](const std::vector<Edge>& set) {
    for (const auto& e : set)
      if (!ground_set.count(e)) throw ParameterError("test set contains an element outside the ground set");
  };
  for (const auto& set : test_sets) check_ground(set);
  std::vector<std::vector<Edge>> strong_sets;
  if (strong) {
    check_ground(strong->s);
    const auto size = static_cast<int>(strong->s.size());
    const int low = std::max(1, static_cast<int>(std::ceil(strong->a * size)));
    std::vector<int> idx(strong->s.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    for (int j = low; j <= size; ++j)
      for_each_combination(idx, j, [&](const std::vector<int>& pick) {
        std::vector<Edge> sub;
        for (int i : pick) sub.push_back(strong->s[static_cast<std::size_t>(i)]);
        strong_sets.push_back(std::move(sub));
        if (strong_sets.size() > strong->max_subsets) throw BudgetExceeded("strong-spread subset enumeration exceeds the budget");
        return true;
      });
  }
  std::vector<std::uint64_t> hits(test_sets.size(), 0);
  std::vector<std::uint64_t> strong_hits(strong_sets.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto c = sampler(stream);
    std::sort(c.begin(), c.end());
    for (std::size_t i = 0; i < test_sets.size(); ++i) hits[i] += spread_detail::contains_all(c, test_sets[i]);
    for (std::size_t i = 0; i < strong_sets.size(); ++i) strong_hits[i] += spread_detail::contains_all(c, strong_sets[i]);
  }
  SpreadReport report;
  report.trials = trials;
  const auto n = static_cast<double>(trials);
  for (std::size_t i = 0; i < test_sets.size(); ++i) {
    const double f = static_cast<double>(hits[i]) / n;
    report.frequencies.push_back(f);
    const int j = static_cast<int>(test_sets[i].size());
    auto& row = report.per_size[j];
    ++row.sets;
    row.max_frequency = std::max(row.max_frequency, f);
    row.sum_frequency += f;
    // The empty set is always contained and carries no information about q.
    if (j > 0) report.q_hat = std::max(report.q_hat, std::pow(f, 1.0 / j));
  }
  if (strong) {
    std::map<int, double> sums;
    for (std::size_t i = 0; i < strong_sets.size(); ++i)
      sums[static_cast<int>(strong_sets[i].size())] += static_cast<double>(strong_hits[i]) / n;
    for (const auto& [j, sum] : sums)
      report.strong.push_back({j, sum, report.q_hat > 0 ? std::pow(sum, 1.0 / j) / report.q_hat : 0.0});
  }
  return report;
}

struct CorrectnessEntry {
  std::vector<Edge> edges;
  int v = 0;  // non-isolated vertices
  int c = 0;  // 2-shadow components
  double frequency = 0;
  double k_value = 0;  // (frequency * n^(v-c))^(1/v)
};

struct CorrectnessReport {
  double k_hat = 0;
  std::uint64_t trials = 0;
  int n = 0;
  std::vector<CorrectnessEntry> entries;
  std::map<std::pair<int, int>, double> table;  // (v, c) -> largest k_value
};

/// v(I) and the number of 2-shadow components of the edge set I (isolated vertices ignored).
inline std::pair<int, int> vertex_and_component_count(int n, const std::vector<Edge>& edges) {
  std::set<Vertex> touched;
  for (const auto& e : edges) touched.insert(e.begin(), e.end());
  if (edges.empty()) return {0, 0};
  const auto parts = components2(Digraph(n, edges));
  return {static_cast<int>(touched.size()), static_cast<int>(parts.size())};
}

/// Empirical K for P[I in C] <= K^v(I) n^(c - v(I)) over the test graphs.
inline CorrectnessReport estimate_correctness(const EdgeSampler& sampler, int n, const std::vector<std::vector<Edge>>& test_graphs,
                                              std::uint64_t trials, SeededStream& stream) {
  if (trials == 0) throw ParameterError("estimate_correctness needs at least one trial");
  CorrectnessReport report;
  report.trials = trials;
  report.n = n;
  std::vector<std::uint64_t> hits(test_graphs.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto c = sampler(stream);
    std::sort(c.begin(), c.end());
    for (std::size_t i = 0; i < test_graphs.size(); ++i) hits[i] += spread_detail::contains_all(c, test_graphs[i]);
  }
  for (std::size_t i = 0; i < test_graphs.size(); ++i) {
    CorrectnessEntry entry;
    entry.edges = test_graphs[i];
    std::tie(entry.v, entry.c) = vertex_and_component_count(n, test_graphs[i]);
    entry.frequency = static_cast<double>(hits[i]) / static_cast<double>(trials);
    if (entry.v > 0)
      entry.k_value = std::pow(entry.frequency * std::pow(static_cast<double>(n), entry.v - entry.c), 1.0 / entry.v);
    report.k_hat = std::max(report.k_hat, entry.k_value);
    auto& cell = report.table[{entry.v, entry.c}];
    cell = std::max(cell, entry.k_value);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

struct SpreadMatchingCheck {
  bool holds = false;
  double probability = 0;  // estimated P[I in shadow_2(M)]
  double c_prime = 0;      // max over edges e of P[e in M] * n^(s-1), from exact counts
  double c_used = 0;       // the constant plugged into the bound
  double bound = 0;        // (2C)^v n^(c-v)
  double margin = 0;       // bound - probability
  int v = 0;
  int c = 0;
};

/// Uniform perfect matchings M of an s-graph H against the 2-graph I: compares P[I in
/// shadow_2(M)] with (2C)^v n^(c-v), where C defaults to the exact singleton spread constant
/// of the uniform matching. The comparison allows three standard errors.
inline SpreadMatchingCheck verify_spread_matching_bound(const Hypergraph& h, const Hypergraph& i_graph,
                                                        std::optional<double> c_param, std::uint64_t trials,
                                                        SeededStream& stream) {
  if (i_graph.k() != 2) throw ParameterError("I must be a 2-graph");
  if (i_graph.n() > h.n()) throw ParameterError("I has more vertices than H");
  if (trials == 0) throw ParameterError("verify_spread_matching_bound needs at least one trial");
  SpreadMatchingCheck out;
  std::tie(out.v, out.c) = vertex_and_component_count(h.n(), i_graph.edges());
  if (2 * out.c > h.n()) throw ParameterError("I has more than n/2 components");
  PerfectMatchings matchings(h);
  const u128 total = matchings.count();
  if (total == 0) throw ConstructionInfeasible("H has no perfect matching");
  const double n = static_cast<double>(h.n());
  for (const auto& e : h.edges()) {
    std::vector<Vertex> rest;
    for (Vertex v = 1; v <= h.n(); ++v)
      if (!std::binary_search(e.begin(), e.end(), v)) rest.push_back(v);
    std::vector<Edge> inside;
    std::vector<int> label(static_cast<std::size_t>(h.n()) + 1, 0);
    for (std::size_t j = 0; j < rest.size(); ++j) label[static_cast<std::size_t>(rest[j])] = static_cast<int>(j) + 1;
    for (const auto& f : h.edges()) {
      Edge m;
      for (Vertex v : f) {
        if (!label[static_cast<std::size_t>(v)]) break;
        m.push_back(label[static_cast<std::size_t>(v)]);
      }
      if (m.size() == f.size()) inside.push_back(std::move(m));
    }
    const u128 with_e = PerfectMatchings(Hypergraph(static_cast<int>(rest.size()), h.k(), std::move(inside))).count();
    const double p = static_cast<double>(with_e) / static_cast<double>(total);
    out.c_prime = std::max(out.c_prime, p * std::pow(n, h.k() - 1));
  }
  out.c_used = c_param.value_or(out.c_prime);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto m = matchings.sample(stream);
    std::vector<Edge> pairs;
    for (const auto& e : *m)
      for (std::size_t a = 0; a < e.size(); ++a)
        for (std::size_t b = a + 1; b < e.size(); ++b) pairs.push_back({e[a], e[b]});
    std::sort(pairs.begin(), pairs.end());
    hits += spread_detail::contains_all(pairs, i_graph.edges());
  }
  out.probability = static_cast<double>(hits) / static_cast<double>(trials);
  out.bound = std::pow(2.0 * out.c_used, out.v) * std::pow(n, out.c - out.v);
  out.margin = out.bound - out.probability;
  const double se = std::sqrt(out.probability * (1 - out.probability) / static_cast<double>(trials));
  out.holds = out.probability <= out.bound + 3 * se + 1e-12;
  return out;
}

}  // namespace chainforge
