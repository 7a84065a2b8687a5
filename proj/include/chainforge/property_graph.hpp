#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "graph_io.hpp"
#include "hamilton.hpp"
#include "hypercore.hpp"
#include "link.hpp"
#include "matching.hpp"
#include "random.hpp"
#include "rational.hpp"

namespace chainforge {

/// A property of induced subgraphs: test(S) decides whether host[S] has it.
struct Predicate {
  std::string id;
  std::function<Truth(std::span<const Vertex>)> test;
};

/// host[S] relabeled onto 1..|S| in increasing vertex order.
inline Hypergraph relabel_induced(const Hypergraph& g, std::span<const Vertex> vertices) {
  std::vector<int> label(static_cast<std::size_t>(g.n()) + 1, 0);
  std::vector<Vertex> sorted(vertices.begin(), vertices.end());
  std::sort(sorted.begin(), sorted.end());
  int next = 0;
  for (Vertex v : sorted) label[static_cast<std::size_t>(v)] = ++next;
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    Edge m;
    for (Vertex v : e) {
      if (!label[static_cast<std::size_t>(v)]) break;
      m.push_back(label[static_cast<std::size_t>(v)]);
    }
    if (m.size() == e.size()) edges.push_back(std::move(m));
  }
  return Hypergraph(next, g.k(), std::move(edges));
}

/// Hamilton L-connectedness of D[S]. Results are cached by vertex set.
inline Predicate hamilton_connected_predicate(const Digraph& host, const Link& link, SearchOptions options = {}) {
  auto d = std::make_shared<const Digraph>(host);
  auto cache = std::make_shared<std::unordered_map<VertexMask, Truth>>();
  return {"hamilton_L_connected", [d, link, options, cache](std::span<const Vertex> s) {
            const VertexMask key = mask_of(s);
            if (auto it = cache->find(key); it != cache->end()) return it->second;
            Truth t = is_hamilton_L_connected(*d, link, s, options).value;
            cache->emplace(key, t);
            return t;
          }};
}

inline Predicate strongly_connected_predicate(const Hypergraph& host, int ell, SearchOptions options = {}) {
  auto g = std::make_shared<const Hypergraph>(host);
  return {"strongly_hamilton_l_connected", [g, ell, options](std::span<const Vertex> s) {
            const auto sub = relabel_induced(*g, s);
            if (sub.n() < sub.k()) return Truth::no;
            return is_strongly_hamilton_l_connected(sub, ell, options).value;
          }};
}

inline Predicate perfect_matching_predicate(const Hypergraph& host) {
  auto g = std::make_shared<const Hypergraph>(host);
  return {"has_perfect_matching",
          [g](std::span<const Vertex> s) { return has_perfect_matching(*g, s) ? Truth::yes : Truth::no; }};
}

/// delta_d(G[S]) >= fraction * binom(|S|-d, k-d): minimum d-degree relative to the complete graph on S.
inline Predicate min_degree_predicate(const Hypergraph& host, int d, const Rational& fraction) {
  if (d < 1 || d >= host.k()) throw ParameterError("min_degree_at_least needs 1 <= d < k");
  auto g = std::make_shared<const Hypergraph>(host);
  return {"min_degree_at_least", [g, d, fraction](std::span<const Vertex> s) {
            const auto sub = relabel_induced(*g, s);
            if (sub.n() < sub.k()) return Truth::no;
            const Rational need = fraction * Rational(binomial(sub.n() - d, sub.k() - d));
            return Rational(degree_min(sub, d)) >= need ? Truth::yes : Truth::no;
          }};
}

inline Predicate custom_predicate(std::string id, std::function<bool(std::span<const Vertex>)> fn) {
  return {std::move(id), [fn = std::move(fn)](std::span<const Vertex> s) { return fn(s) ? Truth::yes : Truth::no; }};
}

/// Builds a predicate from its textual name:
///   has_perfect_matching | min_degree_at_least:<d>,<fraction> |
///   strongly_hamilton_l_connected:<l> | hamilton_L_connected:<link spec or file>
inline Predicate make_predicate(const AnyGraph& host, std::string_view spec, SearchOptions options = {}) {
  const auto colon = spec.find(':');
  const std::string name(spec.substr(0, colon));
  const std::string args = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
  auto need_uniform = [&]() -> const Hypergraph& {
    if (!std::holds_alternative<Hypergraph>(host)) throw ParameterError("predicate '" + name + "' needs an undirected host");
    return std::get<Hypergraph>(host);
  };
  if (name == "has_perfect_matching") return perfect_matching_predicate(need_uniform());
  if (name == "min_degree_at_least") {
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ParameterError("min_degree_at_least needs <d>,<fraction>");
    int d = 0;
    try {
      d = std::stoi(args.substr(0, comma));
    } catch (const std::exception&) {
      throw ParameterError("bad degree order in '" + std::string(spec) + "'");
    }
    return min_degree_predicate(need_uniform(), d, parse_rational(args.substr(comma + 1)));
  }
  if (name == "strongly_hamilton_l_connected") {
    int ell = 0;
    try {
      ell = std::stoi(args);
    } catch (const std::exception&) {
      throw ParameterError("strongly_hamilton_l_connected needs <l>");
    }
    return strongly_connected_predicate(need_uniform(), ell, options);
  }
  if (name == "hamilton_L_connected") {
    const Link link = resolve_link(args);
    if (std::holds_alternative<Digraph>(host)) return hamilton_connected_predicate(std::get<Digraph>(host), link, options);
    return hamilton_connected_predicate(ell_cycle_host(std::get<Hypergraph>(host), link.ell()), link, options);
  }
  throw ParameterError("unknown predicate '" + name + "'");
}

enum class PropertyMode { exhaustive, sampled };

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  // Exact endpoints at the extremes instead of rounding residue.
  const double low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {low, high};
}

struct SampledDegree {
  std::vector<Vertex> q_set;
  std::uint64_t supersets = 0;
  std::uint64_t hits = 0;
};

/// PG(G, P, s). Exhaustive: the exact s-graph of all s-sets whose induced subgraph has P.
/// Sampled: the edge density from uniform s-sets, and for random q-sets the fraction of
/// random s-supersets that are edges (lower tail of the relative q-degree).
struct PropertyGraph {
  std::string predicate_id;
  int n = 0;
  int s = 0;
  PropertyMode mode = PropertyMode::exhaustive;
  Hypergraph edges;  // exhaustive only
  std::uint64_t samples = 0;
  std::uint64_t sampled_hits = 0;
  int q = 0;
  std::vector<SampledDegree> degree_samples;

  double edge_fraction() const {
    if (mode == PropertyMode::exhaustive) {
      return to_double(Rational(static_cast<std::int64_t>(edges.num_edges())) / Rational(binomial(n, s)));
    }
    return samples ? static_cast<double>(sampled_hits) / static_cast<double>(samples) : 0.0;
  }

  /// Smallest sampled superset fraction over the tested q-sets.
  std::optional<SampledDegree> weakest_q_set() const {
    std::optional<SampledDegree> best;
    for (const auto& d : degree_samples) {
      if (!best || d.hits * best->supersets < best->hits * d.supersets) best = d;
    }
    return best;
  }
};

struct PropertyOptions {
  PropertyMode mode = PropertyMode::exhaustive;
  std::uint64_t budget = 200'000;  // largest binom(n, s) for exhaustive mode
  std::uint64_t samples = 2000;    // sampled s-sets (and supersets per q-set)
  int q = 1;                       // q for the sampled degree statistic
  int q_sets = 8;                  // number of random q-sets in sampled mode
};

namespace property_detail {

inline Truth decide(const Predicate& pred, std::span<const Vertex> s) {
  Truth t = pred.test(s);
  if (t == Truth::unknown) throw BudgetExceeded("predicate '" + pred.id + "' undecided within its search budget");
  return t;
}

// Uniform r-subset of `pool` (partial Fisher-Yates), returned sorted.
inline std::vector<Vertex> random_subset(std::vector<Vertex> pool, int r, SeededStream& stream) {
  for (int i = 0; i < r; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(stream.uniform_below(static_cast<std::uint64_t>(pool.size() - static_cast<std::size_t>(i))));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<Vertex> out(pool.begin(), pool.begin() + r);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace property_detail

inline PropertyGraph property_graph(int n, const Predicate& pred, int s, const PropertyOptions& options,
                                    SeededStream* stream = nullptr) {
  if (s < 1) throw ParameterError("uniformity s must be positive");
  if (s > n) throw ParameterError("s = " + std::to_string(s) + " exceeds n = " + std::to_string(n));
  PropertyGraph pg;
  pg.predicate_id = pred.id;
  pg.n = n;
  pg.s = s;
  pg.mode = options.mode;
  auto all = iota_vertices(n);
  if (options.mode == PropertyMode::exhaustive) {
    if (binomial(n, s) > BigInt(options.budget)) {
      throw BudgetExceeded("binom(" + std::to_string(n) + "," + std::to_string(s) + ") exceeds the exhaustive budget");
    }
    std::vector<Edge> edges;
    for_each_combination(all, s, [&](const std::vector<Vertex>& set) {
      if (property_detail::decide(pred, set) == Truth::yes) edges.push_back(set);
      return true;
    });
    pg.edges = Hypergraph(n, s, std::move(edges));
    return pg;
  }
  if (!stream) throw ParameterError("sampled property graphs need a random stream");
  if (options.q < 0 || options.q >= s) throw ParameterError("q must satisfy 0 <= q < s");
  pg.samples = options.samples;
  pg.q = options.q;
  for (std::uint64_t i = 0; i < options.samples; ++i) {
    auto set = property_detail::random_subset(all, s, *stream);
    if (property_detail::decide(pred, set) == Truth::yes) ++pg.sampled_hits;
  }
  for (int j = 0; j < options.q_sets; ++j) {
    SampledDegree deg;
    deg.q_set = property_detail::random_subset(all, options.q, *stream);
    std::vector<Vertex> rest;
    for (Vertex v : all)
      if (!std::binary_search(deg.q_set.begin(), deg.q_set.end(), v)) rest.push_back(v);
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      auto extra = property_detail::random_subset(rest, s - options.q, *stream);
      extra.insert(extra.end(), deg.q_set.begin(), deg.q_set.end());
      std::sort(extra.begin(), extra.end());
      ++deg.supersets;
      if (property_detail::decide(pred, extra) == Truth::yes) ++deg.hits;
    }
    pg.degree_samples.push_back(std::move(deg));
  }
  return pg;
}

struct MinDegreeResult {
  std::int64_t value = 0;
  Rational ratio;  // value / binom(n-q, s-q)
};

/// delta_q of an exhaustive property graph and its ratio to the complete s-graph.
inline MinDegreeResult property_graph_min_degree(const PropertyGraph& pg, int q) {
  if (pg.mode != PropertyMode::exhaustive) throw ParameterError("minimum degree needs an exhaustive property graph");
  if (q < 0 || q >= pg.s) throw ParameterError("q must satisfy 0 <= q < s");
  MinDegreeResult out;
  if (q == 0) {
    out.value = static_cast<std::int64_t>(pg.edges.num_edges());
  } else {
    std::map<Edge, std::int64_t> counter;
    for (const auto& e : pg.edges.edges())
      for_each_combination(e, q, [&](const std::vector<Vertex>& set) {
        ++counter[set];
        return true;
      });
    if (BigInt(counter.size()) < binomial(pg.n, q)) {
      out.value = 0;
    } else {
      out.value = std::numeric_limits<std::int64_t>::max();
      for (const auto& [set, c] : counter) out.value = std::min(out.value, c);
    }
  }
  out.ratio = Rational(out.value) / Rational(binomial(pg.n - q, pg.s - q));
  return out;
}

}  // namespace chainforge
