#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chain.hpp"
#include "errors.hpp"
#include "hamilton.hpp"
#include "hypergraph.hpp"
#include "link.hpp"
#include "matching.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "search.hpp"

namespace chainforge {

/// n = 2m(s1 - l) + m' with 0 <= m' < 2(s1 - l); s2 = s1 + m'.
struct ConstructionPlan {
  int n = 0;
  int s1 = 0;
  int s2 = 0;
  int m = 0;
  int m_prime = 0;
  int ell = 0;
  int r = 1;

  int v1_size() const { return s1 * (m - 1) + s2; }
  int v2_size() const { return (s1 - 2 * ell) * m; }
  bool operator==(const ConstructionPlan&) const = default;
};

inline ConstructionPlan plan_parameters(int n, int s1, int ell, int r) {
  if (r < 1) throw ParameterError("r must be positive");
  if (ell < 0) throw ParameterError("l must be nonnegative");
  if (n % r != 0) throw ParameterError("n = " + std::to_string(n) + " is not divisible by r = " + std::to_string(r));
  if ((s1 - ell) % r != 0) throw ParameterError("s1 must be congruent to l modulo r");
  if (s1 <= 2 * ell) throw ParameterError("s1 must exceed 2l");
  if (n < 2 * (s1 - ell)) throw ParameterError("n must be at least 2(s1 - l)");
  ConstructionPlan plan;
  plan.n = n;
  plan.s1 = s1;
  plan.ell = ell;
  plan.r = r;
  plan.m = n / (2 * (s1 - ell));
  plan.m_prime = n % (2 * (s1 - ell));
  plan.s2 = s1 + plan.m_prime;
  if ((plan.s2 - ell) % r != 0) throw InvariantViolation("s2 is not congruent to l modulo r");
  if (plan.v1_size() + plan.v2_size() != n) throw InvariantViolation("|V1| + |V2| differs from n");
  return plan;
}

/// Observed minimum relative degree for one of (D1)-(D3) against 1 - 1/(3s).
struct ConditionMargin {
  std::string name;
  Rational ratio;
  Rational threshold;
  bool sampled = false;
  std::uint64_t evaluations = 0;

  Rational margin() const { return ratio - threshold; }
  bool holds() const { return ratio >= threshold; }
};

struct PartitionWitness {
  std::vector<Vertex> v1;
  std::vector<Vertex> v2;
  std::vector<Vertex> v0;
  std::vector<std::vector<Vertex>> v1_parts;  // s1 parts of V1 \ V0, size m-1 each
  std::vector<std::vector<Vertex>> v2_parts;  // s1 - 2l parts of V2, size m each
  ConditionMargin d1, d2, d3;
  int attempts = 0;  // partition attempts used for V1/V2
};

struct ConstructOptions {
  int retries = 20;
  std::uint64_t exhaustive_budget = 20'000;  // predicate evaluations before (D1)/(D3) switch to sampling
  std::uint64_t samples = 200;
  std::uint64_t enumeration_budget = 200'000;  // largest partite edge enumeration for P1^1 and P1''
  std::uint64_t v0_rejection_limit = 100'000;
  std::uint64_t partition_seed = 0x243F6A8885A308D3ULL;  // fixes the "deterministic" partitions
  SearchOptions search{};
};

struct Connector {
  int token = 0;                // index i of T_i in the permuted chain order
  std::vector<Vertex> vertices; // T_i together with one vertex from each part of V2
  std::vector<Vertex> ordering;
};

struct ConstructionResult {
  ConstructionPlan plan;
  PartitionWitness witness;
  std::vector<Edge> matching;                    // perfect matching of P1^1 (sorted vertex sets)
  std::vector<std::vector<Vertex>> chains;       // V0 chain first, then one per matching edge
  std::vector<int> permutation;                  // R_i = chains[permutation[i]]
  std::vector<Connector> connectors;
  std::vector<Vertex> ordering;
  ClosedChain chain;
  std::vector<std::string> deviations;

  bool desk_scale() const { return !deviations.empty(); }
};

namespace construct_detail {

inline std::string describe(const ConditionMargin& c) {
  return c.name + " ratio " + to_string(c.ratio) + " vs " + to_string(c.threshold) + (c.sampled ? " (sampled)" : "");
}

// Uniform r-subset of `pool`, sorted.
inline std::vector<Vertex> random_subset(std::vector<Vertex> pool, int r, SeededStream& stream) {
  for (int i = 0; i < r; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(stream.uniform_below(static_cast<std::uint64_t>(pool.size()) - static_cast<std::uint64_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<Vertex> out(pool.begin(), pool.begin() + r);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Vertex> sorted_union(std::vector<Vertex> a, std::span<const Vertex> b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

// Calls fn(choice) for every transversal picking one vertex from each part, in lexicographic order.
template <class Fn>
void for_each_transversal(const std::vector<std::vector<Vertex>>& parts, Fn&& fn) {
  if (parts.empty()) {
    fn(std::vector<Vertex>{});
    return;
  }
  for (const auto& p : parts)
    if (p.empty()) return;
  std::vector<std::size_t> idx(parts.size(), 0);
  std::vector<Vertex> choice(parts.size());
  while (true) {
    for (std::size_t i = 0; i < parts.size(); ++i) choice[i] = parts[i][idx[i]];
    fn(choice);
    std::size_t i = parts.size();
    while (i > 0) {
      --i;
      if (++idx[i] < parts[i].size()) break;
      idx[i] = 0;
      if (i == 0) return;
    }
  }
}

inline std::uint64_t power_u64(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && out > ~std::uint64_t{0} / base) return ~std::uint64_t{0};
    out *= base;
  }
  return out;
}

inline Rational threshold_for(int s) { return Rational(1) - make_rational(1, 3 * s); }

}  // namespace construct_detail

/// Deterministic open chain spanning `set`: the lexicographically least disjoint pair of
/// l-tuples of D inside the set that admits a chain, then the least ordering for that pair.
inline std::vector<Vertex> realize_open_chain(const Digraph& host, const Link& link, std::span<const Vertex> set,
                                              const SearchOptions& options) {
  auto attempt = [&](const std::optional<Edge>& x, const std::optional<Edge>& y) -> std::optional<std::vector<Vertex>> {
    auto res = find_hamilton_chain(host, link, set, x, y, false, options);
    if (res.status == SearchStatus::unknown) throw BudgetExceeded("chain search budget exhausted while realizing a chain");
    if (res.status == SearchStatus::found) return res.ordering;
    return std::nullopt;
  };
  if (link.ell() == 0) {
    if (auto o = attempt(std::nullopt, std::nullopt)) return *o;
    throw InvariantViolation("property-graph edge without a spanning open chain");
  }
  const VertexMask inside = mask_of(set);
  std::vector<Edge> ends;
  for (const auto& t : host.tuples_of(link.ell()))
    if ((mask_of(t) & ~inside) == 0) ends.push_back(t);
  std::sort(ends.begin(), ends.end());
  for (const auto& x : ends)
    for (const auto& y : ends) {
      if (mask_of(x) & mask_of(y)) continue;
      if (auto o = attempt(x, y)) return *o;
    }
  throw InvariantViolation("property-graph edge without a spanning open chain");
}

/// The least open chain on `set` from `start` to `end` (l-tuples; ignored when l = 0).
inline std::vector<Vertex> realize_connector(const Digraph& host, const Link& link, std::span<const Vertex> set, const Edge& start,
                                             const Edge& end, const SearchOptions& options) {
  std::optional<Edge> x, y;
  if (link.ell() > 0) {
    x = start;
    y = end;
  }
  auto res = find_hamilton_chain(host, link, set, x, y, false, options);
  if (res.status == SearchStatus::unknown) throw BudgetExceeded("chain search budget exhausted while connecting chains");
  if (res.status == SearchStatus::none) throw InvariantViolation("Hamilton-connected set without the required connecting chain");
  return res.ordering;
}

/// R_1 + inner(C_1) + R_2 + ... + R_m + inner(C_m), where C_i runs from the end of R_i to the start of R_{i+1}.
inline std::vector<Vertex> assemble_ordering(int ell, const std::vector<std::vector<Vertex>>& chains, const std::vector<int>& permutation,
                                             const std::vector<Connector>& connectors) {
  std::vector<Vertex> ordering;
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const auto& r = chains[static_cast<std::size_t>(permutation[i])];
    ordering.insert(ordering.end(), r.begin(), r.end());
    const auto& c = connectors[i].ordering;
    ordering.insert(ordering.end(), c.begin() + ell, c.end() - ell);
  }
  return ordering;
}

/// The randomized three-phase construction of a closed Hamilton L-chain in D. The V1/V2
/// split and the parts of V2 depend only on D and the partition seed and are computed once;
/// the parts of V1 \ V0 depend only on V0. Randomness from the caller's stream: V0, the
/// matching of P1^1, the chain order, and the matching of P1''.
class Constructor {
 public:
  Constructor(const Digraph& host, const Link& link, int s1, ConstructOptions options = {})
      : host_(std::make_shared<const Digraph>(host)), link_(link), options_(options) {
    if (host.n() > kMaxMaskVertices) throw BudgetExceeded("constructions support at most 64 vertices");
    plan_ = plan_parameters(host.n(), s1, link.ell(), link.r());
    if (!valid_open_length(link, s1)) throw ParameterError("s1 admits no open chain for this link");
    if (!valid_closed_length(link, host.n())) throw ParameterError("n admits no closed chain for this link");
    if (options_.retries < 1) throw ParameterError("retries must be positive");
  }

  const ConstructionPlan& plan() const { return plan_; }
  const Link& link() const { return link_; }
  const Digraph& host() const { return *host_; }

  /// Hamilton L-connectedness of D[S], cached by vertex set.
  bool ham_connected(std::span<const Vertex> set) {
    const VertexMask key = mask_of(set);
    if (auto it = ham_cache_.find(key); it != ham_cache_.end()) return it->second;
    auto rep = is_hamilton_L_connected(*host_, link_, set, options_.search);
    if (rep.value == Truth::unknown) throw BudgetExceeded("Hamilton connectivity undecided within the search budget");
    const bool yes = rep.value == Truth::yes;
    ham_cache_.emplace(key, yes);
    return yes;
  }

  /// Step 1: partition with (D1)-(D3) and a uniform V0 from the edges of P2[V1].
  PartitionWitness partition(SeededStream& stream) {
    const Base& base = ensure_base();
    PartitionWitness w;
    w.v1 = base.v1;
    w.v2 = base.v2;
    w.v2_parts = base.v2_parts;
    w.d1 = base.d1;
    w.d3 = base.d3;
    w.attempts = base.attempts;
    w.v0 = choose_v0(base, stream);
    const auto& inner = ensure_inner(w.v0);
    w.v1_parts = inner.parts;
    w.d2 = inner.d2;
    return w;
  }

  /// Step 2: a uniform perfect matching of P1^1 and one fixed chain per edge, plus the V0 chain.
  std::pair<std::vector<Edge>, std::vector<std::vector<Vertex>>> cover(const PartitionWitness& w, SeededStream& stream) {
    const auto& inner = ensure_inner(w.v0);
    std::vector<Edge> matching;
    if (plan_.m > 1) {
      auto picked = inner.matchings->sample(stream);
      if (!picked) throw ConstructionInfeasible("P1^1 has no perfect matching");
      for (const auto& e : *picked) {
        Edge orig;
        for (Vertex v : e) orig.push_back(inner.labels[static_cast<std::size_t>(v - 1)]);
        std::sort(orig.begin(), orig.end());
        matching.push_back(std::move(orig));
      }
      std::sort(matching.begin(), matching.end());
    }
    std::vector<std::vector<Vertex>> chains;
    chains.push_back(chain_on(w.v0));
    for (const auto& e : matching) chains.push_back(chain_on(e));
    return {std::move(matching), std::move(chains)};
  }

  /// Step 3: random chain order, uniform perfect matching of P1'', connectors, closing up.
  std::pair<std::vector<int>, std::vector<Connector>> connect(const PartitionWitness& w, const std::vector<std::vector<Vertex>>& chains,
                                                              SeededStream& stream) {
    const int m = plan_.m;
    const int ell = plan_.ell;
    std::vector<int> perm(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    stream.shuffle(perm);

    std::vector<Edge> t_sets(static_cast<std::size_t>(m)), starts(static_cast<std::size_t>(m)), ends(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto& a = chains[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      const auto& b = chains[static_cast<std::size_t>(perm[static_cast<std::size_t>((i + 1) % m)])];
      starts[static_cast<std::size_t>(i)] = Edge(a.end() - ell, a.end());
      ends[static_cast<std::size_t>(i)] = Edge(b.begin(), b.begin() + ell);
      Edge t = starts[static_cast<std::size_t>(i)];
      t.insert(t.end(), ends[static_cast<std::size_t>(i)].begin(), ends[static_cast<std::size_t>(i)].end());
      std::sort(t.begin(), t.end());
      t_sets[static_cast<std::size_t>(i)] = std::move(t);
    }

    // P1'': V2 vertices are labels 1..|V2| (part by part), token T_i is |V2| + 1 + i.
    std::vector<Vertex> label_of(static_cast<std::size_t>(plan_.n) + 1, 0);
    std::vector<Vertex> vertex_of;
    std::vector<std::vector<Vertex>> parts;
    for (const auto& part : w.v2_parts) {
      parts.emplace_back();
      for (Vertex v : part) {
        vertex_of.push_back(v);
        label_of[static_cast<std::size_t>(v)] = static_cast<Vertex>(vertex_of.size());
        parts.back().push_back(static_cast<Vertex>(vertex_of.size()));
      }
    }
    const int v2n = static_cast<int>(vertex_of.size());
    parts.emplace_back();
    for (int i = 0; i < m; ++i) parts.back().push_back(v2n + 1 + i);
    const std::uint64_t work = static_cast<std::uint64_t>(m) * construct_detail::power_u64(static_cast<std::uint64_t>(m), plan_.s1 - 2 * ell);
    if (work > options_.enumeration_budget) throw BudgetExceeded("P1'' enumeration exceeds the budget");
    std::vector<Edge> edges;
    for (int i = 0; i < m; ++i)
      construct_detail::for_each_transversal(w.v2_parts, [&](const std::vector<Vertex>& pick) {
        auto set = construct_detail::sorted_union(t_sets[static_cast<std::size_t>(i)], pick);
        if (!ham_connected(set)) return;
        Edge e;
        for (Vertex v : pick) e.push_back(label_of[static_cast<std::size_t>(v)]);
        e.push_back(v2n + 1 + i);
        edges.push_back(std::move(e));
      });
    Hypergraph aux(v2n + m, plan_.s1 - 2 * ell + 1, std::move(edges));
    auto picked = PerfectMatchings(aux, parts).sample(stream);
    if (!picked) throw ConstructionInfeasible("P1'' has no perfect matching");

    std::vector<Connector> connectors(static_cast<std::size_t>(m));
    for (const auto& e : *picked) {
      const int i = e.back() - v2n - 1;
      std::vector<Vertex> pick;
      for (std::size_t j = 0; j + 1 < e.size(); ++j) pick.push_back(vertex_of[static_cast<std::size_t>(e[j] - 1)]);
      auto& c = connectors[static_cast<std::size_t>(i)];
      c.token = i;
      c.vertices = construct_detail::sorted_union(t_sets[static_cast<std::size_t>(i)], pick);
      c.ordering = connector_on(c.vertices, starts[static_cast<std::size_t>(i)], ends[static_cast<std::size_t>(i)]);
    }
    return {std::move(perm), std::move(connectors)};
  }

  ConstructionResult construct(SeededStream& stream) {
    ConstructionResult out;
    out.plan = plan_;
    out.witness = partition(stream);
    std::tie(out.matching, out.chains) = cover(out.witness, stream);
    std::tie(out.permutation, out.connectors) = connect(out.witness, out.chains, stream);
    out.ordering = assemble_ordering(plan_.ell, out.chains, out.permutation, out.connectors);
    auto sorted = out.ordering;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != iota_vertices(plan_.n)) throw InvariantViolation("chains and connectors do not partition the vertex set");
    if (!validate_closed_chain(link_, *host_, out.ordering)) throw InvariantViolation("assembled ordering is not a closed chain of the host");
    out.chain = build_closed_chain(link_, out.ordering);
    out.deviations = deviations(out.witness);
    return out;
  }

  /// The deterministic chains on V0 and on each matching edge.
  std::vector<std::vector<Vertex>> realize_chains(const PartitionWitness& w, const std::vector<Edge>& matching) {
    std::vector<std::vector<Vertex>> chains;
    chains.push_back(chain_on(w.v0));
    for (const auto& e : matching) chains.push_back(chain_on(e));
    return chains;
  }

  /// Re-derives the connectors and the ordering from stored chains without randomness.
  std::vector<Vertex> replay(const std::vector<std::vector<Vertex>>& chains, const std::vector<int>& permutation,
                             const std::vector<Connector>& connectors) {
    const int m = static_cast<int>(chains.size());
    const int ell = plan_.ell;
    std::vector<Connector> rebuilt;
    for (int i = 0; i < m; ++i) {
      const auto& a = chains[static_cast<std::size_t>(permutation[static_cast<std::size_t>(i)])];
      const auto& b = chains[static_cast<std::size_t>(permutation[static_cast<std::size_t>((i + 1) % m)])];
      Connector c = connectors[static_cast<std::size_t>(i)];
      c.ordering = connector_on(c.vertices, Edge(a.end() - ell, a.end()), Edge(b.begin(), b.begin() + ell));
      rebuilt.push_back(std::move(c));
    }
    return assemble_ordering(ell, chains, permutation, rebuilt);
  }

  std::vector<std::string> deviations(const PartitionWitness& w) const {
    std::vector<std::string> out;
    if (plan_.s1 < 5 * (plan_.r + plan_.ell)) out.push_back("s1 below 5(r+l)");
    if (w.d1.sampled || w.d3.sampled) out.push_back("partition conditions sampled");
    out.push_back("exact uniform matchings in place of spread matchings");
    return out;
  }

 private:
  struct Base {
    std::vector<Vertex> v1, v2;
    std::vector<std::vector<Vertex>> v2_parts;
    ConditionMargin d1, d3;
    std::optional<std::vector<std::vector<Vertex>>> p2_edges;  // edges of P2[V1] when enumerated
    int attempts = 0;
  };

  struct Inner {
    std::vector<std::vector<Vertex>> parts;
    ConditionMargin d2;
    std::vector<Vertex> labels;  // label j (1-based) -> vertex
    std::shared_ptr<PerfectMatchings> matchings;
  };

  const Base& ensure_base() {
    if (base_) return *base_;
    std::optional<Base> best;
    auto score = [](const Base& b) { return std::min(b.d1.margin(), b.d3.margin()); };
    for (int attempt = 0; attempt < options_.retries; ++attempt) {
      SeededStream s(options_.partition_seed, static_cast<std::uint64_t>(attempt));
      auto perm = iota_vertices(plan_.n);
      s.shuffle(perm);
      Base b;
      b.attempts = attempt + 1;
      const auto n1 = static_cast<std::size_t>(plan_.v1_size());
      b.v1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n1));
      std::sort(b.v1.begin(), b.v1.end());
      for (int j = 0; j < plan_.s1 - 2 * plan_.ell; ++j) {
        auto from = perm.begin() + static_cast<std::ptrdiff_t>(n1) + static_cast<std::ptrdiff_t>(j) * plan_.m;
        std::vector<Vertex> part(from, from + plan_.m);
        std::sort(part.begin(), part.end());
        b.v2.insert(b.v2.end(), part.begin(), part.end());
        b.v2_parts.push_back(std::move(part));
      }
      std::sort(b.v2.begin(), b.v2.end());
      compute_d1(b, s);
      compute_d3(b, s);
      if (b.d1.holds() && b.d3.holds()) {
        base_ = std::move(b);
        return *base_;
      }
      if (!best || score(b) > score(*best)) best = std::move(b);
    }
    throw ConstructionInfeasible("no partition satisfies (D1) and (D3) after " + std::to_string(options_.retries) +
                                 " attempts; best: " + construct_detail::describe(best->d1) + ", " +
                                 construct_detail::describe(best->d3));
  }

  void compute_d1(Base& b, SeededStream& s) {
    const int s2 = plan_.s2;
    b.d1.name = "D1";
    b.d1.threshold = construct_detail::threshold_for(s2);
    const BigInt total_sets = binomial(static_cast<int>(b.v1.size()), s2);
    if (total_sets <= BigInt(options_.exhaustive_budget)) {
      std::map<Vertex, std::int64_t> deg;
      std::vector<std::vector<Vertex>> edges;
      for_each_combination(b.v1, s2, [&](const std::vector<Vertex>& set) {
        ++b.d1.evaluations;
        if (ham_connected(set)) {
          edges.push_back(set);
          for (Vertex v : set) ++deg[v];
        }
        return true;
      });
      std::int64_t low = std::numeric_limits<std::int64_t>::max();
      for (Vertex v : b.v1) low = std::min(low, deg[v]);
      b.d1.ratio = Rational(low) / Rational(binomial(static_cast<int>(b.v1.size()) - 1, s2 - 1));
      b.p2_edges = std::move(edges);
      return;
    }
    b.d1.sampled = true;
    Rational low = 1;
    for (Vertex v : b.v1) {
      std::vector<Vertex> rest;
      for (Vertex u : b.v1)
        if (u != v) rest.push_back(u);
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < options_.samples; ++i) {
        auto set = construct_detail::random_subset(rest, s2 - 1, s);
        set = construct_detail::sorted_union(set, std::vector<Vertex>{v});
        ++b.d1.evaluations;
        hits += ham_connected(set);
      }
      low = std::min(low, make_rational(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(options_.samples)));
    }
    b.d1.ratio = low;
  }

  void compute_d3(Base& b, SeededStream& s) {
    const int ell = plan_.ell;
    const int width = plan_.s1 - 2 * ell;
    b.d3.name = "D3";
    b.d3.threshold = construct_detail::threshold_for(plan_.s1);
    const std::uint64_t completions = construct_detail::power_u64(static_cast<std::uint64_t>(plan_.m), width - 1);
    const BigInt pairs = binomial(static_cast<int>(b.v1.size()), 2 * ell) * BigInt(static_cast<std::uint64_t>(b.v2.size()));
    auto count_for = [&](const std::vector<Vertex>& j_set, std::size_t part, Vertex v, bool sample) -> Rational {
      std::vector<std::vector<Vertex>> others;
      for (std::size_t p = 0; p < b.v2_parts.size(); ++p)
        if (p != part) others.push_back(b.v2_parts[p]);
      std::uint64_t hits = 0, tried = 0;
      auto test = [&](const std::vector<Vertex>& pick) {
        auto set = construct_detail::sorted_union(j_set, pick);
        set = construct_detail::sorted_union(set, std::vector<Vertex>{v});
        ++b.d3.evaluations;
        ++tried;
        hits += ham_connected(set);
      };
      if (!sample || completions <= options_.samples) {
        construct_detail::for_each_transversal(others, test);
      } else {
        for (std::uint64_t i = 0; i < options_.samples; ++i) {
          std::vector<Vertex> pick;
          for (const auto& p : others) pick.push_back(p[static_cast<std::size_t>(s.uniform_below(static_cast<std::uint64_t>(p.size())))]);
          test(pick);
        }
      }
      return make_rational(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(tried));
    };
    Rational low = 1;
    if (pairs * BigInt(completions) <= BigInt(options_.exhaustive_budget)) {
      for_each_combination(b.v1, 2 * ell, [&](const std::vector<Vertex>& j_set) {
        for (std::size_t p = 0; p < b.v2_parts.size(); ++p)
          for (Vertex v : b.v2_parts[p]) low = std::min(low, count_for(j_set, p, v, false));
        return true;
      });
    } else {
      b.d3.sampled = true;
      for (std::uint64_t i = 0; i < options_.samples; ++i) {
        auto j_set = construct_detail::random_subset(b.v1, 2 * ell, s);
        const auto p = static_cast<std::size_t>(s.uniform_below(static_cast<std::uint64_t>(b.v2_parts.size())));
        const Vertex v = b.v2_parts[p][static_cast<std::size_t>(s.uniform_below(static_cast<std::uint64_t>(b.v2_parts[p].size())))];
        low = std::min(low, count_for(j_set, p, v, true));
      }
    }
    b.d3.ratio = low;
  }

  std::vector<Vertex> choose_v0(const Base& base, SeededStream& stream) {
    if (base.p2_edges) {
      if (base.p2_edges->empty()) throw ConstructionInfeasible("P2[V1] has no edges");
      return (*base.p2_edges)[static_cast<std::size_t>(stream.uniform_below(static_cast<std::uint64_t>(base.p2_edges->size())))];
    }
    for (std::uint64_t i = 0; i < options_.v0_rejection_limit; ++i) {
      auto set = construct_detail::random_subset(base.v1, plan_.s2, stream);
      if (ham_connected(set)) return set;
    }
    throw ConstructionInfeasible("no edge of P2[V1] found by rejection sampling");
  }

  const Inner& ensure_inner(const std::vector<Vertex>& v0) {
    const VertexMask key = mask_of(v0);
    if (auto it = inner_.find(key); it != inner_.end()) return it->second;
    const Base& base = ensure_base();
    std::vector<Vertex> rest;
    for (Vertex v : base.v1)
      if (!std::binary_search(v0.begin(), v0.end(), v)) rest.push_back(v);
    const int size = plan_.m - 1;
    const std::uint64_t transversals = construct_detail::power_u64(static_cast<std::uint64_t>(size), plan_.s1);
    if (transversals > options_.enumeration_budget) throw BudgetExceeded("P1^1 enumeration exceeds the budget");
    std::optional<Inner> best;
    for (int attempt = 0; attempt < options_.retries; ++attempt) {
      SeededStream s = SeededStream(options_.partition_seed, key).child(static_cast<std::uint64_t>(attempt));
      auto order = rest;
      s.shuffle(order);
      Inner in;
      in.d2.name = "D2";
      in.d2.threshold = construct_detail::threshold_for(plan_.s1);
      for (int j = 0; j < plan_.s1; ++j) {
        std::vector<Vertex> part(order.begin() + static_cast<std::ptrdiff_t>(j) * size, order.begin() + static_cast<std::ptrdiff_t>(j + 1) * size);
        std::sort(part.begin(), part.end());
        in.parts.push_back(std::move(part));
      }
      // Labels follow the part order so the partite matcher sees parts as label blocks.
      std::vector<Vertex> label_of(static_cast<std::size_t>(plan_.n) + 1, 0);
      std::vector<std::vector<Vertex>> label_parts;
      for (const auto& part : in.parts) {
        label_parts.emplace_back();
        for (Vertex v : part) {
          in.labels.push_back(v);
          label_of[static_cast<std::size_t>(v)] = static_cast<Vertex>(in.labels.size());
          label_parts.back().push_back(static_cast<Vertex>(in.labels.size()));
        }
      }
      std::vector<Edge> edges;
      std::map<Vertex, std::int64_t> deg;
      if (size > 0) {
        construct_detail::for_each_transversal(in.parts, [&](const std::vector<Vertex>& pick) {
          auto set = pick;
          std::sort(set.begin(), set.end());
          ++in.d2.evaluations;
          if (!ham_connected(set)) return;
          Edge e;
          for (Vertex v : set) {
            ++deg[v];
            e.push_back(label_of[static_cast<std::size_t>(v)]);
          }
          edges.push_back(std::move(e));
        });
        std::int64_t low = std::numeric_limits<std::int64_t>::max();
        for (Vertex v : rest) low = std::min(low, deg[v]);
        in.d2.ratio = Rational(low) / Rational(BigInt(construct_detail::power_u64(static_cast<std::uint64_t>(size), plan_.s1 - 1)));
      } else {
        in.d2.ratio = 1;  // no vertices to cover
      }
      in.matchings = std::make_shared<PerfectMatchings>(Hypergraph(static_cast<int>(in.labels.size()), plan_.s1, std::move(edges)), label_parts);
      if (in.d2.holds()) return inner_.emplace(key, std::move(in)).first->second;
      if (!best || in.d2.margin() > best->d2.margin()) best = std::move(in);
    }
    throw ConstructionInfeasible("no partition of V1 \\ V0 satisfies (D2) after " + std::to_string(options_.retries) +
                                 " attempts; best: " + construct_detail::describe(best->d2));
  }

  const std::vector<Vertex>& chain_on(const std::vector<Vertex>& set) {
    const VertexMask key = mask_of(set);
    if (auto it = chain_cache_.find(key); it != chain_cache_.end()) return it->second;
    return chain_cache_.emplace(key, realize_open_chain(*host_, link_, set, options_.search)).first->second;
  }

  const std::vector<Vertex>& connector_on(const std::vector<Vertex>& set, const Edge& start, const Edge& end) {
    auto key = std::make_tuple(mask_of(set), start, end);
    if (auto it = connector_cache_.find(key); it != connector_cache_.end()) return it->second;
    return connector_cache_.emplace(key, realize_connector(*host_, link_, set, start, end, options_.search)).first->second;
  }

  std::shared_ptr<const Digraph> host_;
  Link link_;
  ConstructOptions options_;
  ConstructionPlan plan_;
  std::optional<Base> base_;
  std::map<VertexMask, Inner> inner_;
  std::map<VertexMask, bool> ham_cache_;
  std::map<VertexMask, std::vector<Vertex>> chain_cache_;
  std::map<std::tuple<VertexMask, Edge, Edge>, std::vector<Vertex>> connector_cache_;
};

inline PartitionWitness partition_vertices(const Digraph& host, const Link& link, int s1, SeededStream& stream,
                                           int retries = 20) {
  ConstructOptions options;
  options.retries = retries;
  return Constructor(host, link, s1, options).partition(stream);
}

inline ConstructionResult construct_chain(const Digraph& host, const Link& link, int s1, SeededStream& stream, int retries = 20) {
  ConstructOptions options;
  options.retries = retries;
  return Constructor(host, link, s1, options).construct(stream);
}

// ---- serialization and replay ----

inline nlohmann::json margin_to_json(const ConditionMargin& c) {
  return {{"ratio", to_string(c.ratio)},
          {"threshold", to_string(c.threshold)},
          {"holds", c.holds()},
          {"sampled", c.sampled},
          {"evaluations", c.evaluations}};
}

inline ConditionMargin margin_from_json(const std::string& name, const nlohmann::json& j) {
  ConditionMargin c;
  c.name = name;
  c.ratio = parse_rational(j.at("ratio").get<std::string>());
  c.threshold = parse_rational(j.at("threshold").get<std::string>());
  c.sampled = j.at("sampled").get<bool>();
  c.evaluations = j.at("evaluations").get<std::uint64_t>();
  return c;
}

inline nlohmann::json to_json(const ConstructionResult& r, const Link& link) {
  nlohmann::json connectors = nlohmann::json::array();
  for (const auto& c : r.connectors) connectors.push_back({{"token", c.token}, {"vertices", c.vertices}, {"ordering", c.ordering}});
  return {{"format", "chainforge-construction"},
          {"version", 1},
          {"link", serialize(link)},
          {"plan",
           {{"n", r.plan.n}, {"s1", r.plan.s1}, {"s2", r.plan.s2}, {"m", r.plan.m}, {"m_prime", r.plan.m_prime},
            {"ell", r.plan.ell}, {"r", r.plan.r}}},
          {"partition",
           {{"v1", r.witness.v1},
            {"v2", r.witness.v2},
            {"v0", r.witness.v0},
            {"v1_parts", r.witness.v1_parts},
            {"v2_parts", r.witness.v2_parts},
            {"attempts", r.witness.attempts},
            {"D1", margin_to_json(r.witness.d1)},
            {"D2", margin_to_json(r.witness.d2)},
            {"D3", margin_to_json(r.witness.d3)}}},
          {"cover", {{"matching", r.matching}, {"chains", r.chains}}},
          {"connect", {{"permutation", r.permutation}, {"connectors", connectors}}},
          {"ordering", r.ordering},
          {"desk_scale", r.desk_scale()},
          {"deviations", r.deviations}};
}

/// Parses a stored construction. Structural problems raise ParseError (line 0: JSON content).
inline ConstructionResult construction_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "chainforge-construction") throw ParseError(0, "not a construction record");
    if (j.at("version").get<int>() != 1) throw ParseError(0, "unsupported construction version");
    ConstructionResult r;
    const auto& p = j.at("plan");
    r.plan.n = p.at("n");
    r.plan.s1 = p.at("s1");
    r.plan.s2 = p.at("s2");
    r.plan.m = p.at("m");
    r.plan.m_prime = p.at("m_prime");
    r.plan.ell = p.at("ell");
    r.plan.r = p.at("r");
    const auto& w = j.at("partition");
    r.witness.v1 = w.at("v1").get<std::vector<Vertex>>();
    r.witness.v2 = w.at("v2").get<std::vector<Vertex>>();
    r.witness.v0 = w.at("v0").get<std::vector<Vertex>>();
    r.witness.v1_parts = w.at("v1_parts").get<std::vector<std::vector<Vertex>>>();
    r.witness.v2_parts = w.at("v2_parts").get<std::vector<std::vector<Vertex>>>();
    r.witness.attempts = w.at("attempts");
    r.witness.d1 = margin_from_json("D1", w.at("D1"));
    r.witness.d2 = margin_from_json("D2", w.at("D2"));
    r.witness.d3 = margin_from_json("D3", w.at("D3"));
    r.matching = j.at("cover").at("matching").get<std::vector<Edge>>();
    r.chains = j.at("cover").at("chains").get<std::vector<std::vector<Vertex>>>();
    r.permutation = j.at("connect").at("permutation").get<std::vector<int>>();
    for (const auto& c : j.at("connect").at("connectors"))
      r.connectors.push_back({c.at("token").get<int>(), c.at("vertices").get<std::vector<Vertex>>(), c.at("ordering").get<std::vector<Vertex>>()});
    r.ordering = j.at("ordering").get<std::vector<Vertex>>();
    r.deviations = j.at("deviations").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed construction record: ") + e.what());
  }
}

struct ReplayReport {
  bool valid = false;
  std::string reason;
};

/// Re-validates a stored construction against the host without randomness: plan arithmetic,
/// partition shape, matchings (transversal and Hamilton-connected), the deterministic chain
/// realizations, the assembled ordering, and closed-chain validity.
inline ReplayReport replay_construction(const Digraph& host, const Link& link, const ConstructionResult& r,
                                        ConstructOptions options = {}) {
  ReplayReport rep;
  auto fail = [&](std::string why) {
    rep.valid = false;
    rep.reason = std::move(why);
    return rep;
  };
  ConstructionPlan plan;
  try {
    plan = plan_parameters(host.n(), r.plan.s1, link.ell(), link.r());
  } catch (const ParameterError& e) {
    return fail(std::string("plan: ") + e.what());
  }
  if (!(plan == r.plan)) return fail("stored plan differs from the recomputed plan");
  const auto& w = r.witness;
  auto sorted = [](std::vector<Vertex> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (static_cast<int>(w.v1.size()) != plan.v1_size() || static_cast<int>(w.v2.size()) != plan.v2_size())
    return fail("V1/V2 sizes do not match the plan");
  std::vector<Vertex> all = w.v1;
  all.insert(all.end(), w.v2.begin(), w.v2.end());
  if (sorted(all) != iota_vertices(plan.n)) return fail("V1 and V2 do not partition the vertex set");
  if (static_cast<int>(w.v0.size()) != plan.s2) return fail("V0 has the wrong size");
  if (static_cast<int>(w.v1_parts.size()) != plan.s1 || static_cast<int>(w.v2_parts.size()) != plan.s1 - 2 * plan.ell)
    return fail("wrong number of parts");
  std::vector<Vertex> v1_again = w.v0;
  for (const auto& part : w.v1_parts) {
    if (static_cast<int>(part.size()) != plan.m - 1) return fail("a part of V1 \\ V0 has the wrong size");
    v1_again.insert(v1_again.end(), part.begin(), part.end());
  }
  if (sorted(v1_again) != sorted(w.v1)) return fail("V0 and the V1 parts do not partition V1");
  std::vector<Vertex> v2_again;
  for (const auto& part : w.v2_parts) {
    if (static_cast<int>(part.size()) != plan.m) return fail("a part of V2 has the wrong size");
    v2_again.insert(v2_again.end(), part.begin(), part.end());
  }
  if (sorted(v2_again) != sorted(w.v2)) return fail("the V2 parts do not partition V2");

  Constructor ctor(host, link, plan.s1, options);
  if (!ctor.ham_connected(w.v0)) return fail("D[V0] is not Hamilton L-connected");
  std::vector<Vertex> covered;
  for (const auto& e : r.matching) {
    for (const auto& part : w.v1_parts)
      if (std::count_if(e.begin(), e.end(), [&](Vertex v) { return std::binary_search(part.begin(), part.end(), v); }) != 1)
        return fail("matching edge is not a transversal of the V1 parts");
    if (!ctor.ham_connected(e)) return fail("matching edge is not Hamilton L-connected");
    covered.insert(covered.end(), e.begin(), e.end());
  }
  std::vector<Vertex> v1_rest;
  for (const auto& part : w.v1_parts) v1_rest.insert(v1_rest.end(), part.begin(), part.end());
  if (sorted(covered) != sorted(v1_rest)) return fail("matching does not cover V1 \\ V0 exactly");
  const int m = plan.m;
  if (static_cast<int>(r.permutation.size()) != m || sorted(r.permutation) != [&] {
        std::vector<int> id(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) id[static_cast<std::size_t>(i)] = i;
        return id;
      }())
    return fail("chain order is not a permutation");
  if (static_cast<int>(r.connectors.size()) != m) return fail("wrong number of connectors");
  std::vector<Vertex> v2_cover;
  for (const auto& c : r.connectors) {
    if (static_cast<int>(c.vertices.size()) != plan.s1) return fail("connector has the wrong order");
    if (!ctor.ham_connected(c.vertices)) return fail("connector set is not Hamilton L-connected");
    for (Vertex v : c.vertices)
      if (std::binary_search(v2_again.begin(), v2_again.end(), v)) v2_cover.push_back(v);
  }
  v2_again = sorted(v2_again);
  if (sorted(v2_cover) != v2_again) return fail("connectors do not cover V2 exactly");
  if (ctor.realize_chains(w, r.matching) != r.chains) return fail("stored chains differ from their deterministic realization");
  std::vector<Vertex> ordering;
  try {
    ordering = ctor.replay(r.chains, r.permutation, r.connectors);
  } catch (const InvariantViolation& e) {
    return fail(e.what());
  } catch (const ParameterError&) {
    return fail("connector endpoints do not lie inside the connector set");
  }
  if (ordering != r.ordering) return fail("stored ordering differs from the replayed ordering");
  if (!validate_closed_chain(link, host, ordering)) return fail("ordering is not a closed Hamilton chain of the host");
  rep.valid = true;
  return rep;
}

}  // namespace chainforge
