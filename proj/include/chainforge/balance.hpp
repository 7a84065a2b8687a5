#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"
#include "hypergraph.hpp"
#include "link.hpp"
#include "rational.hpp"

namespace chainforge {

enum class BalanceMethod {
  automatic,       // edge subsets when e(C) <= max_edges, else vertex supports
  edge_subsets,    // every nonempty edge subset, Gray-code order
  vertex_supports  // every vertex set with its induced chain edges
};

struct BalanceWitness {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  bool violates_global = false;  // e > d v
  bool violates_small = false;   // v <= n/(2 v(L)) and e > d v - lambda
};

/// Outcome of an exhaustive (d,lambda)-balancedness check of the canonical closed
/// chain on n vertices. This is a finite check at one n; larger chains are not covered.
struct BalanceReport {
  Rational d;
  Rational lambda;
  bool holds = true;
  std::optional<BalanceWitness> witness;
  BalanceMethod method = BalanceMethod::automatic;
  std::uint64_t subgraphs_checked = 0;
};

struct BalanceOptions {
  BalanceMethod method = BalanceMethod::automatic;
  int max_edges = 24;
  int max_vertices = 24;
};

namespace balance_detail {

struct Thresholds {
  // d = d_num/den, lambda = l_num/den
  BigInt d_num, l_num, den;
};

inline Thresholds common(const Rational& d, const Rational& lambda) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  BigInt den = denominator(d) * denominator(lambda);
  return {numerator(d) * denominator(lambda), numerator(lambda) * denominator(d), den};
}

// Fast path in 64-bit arithmetic; all quantities are tiny at desk scale.
struct SmallThresholds {
  std::int64_t d_num, l_num, den;
};

inline std::optional<SmallThresholds> small(const Thresholds& t) {
  const BigInt lim = BigInt(1) << 40;
  if (abs(t.d_num) > lim || abs(t.l_num) > lim || t.den > lim) return std::nullopt;
  return SmallThresholds{t.d_num.convert_to<std::int64_t>(), t.l_num.convert_to<std::int64_t>(),
                         t.den.convert_to<std::int64_t>()};
}

}  // namespace balance_detail

/// Decides (B1) e <= d v for every subgraph with e > 0 edges and, when
/// 2 v v(L) <= n, also (B2) e <= d v - lambda. Subgraphs are edge sets with their
/// vertex support. Throws BudgetExceeded when the chain is too large to enumerate.
inline BalanceReport check_balanced(const Link& link, int n, const Rational& d, const Rational& lambda,
                                    BalanceOptions options = {}) {
  if (n % link.r() != 0) throw ParameterError("n must be divisible by r");
  if (n < 2 * link.order()) throw ParameterError("closed chain needs n >= 2(r+l)");
  if (n > kMaxMaskVertices) throw BudgetExceeded("balance check supports n <= 64");
  auto ordering = iota_vertices(n);
  ClosedChain chain = build_closed_chain(link, ordering);
  const auto& tuples = chain.edges.tuples();
  const int num_edges = static_cast<int>(tuples.size());
  std::vector<VertexMask> masks;
  for (const auto& t : tuples) masks.push_back(mask_of(t));

  BalanceReport report;
  report.d = d;
  report.lambda = lambda;
  BalanceMethod method = options.method;
  if (method == BalanceMethod::automatic) {
    if (num_edges <= options.max_edges) method = BalanceMethod::edge_subsets;
    else if (n <= options.max_vertices) method = BalanceMethod::vertex_supports;
    else throw BudgetExceeded("chain has " + std::to_string(num_edges) + " edges and " + std::to_string(n) +
                              " vertices; both exceed the enumeration budget");
  }
  report.method = method;
  if (method == BalanceMethod::edge_subsets && num_edges > options.max_edges) {
    throw BudgetExceeded("edge-subset enumeration needs e(C) <= " + std::to_string(options.max_edges));
  }
  if (method == BalanceMethod::vertex_supports && n > options.max_vertices) {
    throw BudgetExceeded("vertex-support enumeration needs n <= " + std::to_string(options.max_vertices));
  }

  const auto thr = balance_detail::common(d, lambda);
  const auto fast = balance_detail::small(thr);
  const int link_order = link.order();
  // Returns (violates B1, violates B2).
  auto violation = [&](std::int64_t e, std::int64_t v) -> std::pair<bool, bool> {
    const bool small_graph = 2 * v * link_order <= n;
    if (fast) {
      const std::int64_t lhs = e * fast->den;
      const std::int64_t rhs = fast->d_num * v;
      return {lhs > rhs, small_graph && lhs > rhs - fast->l_num};
    }
    const BigInt lhs = BigInt(e) * thr.den;
    const BigInt rhs = thr.d_num * v;
    return {lhs > rhs, small_graph && lhs > rhs - thr.l_num};
  };
  auto record = [&](VertexMask support, auto&& edge_selected, std::pair<bool, bool> bad) {
    BalanceWitness w;
    w.vertices = mask_vertices(support);
    for (int i = 0; i < num_edges; ++i)
      if (edge_selected(i)) w.edges.push_back(tuples[static_cast<std::size_t>(i)]);
    w.violates_global = bad.first;
    w.violates_small = bad.second;
    report.holds = false;
    report.witness = std::move(w);
  };

  if (method == BalanceMethod::edge_subsets) {
    std::vector<int> multiplicity(static_cast<std::size_t>(n) + 1, 0);
    VertexMask support = 0;
    std::uint64_t gray = 0;
    const std::uint64_t total = std::uint64_t{1} << num_edges;
    for (std::uint64_t i = 1; i < total; ++i) {
      const int flip = std::countr_zero(i);
      const std::uint64_t bit = std::uint64_t{1} << flip;
      gray ^= bit;
      const bool added = (gray & bit) != 0;
      for (Vertex v : tuples[static_cast<std::size_t>(flip)]) {
        auto& m = multiplicity[static_cast<std::size_t>(v)];
        if (added) {
          if (m++ == 0) support |= vertex_bit(v);
        } else {
          if (--m == 0) support &= ~vertex_bit(v);
        }
      }
      ++report.subgraphs_checked;
      auto bad = violation(std::popcount(gray), std::popcount(support));
      if (bad.first || bad.second) {
        const std::uint64_t chosen = gray;
        record(support, [&](int j) { return (chosen >> j) & 1U; }, bad);
        return report;
      }
    }
    return report;
  }

  const VertexMask full = n == 64 ? ~VertexMask{0} : (VertexMask{1} << n) - 1;
  for (VertexMask u = 1; u <= full && u != 0; ++u) {
    std::int64_t e = 0;
    VertexMask support = 0;
    for (auto m : masks) {
      if ((m & ~u) == 0) {
        ++e;
        support |= m;
      }
    }
    if (e == 0) continue;
    ++report.subgraphs_checked;
    // Only the support matters: isolated vertices of u can only help.
    if (support != u) continue;
    auto bad = violation(e, std::popcount(support));
    if (bad.first || bad.second) {
      record(support, [&](int j) { return (masks[static_cast<std::size_t>(j)] & ~support) == 0; }, bad);
      return report;
    }
    if (u == full) break;
  }
  return report;
}

}  // namespace chainforge
