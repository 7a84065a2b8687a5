#pragma once

#include <algorithm>
#include <bit>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"
#include "random.hpp"

namespace chainforge {

inline std::string to_string(u128 x) {
  if (x == 0) return "0";
  std::string s;
  while (x > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(x % 10)));
    x /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

/// Exact perfect-matching counting and uniform sampling over the vertex set [n] of H.
/// Count-and-descend: a state is the set of covered vertices, and the lowest uncovered
/// vertex must be covered by an edge whose smallest vertex it is. Counts are memoized.
class PerfectMatchings {
 public:
  explicit PerfectMatchings(const Hypergraph& h, std::size_t max_states = 4'000'000)
      : n_(h.n()), k_(h.k()), max_states_(max_states) {
    if (h.n() > kMaxMaskVertices) throw BudgetExceeded("perfect matchings supported for at most 64 vertices");
    by_min_.resize(static_cast<std::size_t>(n_) + 2);
    for (const auto& e : h.edges()) {
      by_min_[static_cast<std::size_t>(e.front())].push_back(mask_of(e));
      edges_.emplace(mask_of(e), e);
    }
    full_ = n_ == 64 ? ~VertexMask{0} : (VertexMask{1} << n_) - 1;
  }

  /// Restricts to an s-partite graph: parts must partition [n] and every edge must be a transversal.
  PerfectMatchings(const Hypergraph& h, const std::vector<std::vector<Vertex>>& parts, std::size_t max_states = 4'000'000)
      : PerfectMatchings(h, max_states) {
    std::vector<int> part_of(static_cast<std::size_t>(h.n()) + 1, -1);
    for (std::size_t p = 0; p < parts.size(); ++p)
      for (Vertex v : parts[p]) {
        if (v < 1 || v > h.n() || part_of[static_cast<std::size_t>(v)] >= 0)
          throw ParameterError("parts must partition the vertex set");
        part_of[static_cast<std::size_t>(v)] = static_cast<int>(p);
      }
    for (int v = 1; v <= h.n(); ++v)
      if (part_of[static_cast<std::size_t>(v)] < 0) throw ParameterError("parts must cover the vertex set");
    if (static_cast<int>(parts.size()) != h.k()) throw ParameterError("an s-partite s-graph needs s parts");
    for (const auto& e : h.edges()) {
      std::vector<bool> hit(parts.size(), false);
      for (Vertex v : e) {
        auto p = static_cast<std::size_t>(part_of[static_cast<std::size_t>(v)]);
        if (hit[p]) throw ParameterError("edge meets a part twice");
        hit[p] = true;
      }
    }
  }

  u128 count() {
    if (n_ % k_ != 0) return 0;
    return count_from(0);
  }

  bool exists() {
    if (n_ % k_ != 0) return false;
    return exists_from(0);
  }

  /// A uniformly random perfect matching (edges sorted), or nullopt when none exists.
  std::optional<std::vector<Edge>> sample(SeededStream& stream) {
    if (count() == 0) return std::nullopt;
    std::vector<Edge> matching;
    VertexMask mask = 0;
    while (mask != full_) {
      const u128 total = count_from(mask);
      u128 pick = stream.uniform_below_wide(total);
      const int low = std::countr_one(mask) + 1;
      bool chosen = false;
      for (VertexMask e : by_min_[static_cast<std::size_t>(low)]) {
        if (e & mask) continue;
        const u128 c = count_from(mask | e);
        if (pick < c) {
          matching.push_back(edges_.at(e));
          mask |= e;
          chosen = true;
          break;
        }
        pick -= c;
      }
      if (!chosen) throw InvariantViolation("matching sampler lost its way");
    }
    std::sort(matching.begin(), matching.end());
    return matching;
  }

 private:
  u128 count_from(VertexMask mask) {
    if (mask == full_) return 1;
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
    if (memo_.size() >= max_states_) throw BudgetExceeded("perfect-matching state budget exceeded");
    const int low = std::countr_one(mask) + 1;
    u128 total = 0;
    for (VertexMask e : by_min_[static_cast<std::size_t>(low)]) {
      if (e & mask) continue;
      const u128 c = count_from(mask | e);
      if (total + c < total) throw BudgetExceeded("perfect-matching count overflows 128 bits");
      total += c;
    }
    memo_.emplace(mask, total);
    return total;
  }

  bool exists_from(VertexMask mask) {
    if (mask == full_) return true;
    if (dead_.count(mask)) return false;
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second > 0;
    const int low = std::countr_one(mask) + 1;
    for (VertexMask e : by_min_[static_cast<std::size_t>(low)]) {
      if (e & mask) continue;
      if (exists_from(mask | e)) return true;
    }
    if (dead_.size() >= max_states_) throw BudgetExceeded("perfect-matching state budget exceeded");
    dead_.insert(mask);
    return false;
  }

  int n_;
  int k_;
  std::size_t max_states_;
  VertexMask full_ = 0;
  std::vector<std::vector<VertexMask>> by_min_;
  std::unordered_map<VertexMask, Edge> edges_;
  std::unordered_map<VertexMask, u128> memo_;
  std::unordered_set<VertexMask> dead_;
};

/// Whether H[vertices] has a perfect matching (all of `vertices` covered).
inline bool has_perfect_matching(const Hypergraph& h, std::span<const Vertex> vertices) {
  if (vertices.size() % static_cast<std::size_t>(h.k()) != 0) return false;
  // Relabel the vertex set to 1..|S| so the matcher works on a full vertex range.
  std::vector<int> label(static_cast<std::size_t>(h.n()) + 1, 0);
  int next = 0;
  for (Vertex v : vertices) label[static_cast<std::size_t>(v)] = ++next;
  std::vector<Edge> edges;
  for (const auto& e : h.edges()) {
    Edge m;
    for (Vertex v : e) {
      if (!label[static_cast<std::size_t>(v)]) break;
      m.push_back(label[static_cast<std::size_t>(v)]);
    }
    if (m.size() == e.size()) {
      std::sort(m.begin(), m.end());
      edges.push_back(std::move(m));
    }
  }
  return PerfectMatchings(Hypergraph(next, h.k(), std::move(edges))).exists();
}

inline bool has_perfect_matching(const Hypergraph& h) {
  auto all = iota_vertices(h.n());
  return has_perfect_matching(h, all);
}

/// Uniformly random perfect matching of H, optionally checked to be s-partite with the given parts.
inline std::optional<std::vector<Edge>> sample_perfect_matching_uniform(
    const Hypergraph& h, const std::optional<std::vector<std::vector<Vertex>>>& parts, SeededStream& stream) {
  if (parts) return PerfectMatchings(h, *parts).sample(stream);
  return PerfectMatchings(h).sample(stream);
}

}  // namespace chainforge
