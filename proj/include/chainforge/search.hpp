#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"
#include "hypergraph.hpp"
#include "link.hpp"

namespace chainforge {

enum class SearchStatus { found, none, unknown };

inline const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::found: return "found";
    case SearchStatus::none: return "none";
    case SearchStatus::unknown: return "unknown";
  }
  return "?";
}

struct SearchOptions {
  std::uint64_t budget = 20'000'000;  // search nodes (vertex placements tried)
  bool count = false;                 // count chains instead of stopping at the first
};

struct ChainSearchResult {
  SearchStatus status = SearchStatus::none;
  std::vector<Vertex> ordering;  // first solution found (lexicographically least under the fill order)
  // Chains whose edges span the same vertex sets count once (a cycle and its reversal are one).
  // A lower bound when status is unknown.
  std::uint64_t count = 0;
  std::uint64_t nodes = 0;

  bool found() const noexcept { return status == SearchStatus::found; }
};

namespace search_detail {

using IncidentLists = std::vector<std::vector<VertexMask>>;

/// Per vertex, the distinct vertex sets of host k-tuples lying inside `in_set`.
inline IncidentLists incident_masks(const Digraph& host, const Link& link, VertexMask in_set) {
  IncidentLists incident(static_cast<std::size_t>(host.n()) + 1);
  for (const auto& t : host.tuples()) {
    if (static_cast<int>(t.size()) != link.k()) continue;
    const VertexMask m = mask_of(t);
    if ((m & ~in_set) != 0) continue;
    for (Vertex v : t) incident[static_cast<std::size_t>(v)].push_back(m);
  }
  for (auto& list : incident) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return incident;
}

class HamiltonSearch {
 public:
  HamiltonSearch(const Digraph& host, const Link& link, std::span<const Vertex> vertices, const std::optional<Edge>& start,
                 const std::optional<Edge>& end, bool closed, SearchOptions options,
                 std::shared_ptr<const IncidentLists> shared_incident = nullptr)
      : host_(host), link_(link), closed_(closed), options_(options) {
    vertices_.assign(vertices.begin(), vertices.end());
    std::sort(vertices_.begin(), vertices_.end());
    if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
      throw ParameterError("search vertex set repeats a vertex");
    for (Vertex v : vertices_)
      if (v < 1 || v > host.n()) throw ParameterError("search vertex outside the host");
    if (host.n() > kMaxMaskVertices) throw BudgetExceeded("chain search supports hosts with at most 64 vertices");
    n_ = static_cast<int>(vertices_.size());
    for (Vertex v : vertices_) in_set_ |= vertex_bit(v);

    if (closed_) {
      if (start || end) throw ParameterError("closed chains have no endpoints");
      if (!valid_closed_length(link, n_)) throw ParameterError("closed chain needs r | n and n >= 2(r+l)");
    } else {
      if (!valid_open_length(link, n_)) throw ParameterError("open chain needs n >= r+l and n = l mod r");
    }
    slot_.assign(static_cast<std::size_t>(n_), 0);
    std::vector<bool> prefilled(static_cast<std::size_t>(n_), false);
    VertexMask fixed = 0;
    auto prefill = [&](const Edge& t, int first) {
      if (static_cast<int>(t.size()) != link.ell()) throw ParameterError("endpoint tuple must have length l");
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Vertex v = t[i];
        if (!(in_set_ & vertex_bit(v))) throw ParameterError("endpoint vertex outside the search set");
        if (fixed & vertex_bit(v)) throw ParameterError("endpoint tuples must be disjoint and repetition-free");
        fixed |= vertex_bit(v);
        const auto p = static_cast<std::size_t>(first) + i;
        slot_[p] = v;
        prefilled[p] = true;
      }
    };
    if (start) prefill(*start, 0);
    if (end) prefill(*end, n_ - link.ell());

    // Fill order: prefilled positions, then the rest left to right.
    for (int p = 0; p < n_; ++p)
      if (prefilled[static_cast<std::size_t>(p)]) fill_order_.push_back(p);
    num_prefilled_ = static_cast<int>(fill_order_.size());
    for (int p = 0; p < n_; ++p)
      if (!prefilled[static_cast<std::size_t>(p)]) fill_order_.push_back(p);
    std::vector<int> fill_index(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) fill_index[static_cast<std::size_t>(fill_order_[static_cast<std::size_t>(i)])] = i;

    positions_ = chain_position_tuples(link, n_, closed_);
    closing_.resize(static_cast<std::size_t>(n_));
    pending_.assign(static_cast<std::size_t>(n_), 0);
    std::vector<std::set<VertexMask>> position_sets(static_cast<std::size_t>(n_));
    for (std::size_t c = 0; c < positions_.size(); ++c) {
      int last = 0;
      VertexMask shape = 0;
      for (int p : positions_[c]) {
        last = std::max(last, fill_index[static_cast<std::size_t>(p)]);
        ++pending_[static_cast<std::size_t>(p)];
        shape |= VertexMask{1} << p;
      }
      closing_[static_cast<std::size_t>(last)].push_back(c);
      for (int p : positions_[c]) position_sets[static_cast<std::size_t>(p)].insert(shape);
    }
    // Fewest distinct edge vertex-sets through any position still to be filled.
    min_free_degree_ = static_cast<int>(positions_.size());
    for (int i = num_prefilled_; i < n_; ++i) {
      const int p = fill_order_[static_cast<std::size_t>(i)];
      min_free_degree_ = std::min(min_free_degree_, static_cast<int>(position_sets[static_cast<std::size_t>(p)].size()));
    }
    if (num_prefilled_ == n_) min_free_degree_ = 0;

    incident_ = shared_incident ? shared_incident : std::make_shared<const IncidentLists>(incident_masks(host, link, in_set_));
    position_of_.assign(static_cast<std::size_t>(host.n()) + 1, -1);
    for (int i = 0; i < num_prefilled_; ++i) {
      const int p = fill_order_[static_cast<std::size_t>(i)];
      used_ |= vertex_bit(slot_[static_cast<std::size_t>(p)]);
      position_of_[static_cast<std::size_t>(slot_[static_cast<std::size_t>(p)])] = p;
    }
    min_vertex_ = vertices_.empty() ? 0 : vertices_.front();
  }

  ChainSearchResult run() {
    ChainSearchResult result;
    bool ok = true;
    for (int i = 0; i < num_prefilled_ && ok; ++i) ok = close_constraints(i);
    if (ok) {
      try {
        search(num_prefilled_, result);
      } catch (const Abort&) {
      }
    }
    result.nodes = nodes_;
    result.count = seen_.size();
    if (budget_hit_) result.status = SearchStatus::unknown;
    else result.status = result.count > 0 ? SearchStatus::found : SearchStatus::none;
    // An exhausted budget after a solution is still a found chain when not counting.
    if (budget_hit_ && !options_.count && !result.ordering.empty()) result.status = SearchStatus::found;
    return result;
  }

 private:
  struct Abort {};

  bool edge_present(std::size_t c) const {
    std::array<Vertex, kMaxTupleLength> buf{};
    const auto& pos = positions_[c];
    for (std::size_t i = 0; i < pos.size(); ++i) buf[i] = slot_[static_cast<std::size_t>(pos[i])];
    return host_.has(std::span<const Vertex>(buf.data(), pos.size()));
  }

  // Checks the chain edges completed at fill index i and marks them done.
  bool close_constraints(int i) {
    const auto& list = closing_[static_cast<std::size_t>(i)];
    for (std::size_t c : list)
      if (!edge_present(c)) return false;
    for (std::size_t c : list)
      for (int p : positions_[c]) --pending_[static_cast<std::size_t>(p)];
    return true;
  }

  void reopen_constraints(int i) {
    for (std::size_t c : closing_[static_cast<std::size_t>(i)])
      for (int p : positions_[c]) ++pending_[static_cast<std::size_t>(p)];
  }

  // Every unplaced vertex still needs min_free_degree_ host edges (distinct vertex sets)
  // whose other vertices are unplaced or sit at positions with unfinished chain edges.
  bool feasible() const {
    if (min_free_degree_ == 0) return true;
    VertexMask blocked = 0;
    for (Vertex v : vertices_) {
      const int p = position_of_[static_cast<std::size_t>(v)];
      if (p >= 0 && pending_[static_cast<std::size_t>(p)] == 0) blocked |= vertex_bit(v);
    }
    for (Vertex v : vertices_) {
      if (used_ & vertex_bit(v)) continue;
      int available = 0;
      for (VertexMask m : (*incident_)[static_cast<std::size_t>(v)]) {
        if ((m & blocked) == 0 && ++available >= min_free_degree_) break;
      }
      if (available < min_free_degree_) return false;
    }
    return true;
  }

  void record(ChainSearchResult& result) {
    if (result.ordering.empty()) result.ordering = slot_;
    std::vector<Edge> edges;
    edges.reserve(positions_.size());
    for (const auto& pos : positions_) {
      Edge t;
      for (int p : pos) t.push_back(slot_[static_cast<std::size_t>(p)]);
      std::sort(t.begin(), t.end());
      edges.push_back(std::move(t));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    seen_.insert(std::move(edges));
    if (!options_.count) throw Abort{};
  }

  void search(int i, ChainSearchResult& result) {
    if (i == n_) {
      record(result);
      return;
    }
    const int p = fill_order_[static_cast<std::size_t>(i)];
    const bool min_forced = closed_ && p == link_.r() - 1 && !(used_ & vertex_bit(min_vertex_));
    for (Vertex v : vertices_) {
      if (used_ & vertex_bit(v)) continue;
      // Rotations by multiples of r give the same closed chain: keep the smallest vertex in the first block.
      if (closed_ && p >= link_.r() && v == min_vertex_) continue;
      if (min_forced && v != min_vertex_) continue;
      if (++nodes_ > options_.budget) {
        budget_hit_ = true;
        throw Abort{};
      }
      slot_[static_cast<std::size_t>(p)] = v;
      used_ |= vertex_bit(v);
      position_of_[static_cast<std::size_t>(v)] = p;
      if (close_constraints(i)) {
        if (feasible()) search(i + 1, result);
        reopen_constraints(i);
      }
      used_ &= ~vertex_bit(v);
      position_of_[static_cast<std::size_t>(v)] = -1;
    }
  }

  const Digraph& host_;
  const Link& link_;
  bool closed_;
  SearchOptions options_;
  std::vector<Vertex> vertices_;
  VertexMask in_set_ = 0;
  int n_ = 0;
  std::vector<Vertex> slot_;
  std::vector<int> fill_order_;
  int num_prefilled_ = 0;
  std::vector<std::vector<int>> positions_;
  std::vector<std::vector<std::size_t>> closing_;
  std::vector<int> pending_;
  int min_free_degree_ = 0;
  std::shared_ptr<const IncidentLists> incident_;
  std::vector<int> position_of_;
  VertexMask used_ = 0;
  Vertex min_vertex_ = 0;
  std::uint64_t nodes_ = 0;
  bool budget_hit_ = false;
  std::set<std::vector<Edge>> seen_;
};

}  // namespace search_detail

/// Exact backtracking search for a spanning L-chain of host[vertices].
/// Open chains may fix the first and/or last l vertices. Positions are filled left to
/// right (after any fixed endpoints); each chain edge is checked as soon as its last
/// position is filled, and candidates are tried in increasing vertex order.
/// Returns unknown, distinct from none, when the node budget runs out.
inline ChainSearchResult find_hamilton_chain(const Digraph& host, const Link& link, std::span<const Vertex> vertices,
                                             const std::optional<Edge>& start, const std::optional<Edge>& end,
                                             bool closed, SearchOptions options = {}) {
  search_detail::HamiltonSearch search(host, link, vertices, start, end, closed, options);
  return search.run();
}

inline ChainSearchResult find_hamilton_chain(const Digraph& host, const Link& link, const std::optional<Edge>& start,
                                             const std::optional<Edge>& end, bool closed, SearchOptions options = {}) {
  auto all = iota_vertices(host.n());
  return find_hamilton_chain(host, link, all, start, end, closed, options);
}

}  // namespace chainforge
