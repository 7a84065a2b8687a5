#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "graph_io.hpp"
#include "hypergraph.hpp"

namespace chainforge {

/// A (k,l,r)-link: ordered directed k-graph on template vertices 1..r+l whose
/// last l vertices span no edge. Closed and open chains repeat it with step r.
class Link {
 public:
  Link() = default;

  int k() const noexcept { return k_; }
  int ell() const noexcept { return ell_; }
  int r() const noexcept { return r_; }
  int order() const noexcept { return r_ + ell_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  bool operator==(const Link&) const = default;

 private:
  friend Link make_link(int k, int ell, int r, std::vector<Edge> edges, bool allow_empty);

  int k_ = 2;
  int ell_ = 0;
  int r_ = 1;
  std::vector<Edge> edges_;
};

inline Link make_link(int k, int ell, int r, std::vector<Edge> edges, bool allow_empty = false) {
  if (k < 2) throw ParameterError("link uniformity k must be at least 2");
  if (r < 1) throw ParameterError("link step r must be at least 1");
  if (ell < 0) throw ParameterError("link overlap l must be nonnegative");
  if (r + ell < k) throw ParameterError("link order r+l must be at least k");
  if (r + ell > kMaxIndexedVertex) throw ParameterError("link order too large");
  if (edges.empty() && !allow_empty) throw ParameterError("link has no edges");
  const int order = r + ell;
  for (const auto& e : edges) {
    if (static_cast<int>(e.size()) != k) throw ParameterError("link tuple arity differs from k");
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] < 1 || e[i] > order) throw ParameterError("link tuple vertex outside 1..r+l");
      for (std::size_t j = 0; j < i; ++j)
        if (e[i] == e[j]) throw ParameterError("link tuple repeats a vertex");
    }
    if (std::all_of(e.begin(), e.end(), [&](Vertex v) { return v > r; })) {
      throw ParameterError("link edge lies inside the last l vertices, which must be independent");
    }
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) throw ParameterError("duplicate link tuple");
  Link link;
  link.k_ = k;
  link.ell_ = ell;
  link.r_ = r;
  link.edges_ = std::move(edges);
  return link;
}

/// l-cycle link: one edge (1..k) with r = k - l. l = 0 gives the matching link.
inline Link ell_cycle_link(int k, int ell) {
  if (ell < 0 || ell > k - 1) throw ParameterError("ell_cycle link needs 0 <= l <= k-1");
  Edge e(static_cast<std::size_t>(k));
  std::iota(e.begin(), e.end(), 1);
  return make_link(k, ell, k - ell, {e});
}

inline Link matching_link(int k) { return ell_cycle_link(k, 0); }

/// (k,t-1,1)-link on 1..t with edges (1,i_1,...,i_{k-1}), 2 <= i_1 < ... < i_{k-1} <= t;
/// its chains are (t-k+1)th powers of tight cycles.
inline Link power_link(int k, int t) {
  if (k < 2 || t < k) throw ParameterError("power link needs 2 <= k <= t");
  std::vector<Vertex> tail(static_cast<std::size_t>(t - 1));
  std::iota(tail.begin(), tail.end(), 2);
  std::vector<Edge> edges;
  for_each_combination(tail, k - 1, [&](const std::vector<Vertex>& s) {
    Edge e{1};
    e.insert(e.end(), s.begin(), s.end());
    edges.push_back(std::move(e));
    return true;
  });
  return make_link(k, t - 1, 1, std::move(edges));
}

enum class LinkKind { ell_cycle, matching, power };

inline Link builtin_link(LinkKind kind, int a, int b = 0) {
  switch (kind) {
    case LinkKind::ell_cycle: return ell_cycle_link(a, b);
    case LinkKind::matching: return matching_link(a);
    case LinkKind::power: return power_link(a, b);
  }
  throw ParameterError("unknown link kind");
}

/// Parses "ell_cycle:k,l", "matching:k" or "power:k,t".
inline Link parse_link_spec(std::string_view spec) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ParameterError("link spec must look like kind:params");
  std::string kind(spec.substr(0, colon));
  std::vector<int> params;
  std::stringstream ss{std::string(spec.substr(colon + 1))};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      params.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("bad link parameter '" + item + "'");
    }
  }
  if (kind == "ell_cycle" && params.size() == 2) return ell_cycle_link(params[0], params[1]);
  if (kind == "matching" && params.size() == 1) return matching_link(params[0]);
  if (kind == "power" && params.size() == 2) return power_link(params[0], params[1]);
  throw ParameterError("unknown link spec '" + std::string(spec) + "'");
}

// Link text: "L <k> <ell> <r>" followed by the digraph format on r+l vertices.
inline std::string serialize(const Link& link) {
  std::ostringstream out;
  out << "L " << link.k() << ' ' << link.ell() << ' ' << link.r() << '\n';
  out << serialize(Digraph(link.order(), link.edges()));
  return out.str();
}

inline Link parse_link(std::string_view text) {
  using namespace io_detail;
  auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(1, "missing link header");
  auto header = split_ws(lines[0].text);
  if (header.size() != 4 || header[0] != "L") throw ParseError(lines[0].number, "expected 'L <k> <ell> <r>'");
  int k = to_int(header[1], lines[0].number);
  int ell = to_int(header[2], lines[0].number);
  int r = to_int(header[3], lines[0].number);
  if (lines.size() < 2) throw ParseError(lines[0].number, "missing digraph body");
  auto dh = split_ws(lines[1].text);
  if (dh.size() != 2 || dh[0] != "D") throw ParseError(lines[1].number, "expected 'D <r+ell>'");
  int n = to_int(dh[1], lines[1].number);
  if (n != r + ell) throw ParseError(lines[1].number, "link order must equal r+ell");
  Digraph body = parse_digraph_body(lines, 2, n);
  try {
    return make_link(k, ell, r, body.tuples());
  } catch (const ParameterError& e) {
    throw ParseError(lines[0].number, e.what());
  }
}

/// Link from either a spec string ("power:2,3") or a link file path.
inline Link resolve_link(const std::string& spec_or_path) {
  if (spec_or_path.find(':') != std::string::npos &&
      (spec_or_path.rfind("ell_cycle", 0) == 0 || spec_or_path.rfind("matching", 0) == 0 ||
       spec_or_path.rfind("power", 0) == 0)) {
    return parse_link_spec(spec_or_path);
  }
  return parse_link(read_text_file(spec_or_path));
}

/// Positions (0-based, into a vertex ordering) of every edge of every window of a chain on n vertices.
/// Closed chains use n/r windows with cyclic indices; open chains use (n-l)/r windows.
inline std::vector<std::vector<int>> chain_position_tuples(const Link& link, int n, bool closed) {
  const int windows = closed ? n / link.r() : (n - link.ell()) / link.r();
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(windows) * link.num_edges());
  for (int i = 0; i < windows; ++i) {
    for (const auto& e : link.edges()) {
      std::vector<int> pos;
      pos.reserve(e.size());
      for (Vertex a : e) pos.push_back(closed ? (i * link.r() + a - 1) % n : i * link.r() + a - 1);
      out.push_back(std::move(pos));
    }
  }
  return out;
}

inline bool valid_closed_length(const Link& link, int n) {
  return n > 0 && n % link.r() == 0 && n >= 2 * (link.r() + link.ell());
}

inline bool valid_open_length(const Link& link, int n) {
  return n >= link.order() && (n - link.ell()) % link.r() == 0;
}

}  // namespace chainforge
