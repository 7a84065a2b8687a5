#pragma once

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "hypergraph.hpp"

// Line-oriented text format, 1-based vertex ids, '#' starts a comment:
//
//   U <k> <n>            undirected k-graph header, then one edge per line: "v1 v2 ... vk"
//   D <n>                digraph header, then one tuple per line: "<len>: v1 ... vlen"

namespace chainforge {

using AnyGraph = std::variant<Hypergraph, Digraph>;

namespace io_detail {

inline std::string_view strip(std::string_view s) {
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline int to_int(std::string_view tok, std::size_t line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return value;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

inline std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++number;
    auto s = strip(raw);
    if (!s.empty()) lines.push_back({number, s});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

inline Edge parse_vertices(const std::vector<std::string_view>& toks, std::size_t first, int n, std::size_t line) {
  Edge e;
  for (std::size_t i = first; i < toks.size(); ++i) {
    int v = to_int(toks[i], line);
    if (v < 1 || v > n) throw ParseError(line, "vertex " + std::to_string(v) + " out of range 1.." + std::to_string(n));
    for (Vertex w : e)
      if (w == v) throw ParseError(line, "repeated vertex " + std::to_string(v));
    e.push_back(v);
  }
  return e;
}

inline Digraph parse_digraph_body(const std::vector<Line>& lines, std::size_t begin, int n) {
  std::set<Edge> seen;
  std::vector<Edge> tuples;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    const auto& [number, text] = lines[i];
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParseError(number, "expected '<len>: v1 ... vlen'");
    int len = to_int(strip(text.substr(0, colon)), number);
    if (len < 0 || len > kMaxTupleLength) throw ParseError(number, "tuple length out of range");
    auto toks = split_ws(text.substr(colon + 1));
    if (static_cast<int>(toks.size()) != len) {
      throw ParseError(number, "declared length " + std::to_string(len) + " but found " + std::to_string(toks.size()) + " vertices");
    }
    Edge t = parse_vertices(toks, 0, n, number);
    if (!seen.insert(t).second) throw ParseError(number, "duplicate tuple");
    tuples.push_back(std::move(t));
  }
  return Digraph(n, std::move(tuples));
}

}  // namespace io_detail

inline AnyGraph parse_graph(std::string_view text) {
  using namespace io_detail;
  auto lines = content_lines(text);
  if (lines.empty()) throw ParseError(1, "missing header");
  auto header = split_ws(lines[0].text);
  const auto hline = lines[0].number;
  if (header[0] == "U") {
    if (header.size() != 3) throw ParseError(hline, "expected 'U <k> <n>'");
    int k = to_int(header[1], hline);
    int n = to_int(header[2], hline);
    if (k < 1 || n < 0) throw ParseError(hline, "bad header values");
    std::set<Edge> seen;
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto& [number, body] = lines[i];
      auto toks = split_ws(body);
      if (static_cast<int>(toks.size()) != k) {
        throw ParseError(number, "expected " + std::to_string(k) + " vertices, found " + std::to_string(toks.size()));
      }
      Edge e = parse_vertices(toks, 0, n, number);
      std::sort(e.begin(), e.end());
      if (!seen.insert(e).second) throw ParseError(number, "duplicate edge");
      edges.push_back(std::move(e));
    }
    return Hypergraph(n, k, std::move(edges));
  }
  if (header[0] == "D") {
    if (header.size() != 2) throw ParseError(hline, "expected 'D <n>'");
    int n = to_int(header[1], hline);
    if (n < 0 || n > kMaxIndexedVertex) throw ParseError(hline, "vertex count out of range");
    return parse_digraph_body(lines, 1, n);
  }
  throw ParseError(hline, "unknown header '" + std::string(header[0]) + "'");
}

inline std::string serialize(const Hypergraph& g) {
  std::ostringstream out;
  out << "U " << g.k() << ' ' << g.n() << '\n';
  for (const auto& e : g.edges()) {
    for (std::size_t i = 0; i < e.size(); ++i) out << (i ? " " : "") << e[i];
    out << '\n';
  }
  return out.str();
}

inline std::string serialize(const Digraph& g) {
  std::ostringstream out;
  out << "D " << g.n() << '\n';
  for (const auto& t : g.tuples()) {
    out << t.size() << ':';
    for (Vertex v : t) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

inline std::string serialize(const AnyGraph& g) {
  return std::visit([](const auto& x) { return serialize(x); }, g);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline AnyGraph load_graph(const std::string& path) { return parse_graph(read_text_file(path)); }

}  // namespace chainforge
