#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "chain.hpp"
#include "constructor.hpp"
#include "errors.hpp"
#include "graph_io.hpp"
#include "hypercore.hpp"
#include "hypergraph.hpp"
#include "link.hpp"
#include "property_graph.hpp"
#include "random.hpp"
#include "samplers.hpp"
#include "search.hpp"
#include "spread.hpp"

namespace chainforge {

// ---- hosts ----

struct HostSpec {
  std::string family = "complete";  // complete | dirac_extremal | uniformly_dense_random | from_file
  int k = 2;
  double density = 0.5;  // uniformly_dense_random: probability of each k-set
  double mu = 0.0;       // dirac_extremal: probability of each extra (even-intersection) k-set
  std::string file;      // from_file
};

/// Space-barrier host: k-sets meeting A = {1..floor(n/2)} in an odd number of vertices,
/// plus every other k-set independently with probability mu.
inline Hypergraph dirac_extremal_host(int n, int k, double mu, SeededStream& stream) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in [0,1]");
  const int half = n / 2;
  std::vector<Edge> edges;
  for_each_combination(iota_vertices(n), k, [&](const std::vector<Vertex>& e) {
    const auto inside = std::count_if(e.begin(), e.end(), [&](Vertex v) { return v <= half; });
    if (inside % 2 == 1 || stream.bernoulli(mu)) edges.push_back(e);
    return true;
  });
  return Hypergraph(n, k, std::move(edges));
}

/// Binomial random k-graph; uniformly dense with density about d for large n.
inline Hypergraph uniformly_dense_random_host(int n, int k, double d, SeededStream& stream) {
  if (!(d >= 0.0 && d <= 1.0)) throw ParameterError("density must lie in [0,1]");
  return sparsify(complete_hypergraph(n, k), d, stream);
}

inline AnyGraph make_host(const HostSpec& spec, int n, SeededStream& stream) {
  if (spec.family == "from_file") {
    auto g = load_graph(spec.file);
    const int gn = std::visit([](const auto& x) { return x.n(); }, g);
    if (n != 0 && n != gn) throw SchemaError("host file has " + std::to_string(gn) + " vertices, config asks for " + std::to_string(n));
    return g;
  }
  if (n < 1) throw SchemaError("host family '" + spec.family + "' needs n");
  if (spec.k < 1 || spec.k > n) throw SchemaError("k must satisfy 1 <= k <= n");
  if (spec.family == "complete") return complete_hypergraph(n, spec.k);
  if (spec.family == "dirac_extremal") return dirac_extremal_host(n, spec.k, spec.mu, stream);
  if (spec.family == "uniformly_dense_random") return uniformly_dense_random_host(n, spec.k, spec.density, stream);
  throw SchemaError("unknown host family '" + spec.family + "'");
}

/// The digraph in which the guest chain is searched: all orientations of the k-edges, plus
/// the l-tuples of the unsparsified host's l-shadow (l-tuples are not subject to sparsification).
inline Digraph guest_host(const Hypergraph& kept, const Hypergraph& full, int ell) {
  Digraph oriented = orient_all(kept);
  if (ell <= 0 || ell >= kept.k()) return oriented;
  return digraph_union(oriented, orient_all(l_shadow(full, ell)));
}

// ---- sweep config ----

struct SweepConfig {
  HostSpec host;
  std::vector<int> n_values;
  std::string link = "ell_cycle:2,1";
  std::vector<double> p_grid;
  std::uint64_t trials = 20;
  std::uint64_t budget = 2'000'000;
  std::uint64_t seed = 1;
  bool seed_given = false;  // set when the config names a seed
  bool timing = false;  // elapsed_ms is 0 unless enabled, so reruns are byte-identical

  void validate() const {
    if (p_grid.empty()) throw SchemaError("p grid is empty");
    for (double p : p_grid)
      if (!(p >= 0.0 && p <= 1.0)) throw SchemaError("p values must lie in [0,1]");
    if (trials < 1) throw SchemaError("trials must be at least 1");
    if (budget < 1) throw SchemaError("budget must be at least 1");
    if (host.family != "from_file" && n_values.empty()) throw SchemaError("n is required");
    for (int n : n_values)
      if (n < 1 || n > kMaxMaskVertices) throw SchemaError("n must lie in 1..64");
  }
};

namespace experiment_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw SchemaError("bad " + what + " '" + text + "'");
  return value;
}

// "0, 0.5, 1" or "start:stop:count" (count evenly spaced points, endpoints exact).
inline std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw SchemaError("grid range must be start:stop:count");
    const double a = parse_number<double>(parts[0], "grid start");
    const double b = parse_number<double>(parts[1], "grid stop");
    const int count = parse_number<int>(parts[2], "grid count");
    if (count < 1) throw SchemaError("grid count must be positive");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? a : (i == count - 1 ? b : a + (b - a) * i / (count - 1)));
    return out;
  }
  std::vector<double> out;
  for (const auto& t : split(text, ',')) out.push_back(parse_number<double>(t, "p value"));
  return out;
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

}  // namespace experiment_detail

/// Flat "key = value" config; '#' starts a comment. Unknown keys and repeated keys are errors.
inline SweepConfig parse_sweep_config(std::string_view text) {
  using namespace experiment_detail;
  SweepConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::size_t number = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.emplace(key, number).second) throw ParseError(number, "repeated key '" + key + "'");
    try {
      if (key == "host") cfg.host.family = value;
      else if (key == "k") cfg.host.k = parse_number<int>(value, "k");
      else if (key == "density") cfg.host.density = parse_number<double>(value, "density");
      else if (key == "mu") cfg.host.mu = parse_number<double>(value, "mu");
      else if (key == "file") cfg.host.file = value;
      else if (key == "n") {
        for (const auto& t : split(value, ',')) cfg.n_values.push_back(parse_number<int>(t, "n"));
      } else if (key == "link") cfg.link = value;
      else if (key == "p") cfg.p_grid = parse_grid(value);
      else if (key == "trials") cfg.trials = parse_number<std::uint64_t>(value, "trials");
      else if (key == "budget") cfg.budget = parse_number<std::uint64_t>(value, "budget");
      else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(value, "seed");
        cfg.seed_given = true;
      } else if (key == "timing") {
        if (value != "on" && value != "off") throw SchemaError("timing must be on or off");
        cfg.timing = value == "on";
      } else throw ParseError(number, "unknown key '" + key + "'");
    } catch (const SchemaError& e) {
      throw ParseError(number, e.what());
    }
  }
  static const std::vector<std::string> families{"complete", "dirac_extremal", "uniformly_dense_random", "from_file"};
  if (std::find(families.begin(), families.end(), cfg.host.family) == families.end())
    throw SchemaError("unknown host family '" + cfg.host.family + "'");
  if (cfg.host.family == "from_file" && cfg.host.file.empty()) throw SchemaError("from_file hosts need 'file'");
  cfg.validate();
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(read_text_file(path)); }

// ---- sweep rows and CSV ----

struct SweepRow {
  int n = 0;
  int k = 0;
  int ell = 0;
  int r = 0;
  double p = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t unknowns = 0;
  double p_hat = 0;  // successes / (trials - unknowns); 0 when every trial was undecided
  double wilson_low = 0;
  double wilson_high = 1;
  std::uint64_t seed = 0;
  std::uint64_t elapsed_ms = 0;

  bool operator==(const SweepRow&) const = default;
};

inline constexpr std::string_view kSweepCsvHeader = "n,k,ell,r,p,trials,successes,unknowns,p_hat,wilson_low,wilson_high,seed,elapsed_ms";

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  using experiment_detail::format_double;
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.k) + ',' + std::to_string(r.ell) + ',' + std::to_string(r.r) + ',' +
           format_double(r.p) + ',' + std::to_string(r.trials) + ',' + std::to_string(r.successes) + ',' +
           std::to_string(r.unknowns) + ',' + format_double(r.p_hat) + ',' + format_double(r.wilson_low) + ',' +
           format_double(r.wilson_high) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.elapsed_ms) + '\n';
  }
  return out;
}

inline std::vector<SweepRow> parse_csv(std::string_view text) {
  using experiment_detail::parse_number;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw SchemaError("CSV header must be '" + std::string(kSweepCsvHeader) + "'");
  std::vector<SweepRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = experiment_detail::split(line, ',');
    if (f.size() != 13) throw SchemaError("CSV row " + std::to_string(number) + " has " + std::to_string(f.size()) + " fields, expected 13");
    SweepRow r;
    try {
      r.n = parse_number<int>(f[0], "n");
      r.k = parse_number<int>(f[1], "k");
      r.ell = parse_number<int>(f[2], "ell");
      r.r = parse_number<int>(f[3], "r");
      r.p = parse_number<double>(f[4], "p");
      r.trials = parse_number<std::uint64_t>(f[5], "trials");
      r.successes = parse_number<std::uint64_t>(f[6], "successes");
      r.unknowns = parse_number<std::uint64_t>(f[7], "unknowns");
      r.p_hat = parse_number<double>(f[8], "p_hat");
      r.wilson_low = parse_number<double>(f[9], "wilson_low");
      r.wilson_high = parse_number<double>(f[10], "wilson_high");
      r.seed = parse_number<std::uint64_t>(f[11], "seed");
      r.elapsed_ms = parse_number<std::uint64_t>(f[12], "elapsed_ms");
    } catch (const SchemaError& e) {
      throw SchemaError("CSV row " + std::to_string(number) + ": " + e.what());
    }
    if (r.successes + r.unknowns > r.trials) throw SchemaError("CSV row " + std::to_string(number) + ": counts exceed trials");
    rows.push_back(r);
  }
  return rows;
}

inline void write_csv(const std::vector<SweepRow>& rows, const std::string& path) { write_text_file(path, to_csv(rows)); }
inline std::vector<SweepRow> read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

// ---- threshold sweep ----

/// For each n and each p: sparsify the host (edge model for undirected hosts, tuple model for
/// digraph hosts) and search exactly for a closed guest chain. Trial streams are keyed by
/// (n, p index, trial index), so rows are independent of grid order.
inline std::vector<SweepRow> run_threshold_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const Link link = resolve_link(cfg.link);
  SearchOptions options;
  options.budget = cfg.budget;
  std::vector<int> ns = cfg.n_values;
  if (ns.empty()) ns.push_back(0);  // from_file: n comes from the file
  std::vector<SweepRow> rows;
  for (int n_req : ns) {
    SeededStream host_stream = SeededStream(cfg.seed, static_cast<std::uint64_t>(n_req)).child(~std::uint64_t{0});
    const AnyGraph host = make_host(cfg.host, n_req, host_stream);
    const int n = std::visit([](const auto& x) { return x.n(); }, host);
    if (const auto* h = std::get_if<Hypergraph>(&host); h && h->k() != link.k())
      throw SchemaError("host uniformity " + std::to_string(h->k()) + " differs from the link's k = " + std::to_string(link.k()));
    if (!valid_closed_length(link, n)) throw SchemaError("n = " + std::to_string(n) + " admits no closed chain of this link");
    for (std::size_t pi = 0; pi < cfg.p_grid.size(); ++pi) {
      const double p = cfg.p_grid[pi];
      const auto started = std::chrono::steady_clock::now();
      SweepRow row;
      row.n = n;
      row.k = link.k();
      row.ell = link.ell();
      row.r = link.r();
      row.p = p;
      row.trials = cfg.trials;
      row.seed = cfg.seed;
      for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        SeededStream s = SeededStream(cfg.seed, static_cast<std::uint64_t>(n)).child(pi).child(t);
        Digraph d;
        if (const auto* h = std::get_if<Hypergraph>(&host)) d = guest_host(sparsify(*h, p, s), *h, link.ell());
        else d = sparsify(std::get<Digraph>(host), p, s);
        auto res = find_hamilton_chain(d, link, std::nullopt, std::nullopt, true, options);
        if (res.status == SearchStatus::found) ++row.successes;
        else if (res.status == SearchStatus::unknown) ++row.unknowns;
      }
      const std::uint64_t decided = row.trials - row.unknowns;
      row.p_hat = decided ? static_cast<double>(row.successes) / static_cast<double>(decided) : 0.0;
      std::tie(row.wilson_low, row.wilson_high) = wilson_interval(row.successes, decided);
      if (cfg.timing)
        row.elapsed_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());
      rows.push_back(row);
    }
  }
  return rows;
}

/// Rows of one n are monotone up to Wilson overlap when no later p has its whole interval
/// below an earlier p's interval.
inline bool monotone_up_to_overlap(const std::vector<SweepRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      if (rows[i].n == rows[j].n && rows[i].p <= rows[j].p && rows[j].wilson_high < rows[i].wilson_low) return false;
  return true;
}

/// The p at which p_hat first reaches 1/2, by linear interpolation between grid points of one n.
inline std::optional<double> crossing_point(const std::vector<SweepRow>& rows, int n, double level = 0.5) {
  std::vector<SweepRow> mine;
  for (const auto& r : rows)
    if (r.n == n) mine.push_back(r);
  std::sort(mine.begin(), mine.end(), [](const SweepRow& a, const SweepRow& b) { return a.p < b.p; });
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].p_hat < level) continue;
    if (i == 0) return mine[i].p;
    const auto& a = mine[i - 1];
    const auto& b = mine[i];
    return a.p + (level - a.p_hat) * (b.p - a.p) / (b.p_hat - a.p_hat);
  }
  return std::nullopt;
}

// ---- minimum-degree inheritance ----

struct InheritanceReport {
  std::string predicate_id;
  int n = 0;
  int s = 0;
  int q = 0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double fraction = 0;
  std::pair<double, double> wilson{0.0, 1.0};
  double bound_exp = 0;   // 1 - e^{-sqrt(s)}
  double bound_poly = 0;  // 1 - s^{-2}
  bool meets_exp = false;
  bool meets_poly = false;
};

/// Per trial: a uniform q-set Q, then a uniform s-set S containing Q; records whether G[S]
/// has the property. Uniform Q then uniform S above it makes S itself uniform.
inline InheritanceReport run_inheritance_experiment(const AnyGraph& g, std::string_view predicate_id, int s, int q,
                                                    std::uint64_t trials, SeededStream& stream, SearchOptions options = {}) {
  const int n = std::visit([](const auto& x) { return x.n(); }, g);
  if (s < 1 || s > n) throw ParameterError("inheritance needs 1 <= s <= n");
  if (q < 0 || q > s) throw ParameterError("inheritance needs 0 <= q <= s");
  const Predicate pred = make_predicate(g, predicate_id, options);
  InheritanceReport rep;
  rep.predicate_id = pred.id;
  rep.n = n;
  rep.s = s;
  rep.q = q;
  rep.trials = trials;
  const auto all = iota_vertices(n);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto q_set = property_detail::random_subset(all, q, stream);
    std::vector<Vertex> rest;
    for (Vertex v : all)
      if (!std::binary_search(q_set.begin(), q_set.end(), v)) rest.push_back(v);
    auto set = property_detail::random_subset(rest, s - q, stream);
    set.insert(set.end(), q_set.begin(), q_set.end());
    std::sort(set.begin(), set.end());
    if (property_detail::decide(pred, set) == Truth::yes) ++rep.hits;
  }
  rep.fraction = trials ? static_cast<double>(rep.hits) / static_cast<double>(trials) : 0.0;
  rep.wilson = wilson_interval(rep.hits, trials);
  rep.bound_exp = 1.0 - std::exp(-std::sqrt(static_cast<double>(s)));
  rep.bound_poly = 1.0 - 1.0 / (static_cast<double>(s) * s);
  rep.meets_exp = rep.fraction >= rep.bound_exp;
  rep.meets_poly = rep.fraction >= rep.bound_poly;
  return rep;
}

// ---- constructor stress ----

/// Test 2-graphs for the correctness estimator: single edges, two disjoint edges, and paths
/// with two and three edges. Each family is capped at `cap` graphs drawn from `stream`
/// (all of them when the family is small enough).
inline std::vector<std::vector<Edge>> standard_test_battery(int n, std::size_t cap, SeededStream& stream) {
  auto pair = [](Vertex a, Vertex b) { return Edge{std::min(a, b), std::max(a, b)}; };
  auto finish = [](std::vector<Edge> g) {
    std::sort(g.begin(), g.end());
    return g;
  };
  std::vector<std::vector<Edge>> out;
  std::vector<std::vector<Edge>> singles;
  for (Vertex a = 1; a <= n; ++a)
    for (Vertex b = a + 1; b <= n; ++b) singles.push_back({Edge{a, b}});
  if (singles.size() > cap) {
    stream.shuffle(singles);
    singles.resize(cap);
    std::sort(singles.begin(), singles.end());
  }
  out.insert(out.end(), singles.begin(), singles.end());
  auto draw_distinct = [&](int count) {
    std::vector<Vertex> pool = iota_vertices(n);
    return property_detail::random_subset(pool, count, stream);
  };
  if (n >= 4) {
    std::set<std::vector<Edge>> seen;
    for (std::size_t i = 0; i < cap; ++i) {
      auto v = draw_distinct(4);
      stream.shuffle(v);
      seen.insert(finish({pair(v[0], v[1]), pair(v[2], v[3])}));
    }
    out.insert(out.end(), seen.begin(), seen.end());
    seen.clear();
    for (std::size_t i = 0; i < cap; ++i) {
      auto v = draw_distinct(4);
      stream.shuffle(v);
      seen.insert(finish({pair(v[0], v[1]), pair(v[1], v[2]), pair(v[2], v[3])}));
    }
    out.insert(out.end(), seen.begin(), seen.end());
  }
  if (n >= 3) {
    std::set<std::vector<Edge>> seen;
    for (std::size_t i = 0; i < cap; ++i) {
      auto v = draw_distinct(3);
      stream.shuffle(v);
      seen.insert(finish({pair(v[0], v[1]), pair(v[1], v[2])}));
    }
    out.insert(out.end(), seen.begin(), seen.end());
  }
  return out;
}

struct StressConfig {
  Digraph host;
  Link link;
  int s1 = 0;
  std::uint64_t runs = 100;
  std::uint64_t seed = 1;
  ConstructOptions options{};
  std::size_t battery_cap = 200;
};

struct StressReport {
  std::uint64_t runs = 0;
  std::uint64_t successes = 0;
  std::uint64_t infeasible = 0;
  std::uint64_t validated = 0;
  double success_rate = 0;
  double validation_rate = 0;  // validated / successes; 1 when there were no successes
  std::string first_failure;
  CorrectnessReport correctness;
};

/// N constructions with streams keyed by run index. Every success is re-validated against the
/// host; K_hat is estimated over the successful chains' 2-shadows.
inline StressReport run_constructor_stress(const StressConfig& cfg) {
  StressReport rep;
  rep.runs = cfg.runs;
  std::vector<std::vector<Edge>> shadows;
  std::optional<Constructor> ctor;
  try {
    ctor.emplace(cfg.host, cfg.link, cfg.s1, cfg.options);
  } catch (const ParameterError& e) {
    rep.infeasible = cfg.runs;
    rep.first_failure = e.what();
  }
  for (std::uint64_t i = 0; ctor && i < cfg.runs; ++i) {
    SeededStream s(cfg.seed, i);
    try {
      auto res = ctor->construct(s);
      ++rep.successes;
      if (validate_closed_chain(cfg.link, cfg.host, res.ordering)) ++rep.validated;
      shadows.push_back(shadow2(res.chain.edges).edges());
    } catch (const ConstructionInfeasible& e) {
      ++rep.infeasible;
      if (rep.first_failure.empty()) rep.first_failure = e.what();
    }
  }
  rep.success_rate = rep.runs ? static_cast<double>(rep.successes) / static_cast<double>(rep.runs) : 0.0;
  rep.validation_rate = rep.successes ? static_cast<double>(rep.validated) / static_cast<double>(rep.successes) : 1.0;
  if (!shadows.empty()) {
    SeededStream battery_stream = SeededStream(cfg.seed, 0).child(0xBA77E2);
    const auto battery = standard_test_battery(cfg.host.n(), cfg.battery_cap, battery_stream);
    std::size_t next = 0;
    EdgeSampler replay = [&](SeededStream&) { return shadows[next++]; };
    SeededStream unused(cfg.seed, 0);
    rep.correctness = estimate_correctness(replay, cfg.host.n(), battery, shadows.size(), unused);
  }
  return rep;
}

}  // namespace chainforge
