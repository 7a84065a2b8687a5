#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "balance.hpp"
#include "constructor.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "framework.hpp"
#include "graph_io.hpp"
#include "hypercore.hpp"
#include "link.hpp"
#include "matching.hpp"
#include "property_graph.hpp"
#include "samplers.hpp"
#include "spread.hpp"

namespace chainforge::cli {

enum ExitCode : int { kHolds = 0, kFails = 1, kUsage = 2, kInfeasible = 3 };

namespace detail {

using json = nlohmann::ordered_json;

/// One record per result: a JSON line, or "key: value" lines followed by a blank line.
class Reporter {
 public:
  Reporter(std::ostream& out, bool json_lines) : out_(out), json_(json_lines) {}

  void emit(const json& record) {
    if (json_) {
      out_ << record.dump() << '\n';
      return;
    }
    for (const auto& [key, value] : record.items()) out_ << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  bool json_;
};

inline std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) throw ParameterError(source + " is not an unsigned 64-bit seed: '" + text + "'");
  return value;
}

/// --seed, then CHAINFORGE_SEED, then a fresh seed that is announced on `err`.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const std::optional<std::string>& env, std::ostream& err) {
  if (flag) return *flag;
  if (env) return parse_seed(*env, "CHAINFORGE_SEED");
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "chainforge: generated seed " << seed << '\n';
  return seed;
}

inline const Hypergraph& need_hypergraph(const AnyGraph& g, const std::string& what) {
  if (!std::holds_alternative<Hypergraph>(g)) throw ParameterError(what + " needs an undirected k-graph (U header)");
  return std::get<Hypergraph>(g);
}

inline int graph_n(const AnyGraph& g) {
  return std::visit([](const auto& x) { return x.n(); }, g);
}

/// The digraph used for chains: as given, or the l-cycle host C->(G) u C->(shadow_l G).
inline Digraph chain_host(const AnyGraph& g, const Link& link) {
  if (const auto* d = std::get_if<Digraph>(&g)) return *d;
  return ell_cycle_host(std::get<Hypergraph>(g), link.ell());
}

inline json edges_json(const std::vector<Edge>& edges) {
  json a = json::array();
  for (const auto& e : edges) a.push_back(e);
  return a;
}

}  // namespace detail

struct Invocation {
  bool json = false;
  std::optional<std::uint64_t> seed;
  int threads = 1;  // computations are sequential; values above 1 are accepted and ignored
};

/// Parses and runs one command line. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   const std::optional<std::string>& env_seed = std::nullopt) {
  using detail::json;
  CLI::App app{"chainforge: links, chains, property graphs and randomized Hamilton-chain constructions"};
  app.name("chainforge");
  app.require_subcommand(1);

  Invocation inv;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "random seed (falls back to CHAINFORGE_SEED)");
  app.add_flag("--json", inv.json, "JSON-lines output, one record per result");
  app.add_option("--threads", inv.threads, "cap on internal parallelism")->check(CLI::PositiveNumber);

  // check
  auto* check = app.add_subcommand("check", "test a property of a graph file")->fallthrough();
  std::string check_graph;
  int deg_d = 0;
  std::string deg_min;
  std::vector<std::string> balance_args, dense_args, degseq_args;
  bool framework = false;
  std::uint64_t dense_samples = 0;
  check->add_option("graph", check_graph, "graph file");
  auto* deg_opt = check->add_option("--deg", deg_d, "minimum d-degree");
  auto* deg_min_opt = check->add_option("--min", deg_min, "with --deg: required fraction of binom(n-d, k-d)");
  auto* balance_opt = check->add_option("--balance", balance_args, "L n d lambda: balancedness of the closed L-chain on n vertices")->expected(4);
  auto* dense_opt = check->add_option("--uniform-dense", dense_args, "eps d: uniform density")->expected(2);
  auto* dense_samples_opt = check->add_option("--samples", dense_samples, "with --uniform-dense: sampled mode with this many tuples");
  check->add_flag("--framework", framework, "(F1)-(F3) with the default selector");
  auto* degseq_opt = check->add_option("--degseq", degseq_args, "t mu: degree-sequence class")->expected(2);

  // propgraph
  auto* prop = app.add_subcommand("propgraph", "minimum q-degree of a property graph")->fallthrough();
  std::string prop_graph, prop_pred;
  int prop_s = 0, prop_q = 1, prop_q_sets = 8;
  std::uint64_t prop_samples = 0, prop_budget = 20'000'000;
  prop->add_option("graph", prop_graph, "graph file")->required();
  prop->add_option("--pred", prop_pred, "predicate name")->required();
  prop->add_option("--s", prop_s, "uniformity s")->required();
  prop->add_option("--q", prop_q, "degree order q");
  auto* prop_sample_opt = prop->add_option("--sample", prop_samples, "sampled mode: s-sets per q-set");
  prop->add_option("--q-sets", prop_q_sets, "sampled mode: number of random q-sets");
  prop->add_option("--budget", prop_budget, "search budget per predicate evaluation");

  // construct
  auto* cons = app.add_subcommand("construct", "randomized closed Hamilton L-chain construction")->fallthrough();
  std::string cons_graph, cons_link, cons_out, cons_replay;
  int cons_s1 = 0, cons_retries = 20;
  std::uint64_t cons_budget = 20'000'000;
  cons->add_option("graph", cons_graph, "host graph file")->required();
  auto* link_opt = cons->add_option("--link", cons_link, "link spec (ell_cycle:k,l | matching:k | power:k,t) or link file");
  auto* s1_opt = cons->add_option("--s1", cons_s1, "chain order s1");
  cons->add_option("--out", cons_out, "write the construction here instead of stdout");
  auto* replay_opt = cons->add_option("--replay", cons_replay, "re-validate a stored construction");
  cons->add_option("--retries", cons_retries, "partition attempts")->check(CLI::PositiveNumber);
  cons->add_option("--budget", cons_budget, "search budget per chain search");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "threshold sweep from a config file")->fallthrough();
  std::string sweep_config, sweep_out;
  sweep->add_option("--config", sweep_config, "flat key = value config")->required();
  sweep->add_option("--out", sweep_out, "CSV output (stdout when omitted)");

  // spread
  auto* spread = app.add_subcommand("spread", "containment frequencies of small edge sets under a sampler")->fallthrough();
  std::string spread_sampler, spread_out;
  std::uint64_t spread_trials = 0;
  int spread_max = 2;
  spread->add_option("--sampler", spread_sampler, "hamilton_cycle:n | perfect_matching:n,k")->required();
  spread->add_option("--trials", spread_trials, "number of draws")->required()->check(CLI::PositiveNumber);
  spread->add_option("--max-size", spread_max, "largest test set size")->check(CLI::PositiveNumber);
  spread->add_option("--out", spread_out, "CSV output (stdout when omitted)");

  std::vector<std::string> argv_store{"chainforge"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kHolds : kUsage;
  }
  if (seed_opt->count()) inv.seed = seed_value;

  detail::Reporter report(out, inv.json);
  auto seed = [&]() { return detail::resolve_seed(inv.seed, env_seed, err); };

  try {
    if (check->parsed()) {
      const bool any = deg_opt->count() || balance_opt->count() || dense_opt->count() || framework || degseq_opt->count();
      if (!any) throw ParameterError("check needs one of --deg, --balance, --uniform-dense, --framework, --degseq");
      const bool needs_graph = deg_opt->count() || dense_opt->count() || framework || degseq_opt->count();
      std::optional<AnyGraph> g;
      if (needs_graph) {
        if (check_graph.empty()) throw ParameterError("check needs a graph file");
        g = load_graph(check_graph);
      }
      bool all = true;
      if (deg_opt->count()) {
        const auto& h = detail::need_hypergraph(*g, "--deg");
        const auto value = degree_min(h, deg_d);
        const Rational ratio = Rational(value) / Rational(binomial(h.n() - deg_d, h.k() - deg_d));
        bool holds = true;
        json rec{{"check", "deg"}, {"d", deg_d}, {"value", value}, {"ratio", to_string(ratio)}};
        if (deg_min_opt->count()) {
          const Rational need = parse_rational(deg_min);
          holds = ratio >= need;
          rec["min"] = to_string(need);
        }
        rec["holds"] = holds;
        all = all && holds;
        report.emit(rec);
      }
      if (balance_opt->count()) {
        const Link link = resolve_link(balance_args[0]);
        const int n = experiment_detail::parse_number<int>(balance_args[1], "n");
        const Rational d = parse_rational(balance_args[2]);
        const Rational lambda = parse_rational(balance_args[3]);
        const auto rep = check_balanced(link, n, d, lambda);
        json rec{{"check", "balance"}, {"n", n}, {"d", to_string(d)}, {"lambda", to_string(lambda)}, {"holds", rep.holds},
                 {"subgraphs_checked", rep.subgraphs_checked}};
        if (rep.witness) {
          rec["witness_vertices"] = rep.witness->vertices;
          rec["witness_edges"] = detail::edges_json(rep.witness->edges);
        }
        all = all && rep.holds;
        report.emit(rec);
      }
      if (dense_opt->count()) {
        const auto& h = detail::need_hypergraph(*g, "--uniform-dense");
        const Rational eps = parse_rational(dense_args[0]);
        const Rational d = parse_rational(dense_args[1]);
        const bool sampled = dense_samples_opt->count() > 0;
        const std::uint64_t s = sampled ? seed() : 0;
        const auto rep = is_uniformly_dense(h, eps, d, sampled ? DensityMode::sampled : DensityMode::exhaustive, dense_samples, s);
        json rec{{"check", "uniform_dense"}, {"eps", to_string(eps)}, {"d", to_string(d)}, {"mode", sampled ? "sampled" : "exhaustive"},
                 {"holds", rep.holds}, {"tuples_tested", rep.tuples_tested}};
        if (sampled) rec["seed"] = s;
        if (rep.witness) rec["witness"] = *rep.witness;
        all = all && rep.holds;
        report.emit(rec);
      }
      if (framework) {
        const auto& h = detail::need_hypergraph(*g, "--framework");
        const auto rep = check_framework(h);
        json rec{{"check", "framework"},
                 {"tight_component", rep.tight_component},
                 {"perfect_fractional_matching", rep.perfect_fractional_matching},
                 {"aperiodic", rep.aperiodic},
                 {"component_count", rep.component_count},
                 {"fractional_matching_size", to_string(rep.matching.size)},
                 {"holds", rep.holds()}};
        if (rep.walk.walk_order) rec["walk_order"] = *rep.walk.walk_order;
        all = all && rep.holds();
        report.emit(rec);
      }
      if (degseq_opt->count()) {
        const auto& h = detail::need_hypergraph(*g, "--degseq");
        const int t = experiment_detail::parse_number<int>(degseq_args[0], "t");
        const Rational mu = parse_rational(degseq_args[1]);
        const bool holds = check_degree_sequence(h, t, mu);
        all = all && holds;
        report.emit({{"check", "degseq"}, {"t", t}, {"mu", to_string(mu)}, {"holds", holds}});
      }
      return all ? kHolds : kFails;
    }

    if (prop->parsed()) {
      const AnyGraph g = load_graph(prop_graph);
      SearchOptions search;
      search.budget = prop_budget;
      const Predicate pred = make_predicate(g, prop_pred, search);
      const int n = detail::graph_n(g);
      const double bound = 1.0 - 1.0 / (static_cast<double>(prop_s) * prop_s);
      PropertyOptions options;
      options.q = prop_q;
      options.q_sets = prop_q_sets;
      if (prop_sample_opt->count()) {
        options.mode = PropertyMode::sampled;
        options.samples = prop_samples;
        const std::uint64_t s = seed();
        SeededStream stream(s, 0);
        const auto pg = property_graph(n, pred, prop_s, options, &stream);
        const auto weakest = pg.weakest_q_set();
        const double frac = weakest && weakest->supersets ? static_cast<double>(weakest->hits) / static_cast<double>(weakest->supersets) : 0.0;
        const auto ci = weakest ? wilson_interval(weakest->hits, weakest->supersets) : std::pair<double, double>{0.0, 1.0};
        const bool holds = frac >= bound;
        report.emit({{"command", "propgraph"},
                     {"mode", "sampled"},
                     {"predicate", pred.id},
                     {"n", n},
                     {"s", prop_s},
                     {"q", prop_q},
                     {"edge_fraction", pg.edge_fraction()},
                     {"min_degree_ratio_estimate", frac},
                     {"wilson_low", ci.first},
                     {"wilson_high", ci.second},
                     {"one_minus_s_inv_sq", bound},
                     {"holds", holds},
                     {"seed", s}});
        return holds ? kHolds : kFails;
      }
      const auto pg = property_graph(n, pred, prop_s, options);
      const auto md = property_graph_min_degree(pg, prop_q);
      const bool holds = to_double(md.ratio) >= bound;
      report.emit({{"command", "propgraph"},
                   {"mode", "exhaustive"},
                   {"predicate", pred.id},
                   {"n", n},
                   {"s", prop_s},
                   {"q", prop_q},
                   {"edges", pg.edges.num_edges()},
                   {"min_degree", md.value},
                   {"ratio", to_string(md.ratio)},
                   {"ratio_value", to_double(md.ratio)},
                   {"one_minus_s_inv_sq", bound},
                   {"holds", holds}});
      return holds ? kHolds : kFails;
    }

    if (cons->parsed()) {
      const AnyGraph g = load_graph(cons_graph);
      ConstructOptions options;
      options.retries = cons_retries;
      options.search.budget = cons_budget;
      if (replay_opt->count()) {
        const auto record = nlohmann::json::parse(read_text_file(cons_replay), nullptr, false);
        if (record.is_discarded()) throw ParseError(1, "construction file is not JSON");
        const Link link = link_opt->count() ? resolve_link(cons_link) : parse_link(record.value("link", std::string()));
        const auto stored = construction_from_json(record);
        const auto rep = replay_construction(detail::chain_host(g, link), link, stored, options);
        json rec{{"command", "replay"}, {"valid", rep.valid}};
        if (!rep.valid) rec["reason"] = rep.reason;
        report.emit(rec);
        return rep.valid ? kHolds : kFails;
      }
      if (!link_opt->count() || !s1_opt->count()) throw ParameterError("construct needs --link and --s1 (or --replay)");
      const Link link = resolve_link(cons_link);
      const Digraph host = detail::chain_host(g, link);
      const std::uint64_t s = seed();
      SeededStream stream(s, 0);
      Constructor ctor(host, link, cons_s1, options);
      const auto res = ctor.construct(stream);
      nlohmann::json record = to_json(res, link);
      record["seed"] = s;
      if (cons_out.empty()) {
        out << (inv.json ? record.dump() : record.dump(2)) << '\n';
      } else {
        write_text_file(cons_out, record.dump(2) + "\n");
        report.emit({{"command", "construct"},
                     {"n", res.plan.n},
                     {"s1", res.plan.s1},
                     {"m", res.plan.m},
                     {"valid", true},
                     {"desk_scale", res.desk_scale()},
                     {"seed", s},
                     {"out", cons_out}});
      }
      return kHolds;
    }

    if (sweep->parsed()) {
      SweepConfig cfg = load_sweep_config(sweep_config);
      if (inv.seed) cfg.seed = *inv.seed;
      else if (!cfg.seed_given) cfg.seed = seed();
      const auto rows = run_threshold_sweep(cfg);
      if (sweep_out.empty()) {
        out << to_csv(rows);
      } else {
        write_csv(rows, sweep_out);
        report.emit({{"command", "sweep"}, {"rows", rows.size()}, {"seed", cfg.seed}, {"out", sweep_out}, {"monotone", monotone_up_to_overlap(rows)}});
      }
      return kHolds;
    }

    if (spread->parsed()) {
      const auto colon = spread_sampler.find(':');
      const std::string kind = spread_sampler.substr(0, colon);
      const std::string params = colon == std::string::npos ? "" : spread_sampler.substr(colon + 1);
      const auto nums = experiment_detail::split(params, ',');
      EdgeSampler sampler;
      std::vector<Edge> ground;
      int n = 0;
      if (kind == "hamilton_cycle") {
        if (nums.size() != 1) throw ParameterError("hamilton_cycle needs n");
        n = experiment_detail::parse_number<int>(nums[0], "n");
        if (n < 3) throw ParameterError("hamilton_cycle needs n >= 3");
        ground = complete_hypergraph(n, 2).edges();
        sampler = [n](SeededStream& s) { return sample_hamilton_cycle_uniform(n, s); };
      } else if (kind == "perfect_matching") {
        if (nums.size() != 2) throw ParameterError("perfect_matching needs n,k");
        n = experiment_detail::parse_number<int>(nums[0], "n");
        const int k = experiment_detail::parse_number<int>(nums[1], "k");
        if (k < 1 || n < k || n % k != 0) throw ParameterError("perfect_matching needs k | n");
        const auto h = complete_hypergraph(n, k);
        ground = h.edges();
        auto pm = std::make_shared<PerfectMatchings>(h);
        sampler = [pm](SeededStream& s) { return *pm->sample(s); };
      } else {
        throw ParameterError("unknown sampler '" + kind + "'");
      }
      std::vector<std::vector<Edge>> tests;
      std::vector<int> idx(ground.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      for (int j = 1; j <= spread_max; ++j) {
        if (binomial(static_cast<std::int64_t>(ground.size()), j) + BigInt(tests.size()) > BigInt(2'000'000))
          throw BudgetExceeded("too many test sets; lower --max-size");
        for_each_combination(idx, j, [&](const std::vector<int>& pick) {
          std::vector<Edge> set;
          for (int i : pick) set.push_back(ground[static_cast<std::size_t>(i)]);
          tests.push_back(std::move(set));
          return true;
        });
      }
      const std::uint64_t s = seed();
      SeededStream stream(s, 0);
      const auto rep = estimate_spread(sampler, ground, tests, spread_trials, stream);
      std::string csv = "j,sets,max_frequency,mean_frequency,max_root,trials,seed\n";
      for (const auto& [j, row] : rep.per_size) {
        csv += std::to_string(j) + ',' + std::to_string(row.sets) + ',' + experiment_detail::format_double(row.max_frequency) + ',' +
               experiment_detail::format_double(row.sum_frequency / static_cast<double>(row.sets)) + ',' +
               experiment_detail::format_double(std::pow(row.max_frequency, 1.0 / j)) + ',' + std::to_string(spread_trials) + ',' +
               std::to_string(s) + '\n';
      }
      if (spread_out.empty()) {
        out << csv;
      } else {
        write_text_file(spread_out, csv);
        report.emit({{"command", "spread"}, {"sampler", spread_sampler}, {"n", n}, {"q_hat", rep.q_hat}, {"trials", spread_trials}, {"seed", s},
                     {"out", spread_out}});
      }
      return kHolds;
    }
  } catch (const ConstructionInfeasible& e) {
    err << "chainforge: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const BudgetExceeded& e) {
    err << "chainforge: budget exceeded: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "chainforge: error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace chainforge::cli
