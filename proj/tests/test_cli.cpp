#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <chainforge/chainforge.hpp>
#include <chainforge/cli.hpp>

namespace fs = std::filesystem;
using chainforge::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, std::optional<std::string> env = std::nullopt) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, env);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("chainforge_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    const auto p = (dir_ / name).string();
    chainforge::write_text_file(p, text);
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string graph(const std::string& name, const chainforge::Hypergraph& g) { return file(name, chainforge::serialize(g)); }

  fs::path dir_;
};

chainforge::Hypergraph tight_cycle(int n) {
  std::vector<chainforge::Edge> edges;
  for (int i = 0; i < n; ++i) {
    chainforge::Edge e{i % n + 1, (i + 1) % n + 1, (i + 2) % n + 1};
    std::sort(e.begin(), e.end());
    edges.push_back(e);
  }
  return chainforge::Hypergraph(n, 3, std::move(edges));
}

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("construct"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"check", "x.graph", "--deg", "notanumber"}).code, 2);
  EXPECT_EQ(run({"--threads", "0", "check", "x", "--deg", "1"}).code, 2);
  EXPECT_EQ(run({"check", path("missing.graph"), "--deg", "1"}).code, 2);
  EXPECT_EQ(run({"check", file("bad.graph", "U 2 3\n1 9\n"), "--deg", "1"}).code, 2);
  EXPECT_EQ(run({"check", file("k3.graph", "U 2 3\n1 2\n1 3\n2 3\n")}).code, 2);
}

TEST_F(Cli, CompleteGraphPassesDegreeCheck) {
  const auto g = graph("k8.graph", chainforge::complete_hypergraph(8, 2));
  const auto r = run({"check", g, "--deg", "1", "--min", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("value: 7"), std::string::npos);
  EXPECT_EQ(run({"check", graph("c8.graph", tight_cycle(8)), "--deg", "1", "--min", "1/2"}).code, 1);
}

TEST_F(Cli, FrameworkVerdicts) {
  const auto c7 = run({"--json", "check", graph("c7.graph", tight_cycle(7)), "--framework"});
  ASSERT_EQ(c7.code, 0);
  const auto rec = nlohmann::json::parse(c7.out);
  EXPECT_TRUE(rec["tight_component"].get<bool>());
  EXPECT_TRUE(rec["perfect_fractional_matching"].get<bool>());
  EXPECT_TRUE(rec["aperiodic"].get<bool>());

  const auto c6 = run({"check", graph("c6.graph", tight_cycle(6)), "--framework", "--json"});
  EXPECT_EQ(c6.code, 1);
  EXPECT_FALSE(nlohmann::json::parse(c6.out)["aperiodic"].get<bool>());

  EXPECT_EQ(run({"check", graph("e.graph", chainforge::Hypergraph(6, 3, {})), "--framework"}).code, 1);
}

TEST_F(Cli, BalanceNeedsNoGraph) {
  const auto r = run({"--json", "check", "--balance", "matching:2", "8", "1/2", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["holds"].get<bool>());
  EXPECT_EQ(run({"check", "--balance", "matching:2", "8", "1/3", "0"}).code, 1);
}

TEST_F(Cli, PropertyGraphOfCompleteGraph) {
  const auto g = graph("k8.graph", chainforge::complete_hypergraph(8, 2));
  const auto r = run({"--json", "propgraph", g, "--pred", "has_perfect_matching", "--s", "4", "--q", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rec = nlohmann::json::parse(r.out);
  EXPECT_EQ(rec["ratio"], "1");
  EXPECT_EQ(rec["edges"], 70);
  EXPECT_EQ(run({"propgraph", g, "--pred", "has_perfect_matching", "--s", "9"}).code, 2);
  EXPECT_EQ(run({"propgraph", g, "--pred", "no_such_predicate", "--s", "4"}).code, 2);
}

TEST_F(Cli, SampledPropertyGraphIsSeeded) {
  const auto g = graph("k8.graph", chainforge::complete_hypergraph(8, 2));
  const std::vector<std::string> args{"--json", "propgraph", g, "--pred", "has_perfect_matching", "--s", "4", "--sample", "20"};
  const auto a = run(args, "11");
  const auto b = run(args, "11");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(nlohmann::json::parse(a.out)["seed"], 11);
  EXPECT_TRUE(a.err.empty());
}

TEST_F(Cli, ConstructThenReplay) {
  const auto g = graph("k20.graph", chainforge::complete_hypergraph(20, 2));
  const auto out = path("c.json");
  const auto r = run({"construct", g, "--link", "ell_cycle:2,1", "--s1", "3", "--seed", "9", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"construct", g, "--replay", out}).code, 0);

  auto record = nlohmann::json::parse(chainforge::read_text_file(out));
  EXPECT_EQ(record["seed"], 9);
  auto& ordering = record["ordering"];
  std::swap(ordering[0], ordering[1]);
  const auto tampered = file("t.json", record.dump());
  const auto bad = run({"construct", g, "--replay", tampered, "--json"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(nlohmann::json::parse(bad.out)["valid"].get<bool>());

  const auto again = run({"construct", g, "--link", "ell_cycle:2,1", "--s1", "3", "--seed", "9", "--json"});
  ASSERT_EQ(again.code, 0);
  auto stored = nlohmann::json::parse(chainforge::read_text_file(out));
  EXPECT_EQ(nlohmann::json::parse(again.out), stored);
}

TEST_F(Cli, InfeasibleConstructionExitsThree) {
  const auto g = graph("e20.graph", chainforge::Hypergraph(20, 2, {}));
  EXPECT_EQ(run({"construct", g, "--link", "ell_cycle:2,1", "--s1", "3", "--seed", "1"}).code, 3);
  EXPECT_EQ(run({"construct", g, "--link", "ell_cycle:2,1"}).code, 2);
}

TEST_F(Cli, SeedFallsBackToEnvironmentThenGenerated) {
  const auto g = graph("k20.graph", chainforge::complete_hypergraph(20, 2));
  const std::vector<std::string> args{"--json", "construct", g, "--link", "ell_cycle:2,1", "--s1", "3"};
  const auto env = run(args, "4");
  ASSERT_EQ(env.code, 0);
  EXPECT_EQ(nlohmann::json::parse(env.out)["seed"], 4);
  EXPECT_TRUE(env.err.empty());
  const auto gen = run(args);
  ASSERT_EQ(gen.code, 0);
  EXPECT_NE(gen.err.find("generated seed"), std::string::npos);
  EXPECT_EQ(run(args, "abc").code, 2);
}

TEST_F(Cli, SweepIsByteIdentical) {
  const auto cfg = file("s.conf", "host = complete\nk = 2\nn = 8, 10\np = 0:1:5\ntrials = 10\nseed = 3\n");
  const auto a = path("a.csv"), b = path("b.csv");
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", a}).code, 0);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", b}).code, 0);
  const auto text = chainforge::read_text_file(a);
  EXPECT_EQ(text, chainforge::read_text_file(b));
  const auto rows = chainforge::parse_csv(text);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows.front().successes, 0u);
  EXPECT_EQ(rows.back().successes, 10u);
  EXPECT_EQ(run({"sweep", "--config", cfg}).out, text);
  EXPECT_NE(run({"--seed", "4", "sweep", "--config", cfg}).out, text);
}

TEST_F(Cli, BadSweepConfigExitsTwo) {
  EXPECT_EQ(run({"sweep", "--config", file("bad.conf", "host = complete\nbogus = 1\n")}).code, 2);
  EXPECT_EQ(run({"sweep", "--config", file("bad2.conf", "host = complete\nn = 8\np = 2\n")}).code, 2);
}

TEST_F(Cli, SpreadCsvMatchesHamiltonCycleEdgeProbability) {
  const auto r = run({"--seed", "2", "spread", "--sampler", "hamilton_cycle:6", "--trials", "4000", "--max-size", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "j,sets,max_frequency,mean_frequency,max_root,trials,seed");
  const auto f = chainforge::experiment_detail::split(row, ',');
  ASSERT_EQ(f.size(), 7u);
  EXPECT_EQ(f[1], "15");
  // every cycle has n edges out of binom(n,2), so the mean is exactly 2/(n-1)
  EXPECT_NEAR(std::stod(f[3]), 2.0 / 5.0, 1e-12);
  EXPECT_EQ(run({"spread", "--sampler", "perfect_matching:7,2", "--trials", "5"}).code, 2);
  EXPECT_EQ(run({"spread", "--sampler", "nope:3", "--trials", "5"}).code, 2);
}
