#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "momentid/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MOMENTID_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("momentid_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    std::ofstream(dir_ / "gamma.toml") << R"(change = "gamma"
[env1]
alpha = 0.5
beta = 0.65
gamma = 0.85
noise_u = { family = "exponential", params = [1.0] }
noise_t = { family = "exponential", params = [1.0] }
noise_y = { family = "exponential", params = [1.0] }
[env2]
gamma = 2.05
)";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, OracleRecoversBeta) {
  const auto r = run("oracle --scenario " + path("gamma.toml"));
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["matching_method"], "Alg3");
  EXPECT_LE(j["abs_error"].get<double>(), 1e-9);
  EXPECT_EQ(j["beta_true"], 0.65);
  EXPECT_TRUE(j["reports"].contains("OlsSeparate"));
}

TEST_F(Cli, SimulateThenEstimateGamma) {
  ASSERT_EQ(run("simulate --scenario " + path("gamma.toml") + " --n 200000 --seed 4 --out " +
                path("d.csv"))
                .status,
            0);
  const auto r = run("estimate --input " + path("d.csv") + " --change gamma");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["method"], "Alg3");
  EXPECT_TRUE(j["beta_hat"].is_number());
  EXPECT_TRUE(j["order_found"].is_number());

  const auto d = run("detect --input " + path("d.csv"));
  ASSERT_EQ(d.status, 0);
  EXPECT_EQ(json::parse(d.out)["source"], "gamma");
}

TEST_F(Cli, SimulateIsDeterministic) {
  const auto a = run("simulate --scenario " + path("gamma.toml") + " --n 100 --seed 9");
  const auto b = run("simulate --scenario " + path("gamma.toml") + " --n 100 --seed 9");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("env,t,y\n", 0), 0u);
}

TEST_F(Cli, MissingInputFails) {
  const auto r = run("estimate --input " + path("nope.csv"));
  EXPECT_NE(r.status, 0);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, BadFlagsFail) {
  EXPECT_EQ(run("estimate --input x.csv --change beta").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
  EXPECT_EQ(run("").status, 1);
}

TEST_F(Cli, ExperimentWritesResults) {
  std::ofstream(path("exp.toml")) << R"(sample_sizes = [2048]
replicates = 2
seed = 5
[[scenario]]
name = "eps_t"
change = "eps_t"
)";
  const auto r = run("experiment --config " + path("exp.toml") + " --out " + path("res.csv") +
                     " --threads 2");
  ASSERT_EQ(r.status, 0);
  std::ifstream in(path("res.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, momentid::kResultsHeader);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_FALSE(fs::exists(path("res.csv.tmp")));
}
