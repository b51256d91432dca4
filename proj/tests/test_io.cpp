#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "generators.hpp"
#include "momentid/errors.hpp"
#include "momentid/harness.hpp"
#include "momentid/io.hpp"

using namespace momentid;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

EnvPairDataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_dataset_csv(in);
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(1.0), "1.0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.5), "-2.5");
  EXPECT_EQ(format_double(1e300), "1e+300");
  fixtures::Gen g(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.uniform(-1e3, 1e3) * std::pow(10.0, g.integer(-20, 20));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(DatasetCsv, RoundTripIsExact) {
  fixtures::Gen g(2);
  const auto s = g.standard_scenario(ChangeKind::Gamma);
  const auto d = simulate(s, 500, 7);
  std::ostringstream out;
  write_dataset_csv(out, d);
  EXPECT_EQ(out.str().substr(0, 8), "env,t,y\n");
  const auto back = parse_csv(out.str());
  EXPECT_EQ(back.t1, d.t1);
  EXPECT_EQ(back.y1, d.y1);
  EXPECT_EQ(back.t2, d.t2);
  EXPECT_EQ(back.y2, d.y2);
}

TEST(DatasetCsv, InterleavedRowsAreGrouped) {
  const auto d = parse_csv("env,t,y\n1,1,2\n2,3,4\n1,5,6\n2,7,8\n");
  EXPECT_EQ(d.t1, (std::vector<double>{1, 5}));
  EXPECT_EQ(d.y2, (std::vector<double>{4, 8}));
}

TEST(DatasetCsv, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { parse_csv("t,y\n1,2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("env,t,y\n3,1,2\n1,1,2\n2,1,2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("env,t,y\n1,abc,2\n1,1,2\n2,1,2\n2,1,2\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("env,t,y\n1,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("env,t,y\n1,1,2\n2,1,2\n2,3,4\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { read_dataset_csv(std::filesystem::path("/nonexistent/file.csv")); }),
            ErrorCode::IoError);
}

TEST(ScenarioToml, ParsesAndInheritsEnvironmentOne) {
  const auto s = parse_scenario_toml(R"(
change = "gamma"
[env1]
alpha = 0.5
beta = 0.65
gamma = 0.85
noise_u = { family = "exponential", params = [1.0] }
noise_t = { family = "exponential", params = [1.0] }
noise_y = { family = "exponential", params = [1.0] }
[env2]
gamma = 2.05
)");
  EXPECT_EQ(s.change, ChangeKind::Gamma);
  EXPECT_EQ(s.env2.gamma, 2.05);
  EXPECT_EQ(s.env2.alpha, 0.5);
  EXPECT_EQ(s.env2.noise_u, NoiseSpec::exponential(1.0));
}

TEST(ScenarioToml, RoundTrip) {
  fixtures::Gen g(3);
  for (int i = 0; i < 30; ++i) {
    ScenarioSpec s{g.any_env(), {}, ChangeKind::EpsT};
    s.env2 = s.env1;
    s.env2.noise_t = s.env1.noise_t.scaled(g.uniform(1.2, 2.0));
    EXPECT_EQ(parse_scenario_toml(scenario_to_toml(s)), s);
  }
}

TEST(ScenarioToml, SchemaErrors) {
  const std::string env1 = R"(
[env1]
alpha = 0.5
beta = 0.65
gamma = 0.85
noise_u = { family = "exponential", params = [1.0] }
noise_t = { family = "exponential", params = [1.0] }
noise_y = { family = "exponential", params = [1.0] }
)";
  EXPECT_EQ(code_of([&] { parse_scenario_toml(env1); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_scenario_toml("change = \"gamma\"\n" + env1 + "[env2]\ndelta = 1\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_scenario_toml("change = \"gamma\"\nextra = 1\n" + env1); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_scenario_toml("change = [\n"); }), ErrorCode::ParseError);
  // Declared change does not match the parameters.
  EXPECT_EQ(code_of([&] { parse_scenario_toml("change = \"gamma\"\n" + env1 + "[env2]\nalpha = 1.0\n"); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] {
              parse_scenario_toml("change = \"gamma\"\n" + env1 +
                                  "[env2]\ngamma = 2.0\nnoise_u = { family = \"cauchy\", params = [1.0] }\n");
            }),
            ErrorCode::ParseError);
}

TEST(ReportJson, KeysAndNulls) {
  EstimateReport r;
  r.method = Method::Alg3;
  r.beta_hat = 0.65;
  r.order_found = 3;
  r.branch = "case1";
  r.diagnostics["r"] = 2.1;
  r.diagnostics["bad"] = NAN;
  const auto j = json::parse(report_json(r));
  EXPECT_EQ(j["method"], "Alg3");
  EXPECT_EQ(j["beta_hat"], 0.65);
  EXPECT_EQ(j["order_found"], 3);
  EXPECT_EQ(j["branch"], "case1");
  EXPECT_EQ(j["diagnostics"]["r"], 2.1);
  EXPECT_TRUE(j["diagnostics"]["bad"].is_null());
  EXPECT_FALSE(j.contains("candidates"));

  EstimateReport c;
  c.candidates = {{0.6, 2.3}};
  const auto jc = json::parse(report_json(c));
  EXPECT_EQ(jc["candidates"], json::array({0.6, 2.3}));
  EXPECT_FALSE(jc.contains("beta_hat"));
  EXPECT_TRUE(jc["order_found"].is_null());
}

TEST(VerdictJson, RequiredEvidenceKeys) {
  ChangeVerdict v;
  v.source = ChangeSource::Alpha;
  v.evidence = {{"q1", 0.6}, {"q2", 0.9}, {"ks_T", 0.1}};
  const auto j = json::parse(verdict_json(v));
  EXPECT_EQ(j["source"], "alpha");
  for (const char* key : {"ks_T", "ks_Y", "q1", "q2", "se_q1", "se_q2"}) {
    EXPECT_TRUE(j["evidence"].contains(key)) << key;
  }
  EXPECT_TRUE(j["evidence"]["ks_Y"].is_null());
  EXPECT_EQ(j["evidence"]["q2"], 0.9);
}

TEST(ErrorJson, Shape) {
  const auto j = json::parse(error_json(ErrorCode::RootsNotReal, "complex \"roots\""));
  EXPECT_EQ(j["error"]["code"], "RootsNotReal");
  EXPECT_EQ(j["error"]["message"], "complex \"roots\"");
}
