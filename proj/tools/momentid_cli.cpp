// momentid: command-line front end (simulate, estimate, detect, experiment, oracle).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "momentid/detector.hpp"
#include "momentid/errors.hpp"
#include "momentid/estimators.hpp"
#include "momentid/harness.hpp"
#include "momentid/io.hpp"
#include "momentid/model.hpp"

namespace fs = std::filesystem;
using namespace momentid;
using nlohmann::ordered_json;

namespace {

// Writes the whole payload or nothing: stdout when path is empty, otherwise a
// temporary file renamed into place.
void emit(const std::string& payload, const std::string& path) {
  if (path.empty()) {
    std::cout << payload;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << payload;
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  }
}

ordered_json report_object(const EstimateReport& r) { return ordered_json::parse(report_json(r)); }

std::string estimate_payload(const std::string& input, const std::string& change, double z,
                             int max_order) {
  const auto data = read_dataset_csv(fs::path(input));
  DetectorConfig cfg;
  cfg.estimator.z = z;
  cfg.estimator.max_order = max_order;
  EstimateReport report;
  if (change == "auto") {
    report = estimate_auto(data, cfg);
  } else {
    const auto source = dataset_moments(data, cfg.estimator);
    const auto method = matching_method(parse_change(change));
    report = run_method(*method, source, 0.5, cfg.estimator);
  }
  return report_json(report) + "\n";
}

std::string oracle_payload(const std::string& scenario_path, int max_order) {
  const auto scenario = load_scenario(fs::path(scenario_path));
  EstimatorConfig est;
  est.max_order = max_order;
  const auto source = population_moments(scenario, max_order);
  const double beta = scenario.env1.beta;

  ordered_json out;
  out["change"] = change_name(scenario.change);
  out["beta_true"] = beta;
  const auto match = matching_method(scenario.change);
  ordered_json reports = ordered_json::object();
  for (auto m : {Method::Alg1, Method::Alg2, Method::Alg3, Method::Alg4, Method::OlsSeparate,
                 Method::OlsCombined}) {
    try {
      const auto r = run_method(m, source, 0.5, est);
      auto j = report_object(r);
      j["abs_error"] = std::abs(*r.beta_hat - beta);
      if (match && *match == m) {
        out["matching_method"] = method_name(m);
        out["beta_hat"] = *r.beta_hat;
        out["abs_error"] = std::abs(*r.beta_hat - beta);
      }
      reports[std::string(method_name(m))] = j;
    } catch (const Error& e) {
      reports[std::string(method_name(m))] = {{"error", to_string(e.code())},
                                              {"message", e.what()}};
    }
  }
  if (scenario.change == ChangeKind::EpsTAndEpsU || scenario.change == ChangeKind::EpsY) {
    const auto tilde = scenario.change == ChangeKind::EpsY ? construct_epsy_counterexample(scenario)
                                                           : construct_counterexample(scenario);
    out["equivalent_beta"] = tilde.env1.beta;
  }
  out["reports"] = reports;
  return out.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal effect estimation from two environments via higher-order moments"};
  app.require_subcommand(1);

  std::string scenario_path, input, out_path, config_path, change = "auto";
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  double z = 4.0, ks_alpha = 0.01;
  int max_order = 8, threads = 0;

  auto* sim = app.add_subcommand("simulate", "Sample a dataset (env,t,y CSV) from a scenario");
  sim->add_option("--scenario", scenario_path, "Scenario TOML")->required()->check(CLI::ExistingFile);
  sim->add_option("--n", n, "Samples per environment")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 34));
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* est = app.add_subcommand("estimate", "Estimate the treatment effect from a dataset");
  est->add_option("--input", input, "Dataset CSV")->required();
  est->add_option("--change", change, "Which mechanism changed")
      ->check(CLI::IsMember({"auto", "eps_t", "eps_u", "gamma", "alpha"}));
  est->add_option("--z", z, "z threshold for nonzero tests")->check(CLI::PositiveNumber);
  est->add_option("--max-order", max_order, "Highest moment order searched")->check(CLI::Range(3, kHardMaxOrder));

  auto* det = app.add_subcommand("detect", "Classify which mechanism changed");
  det->add_option("--input", input, "Dataset CSV")->required();
  det->add_option("--z", z, "z threshold for nonzero tests")->check(CLI::PositiveNumber);
  det->add_option("--ks-alpha", ks_alpha, "KS test level")->check(CLI::Range(1e-12, 0.999999));

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo sweep and write the results CSV");
  exp->add_option("--config", config_path, "Experiment TOML")->required();
  exp->add_option("--out", out_path, "Results CSV (default: output_path from the config)");
  exp->add_option("--threads", threads, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);

  auto* orc = app.add_subcommand("oracle", "Run the estimators on exact population moments");
  orc->add_option("--scenario", scenario_path, "Scenario TOML")->required();
  orc->add_option("--max-order", max_order, "Moment table degree")->check(CLI::Range(3, kOracleMaxOrder));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json(ErrorCode::InvalidArgument, e.what()) << "\n";
    return 1;
  }

  try {
    if (*sim) {
      const auto scenario = load_scenario(fs::path(scenario_path));
      std::ostringstream ss;
      write_dataset_csv(ss, simulate(scenario, n, seed));
      emit(ss.str(), out_path);
    } else if (*est) {
      emit(estimate_payload(input, change, z, max_order), "");
    } else if (*det) {
      const auto data = read_dataset_csv(fs::path(input));
      DetectorConfig cfg;
      cfg.estimator.z = z;
      cfg.ks_alpha = ks_alpha;
      emit(verdict_json(detect_source(data, cfg)) + "\n", "");
    } else if (*exp) {
      auto cfg = load_experiment(fs::path(config_path));
      if (exp->count("--threads")) cfg.threads = threads;
      const std::string target = out_path.empty() ? cfg.output_path : out_path;
      if (target.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no output path: pass --out or set output_path");
      }
      std::ostringstream ss;
      write_results_csv(ss, run_experiment(cfg));
      emit(ss.str(), target);
    } else if (*orc) {
      emit(oracle_payload(scenario_path, max_order), "");
    }
  } catch (const Error& e) {
    std::cerr << error_json(e.code(), e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_json(ErrorCode::IoError, e.what()) << "\n";
    return 2;
  }
  return 0;
}
