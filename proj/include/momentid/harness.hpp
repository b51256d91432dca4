#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "momentid/estimators.hpp"
#include "momentid/model.hpp"

namespace momentid {

/// n samples per environment from the structural equations. Each
/// (environment, noise) pair gets its own stream derived from `seed`.
EnvPairDataset simulate(const ScenarioSpec& scenario, std::size_t n, std::uint64_t seed);

// Closed interval; lo == hi means a fixed value.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

// Random single-change scenario. Every noise is `noise_family` with an
// inverse-scale parameter lambda (the rate for exponential noise); the gamma
// family keeps its shape fixed at `gamma_shape`.
struct ScenarioTemplate {
  std::string name;
  ChangeKind change = ChangeKind::EpsT;
  NoiseFamily noise_family = NoiseFamily::Exponential;
  // Family of the changed noise in environment 2; defaults to noise_family.
  std::optional<NoiseFamily> changed_family;
  double gamma_shape = 2.0;

  Range alpha{0.4, 0.6};
  Range beta{0.6, 0.7};
  Range gamma{0.8, 0.9};
  Range lambda{0.9, 1.1};
  Range lambda_changed{0.45, 0.55};
  Range alpha_changed{0.8, 0.9};
  Range gamma_changed{2.0, 2.1};

  // Methods run on this scenario; empty = matching algorithm plus both OLS baselines.
  std::vector<Method> methods;
};

NoiseSpec family_noise(NoiseFamily family, double lambda, double gamma_shape = 2.0);

/// The matching algorithm for a change kind (Alg1 for eps_t, ... Alg4 for alpha).
std::optional<Method> matching_method(ChangeKind change);

std::vector<Method> methods_for(const ScenarioTemplate& tmpl);

/// Parameters of one replicate, drawn from the template ranges with a stream
/// keyed by (seed, scenario index, rep).
ScenarioSpec draw_scenario(const ScenarioTemplate& tmpl, std::uint64_t seed,
                           std::size_t scenario_index, std::size_t rep);

struct ExperimentConfig {
  std::vector<ScenarioTemplate> scenarios;
  std::vector<std::size_t> sample_sizes{4096, 16384, 65536, 262144, 1048576};
  std::size_t replicates = 100;
  std::uint64_t seed = 20240601;
  double z_threshold = 4.0;
  int max_order = 8;
  // Reuse the rep-0 parameter draw for every replicate.
  bool freeze_parameters = false;
  std::string output_path;
  // 0 = hardware concurrency; MOMENT_IDENT_THREADS caps either way.
  int threads = 0;

  // Throws InvalidArgument on empty/unsorted sizes, zero replicates etc.
  void validate() const;
  EstimatorConfig estimator() const;
};

// Four scenarios (eps_t, eps_u, gamma, alpha) with the standard parameter ranges and
// exponential noises.
ExperimentConfig default_config();

ExperimentConfig parse_experiment_toml(std::string_view text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct ResultRow {
  std::string scenario;
  std::string noise_family;
  std::size_t n = 0;
  std::size_t rep = 0;
  Method method = Method::Alg1;
  double beta_true = 0.0;
  std::optional<double> beta_hat;
  std::optional<int> order_found;
  std::optional<std::string> branch;
  std::optional<std::string> error;

  std::optional<double> rel_bias() const;
};

inline constexpr std::string_view kResultsHeader =
    "scenario,noise_family,n,rep,method,beta_true,beta_hat,rel_bias,order_found,branch,error";

/// Every (scenario, n, rep, method) row, ordered by that key regardless of the
/// worker count. Estimator failures land in the error column.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// Recomputes one row from the config alone.
ResultRow replay_row(const ExperimentConfig& cfg, std::size_t scenario_index, std::size_t n,
                     std::size_t rep, Method method);

/// Worker count after applying cfg.threads and MOMENT_IDENT_THREADS.
int worker_count(const ExperimentConfig& cfg);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace momentid
