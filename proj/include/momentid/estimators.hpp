#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momentid/empirical.hpp"
#include "momentid/model.hpp"

namespace momentid {

enum class Method { Alg1, Alg2, Alg3, Alg4, OlsSeparate, OlsCombined };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

struct EstimatorConfig {
  double z = 4.0;
  double abs_floor = 1e-9;
  double rel_floor = 1e-9;
  // Highest moment order any search may reach.
  int max_order = 8;
  int jackknife_groups = 20;

  DecisionRule rule() const { return {z, abs_floor, rel_floor}; }
};

struct EstimateReport {
  Method method = Method::Alg1;
  std::optional<double> beta_hat;
  // Set instead of beta_hat when the change source is ambiguous between the
  // two noise terms; first = treatment-noise route, second = confounder route.
  std::optional<std::pair<double, double>> candidates;
  std::optional<int> order_found;
  std::optional<std::string> branch;
  std::map<std::string, double> diagnostics;
  std::optional<std::string> detected_source;
};

// Moment tables of (T, Y) for both environments, built from data.
MomentSource dataset_moments(const EnvPairDataset& data, const EstimatorConfig& cfg = {});
// Exact tables for both environments of a scenario (no sampling error).
MomentSource population_moments(const ScenarioSpec& scenario, int degree);

// Maps the (T, Y) tables of both environments to the table of the pair whose
// shared-component ratio is wanted.
using PairTransform = std::function<MomentTable(const TableSet&)>;

struct RatioResult {
  MomentEstimate ratio;
  // Cumulant order used; absent when no shared component showed up and the
  // ratio was set to zero.
  std::optional<int> order;
};

/// Ratio a/b for X1 = a e + e1, X2 = b e + e2 with a shared non-Gaussian e:
/// kappa(X1^2, X2^(n-2)) / kappa(X1, X2^(n-1)) at the smallest order n >= 3
/// where kappa(X1, X2^(n-1)) is distinguishable from zero.
RatioResult get_ratio(const MomentSource& source, const PairTransform& pair,
                      const EstimatorConfig& cfg = {});
RatioResult get_ratio_detailed(std::span<const double> x1, std::span<const double> x2,
                               const EstimatorConfig& cfg = {});
double get_ratio(std::span<const double> x1, std::span<const double> x2,
                 const EstimatorConfig& cfg = {});

// Treatment-noise change (Alg1).
EstimateReport estimate_eps_t(const MomentSource& source, const EstimatorConfig& cfg = {});
EstimateReport estimate_eps_t(const EnvPairDataset& data, const EstimatorConfig& cfg = {});

// Confounder-noise change (Alg2).
EstimateReport estimate_eps_u(const MomentSource& source, const EstimatorConfig& cfg = {});
EstimateReport estimate_eps_u(const EnvPairDataset& data, const EstimatorConfig& cfg = {});

// Change of the confounder -> outcome coefficient (Alg3).
EstimateReport estimate_gamma(const MomentSource& source, const EstimatorConfig& cfg = {});
EstimateReport estimate_gamma(const EnvPairDataset& data, const EstimatorConfig& cfg = {});

// Change of the confounder -> treatment coefficient (Alg4).
EstimateReport estimate_alpha(const MomentSource& source, const EstimatorConfig& cfg = {});
EstimateReport estimate_alpha(const EnvPairDataset& data, const EstimatorConfig& cfg = {});

// Average of the per-environment least-squares slopes.
EstimateReport ols_separate(const MomentSource& source, const EstimatorConfig& cfg = {});
EstimateReport ols_separate(const EnvPairDataset& data, const EstimatorConfig& cfg = {});

// Least-squares slope on the pooled sample.
EstimateReport ols_combined(const EnvPairDataset& data, const EstimatorConfig& cfg = {});
// Pooled slope from per-environment tables, weighting each environment by
// its sample share (equal weights for exact sources).
EstimateReport ols_combined(const MomentSource& source, double weight1,
                            const EstimatorConfig& cfg = {});

EstimateReport run_method(Method method, const MomentSource& source, double pooled_weight1,
                          const EstimatorConfig& cfg = {});

/// Least-squares residuals of t and y on the covariate columns plus an
/// intercept.
std::pair<std::vector<double>, std::vector<double>> residualize(
    std::span<const double> t, std::span<const double> y, const Eigen::MatrixXd& covariates);

}  // namespace momentid
