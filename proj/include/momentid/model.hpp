#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "momentid/moment_table.hpp"
#include "momentid/noise.hpp"

namespace momentid {

// One environment of the confounded linear model
//   U = eps_u,  T = alpha U + eps_t,  Y = beta T + gamma U + eps_y.
struct ScmParams {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  NoiseSpec noise_u;
  NoiseSpec noise_t;
  NoiseSpec noise_y;

  bool operator==(const ScmParams&) const = default;
};

// Which single mechanism differs between the two environments.
enum class ChangeKind { EpsT, EpsU, Gamma, Alpha, EpsY, EpsTAndEpsU };

std::string_view change_name(ChangeKind change);
ChangeKind parse_change(std::string_view name);

struct ScenarioSpec {
  ScmParams env1;
  ScmParams env2;
  ChangeKind change = ChangeKind::EpsT;

  const ScmParams& env(int i) const { return i == 1 ? env1 : env2; }
  bool operator==(const ScenarioSpec&) const = default;
};

// Human-readable inconsistencies between `change` and the parameters that
// actually differ; empty when the scenario is well formed.
std::vector<std::string> validate(const ScenarioSpec& scenario);

/// Exact E[T^p Y^q] under `scm`, by multinomial expansion over the
/// independent zero-mean noises.
double population_moment(const ScmParams& scm, int p, int q,
                         int max_order = kOracleMaxOrder);

/// All exact moments E[T^p Y^q] with p + q <= degree.
MomentTable population_table(const ScmParams& scm, int degree);

/// Observationally equivalent parameters with alpha = 1 (eps_u absorbs alpha).
ScmParams rescale_alpha_to_one(const ScmParams& scm);

/// Tilde scenario witnessing non-identifiability when both eps_t and eps_u
/// change: eps_u' = eps_t, eps_t' = alpha eps_u, alpha' = 1,
/// gamma' = -gamma/alpha, beta' = beta + gamma/alpha.
ScenarioSpec construct_counterexample(const ScenarioSpec& scenario);

/// Same substitution for a scenario where only eps_y changes.
ScenarioSpec construct_epsy_counterexample(const ScenarioSpec& scenario);

}  // namespace momentid
