#include "momentid/model.hpp"

#include <cmath>

#include "momentid/errors.hpp"

namespace momentid {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

struct NoiseMoments {
  std::vector<double> u, t, y;
};

NoiseMoments noise_moments(const ScmParams& scm, int degree) {
  return {raw_moments(scm.noise_u, degree), raw_moments(scm.noise_t, degree),
          raw_moments(scm.noise_y, degree)};
}

double expand_moment(const ScmParams& scm, const NoiseMoments& mu, int p, int q) {
  const double c = scm.alpha * scm.beta + scm.gamma;  // total U -> Y coefficient
  double total = 0.0;
  for (int i = 0; i <= p; ++i) {
    const double ti = binomial(p, i) * std::pow(scm.alpha, i);
    for (int j = 0; j <= q; ++j) {
      const double yj = binomial(q, j) * std::pow(c, j);
      for (int k = 0; j + k <= q; ++k) {
        const int l = q - j - k;
        const double yk = binomial(q - j, k) * std::pow(scm.beta, k);
        const double term = mu.u[i + j] * mu.t[p - i + k] * mu.y[l];
        if (term != 0.0) total += ti * yj * yk * term;
      }
    }
  }
  return total;
}

void require_change(const ScenarioSpec& s, ChangeKind expected, const char* what) {
  if (s.change != expected) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " requires change = " + std::string(change_name(expected)) +
                    ", got " + std::string(change_name(s.change)));
  }
}

ScmParams tilde_env(const ScmParams& env) {
  if (env.alpha == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "counterexample needs alpha != 0");
  }
  ScmParams out;
  out.alpha = 1.0;
  out.gamma = -env.gamma / env.alpha;
  out.beta = env.beta + env.gamma / env.alpha;
  out.noise_u = env.noise_t;
  out.noise_t = env.noise_u.scaled(env.alpha);
  out.noise_y = env.noise_y;
  return out;
}

}  // namespace

std::string_view change_name(ChangeKind change) {
  switch (change) {
    case ChangeKind::EpsT: return "eps_t";
    case ChangeKind::EpsU: return "eps_u";
    case ChangeKind::Gamma: return "gamma";
    case ChangeKind::Alpha: return "alpha";
    case ChangeKind::EpsY: return "eps_y";
    case ChangeKind::EpsTAndEpsU: return "eps_t_and_eps_u";
  }
  return "unknown";
}

ChangeKind parse_change(std::string_view name) {
  for (auto c : {ChangeKind::EpsT, ChangeKind::EpsU, ChangeKind::Gamma, ChangeKind::Alpha,
                 ChangeKind::EpsY, ChangeKind::EpsTAndEpsU}) {
    if (change_name(c) == name) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown change kind '" + std::string(name) + "'");
}

std::vector<std::string> validate(const ScenarioSpec& s) {
  std::vector<std::string> problems;
  const auto& a = s.env1;
  const auto& b = s.env2;
  if (a.beta != b.beta) problems.emplace_back("beta must be equal across environments");

  const bool du = !(a.noise_u == b.noise_u);
  const bool dt = !(a.noise_t == b.noise_t);
  const bool dy = !(a.noise_y == b.noise_y);
  const bool dalpha = a.alpha != b.alpha;
  const bool dgamma = a.gamma != b.gamma;

  struct Expect {
    bool u, t, y, alpha, gamma;
  } e{};
  switch (s.change) {
    case ChangeKind::EpsT: e.t = true; break;
    case ChangeKind::EpsU: e.u = true; break;
    case ChangeKind::Gamma: e.gamma = true; break;
    case ChangeKind::Alpha: e.alpha = true; break;
    case ChangeKind::EpsY: e.y = true; break;
    case ChangeKind::EpsTAndEpsU: e.u = e.t = true; break;
  }
  auto check = [&](bool differs, bool expected, const char* name) {
    if (differs != expected) {
      problems.push_back(std::string(name) + (expected ? " should differ" : " should be equal") +
                         " across environments for change " +
                         std::string(change_name(s.change)));
    }
  };
  check(du, e.u, "noise_u");
  check(dt, e.t, "noise_t");
  check(dy, e.y, "noise_y");
  check(dalpha, e.alpha, "alpha");
  check(dgamma, e.gamma, "gamma");
  return problems;
}

double population_moment(const ScmParams& scm, int p, int q, int max_order) {
  if (p < 0 || q < 0) throw Error(ErrorCode::InvalidArgument, "negative moment power");
  if (p + q > max_order) {
    throw Error(ErrorCode::OrderOverflow, "order " + std::to_string(p + q) +
                                              " exceeds oracle maximum " +
                                              std::to_string(max_order));
  }
  return expand_moment(scm, noise_moments(scm, p + q), p, q);
}

MomentTable population_table(const ScmParams& scm, int degree) {
  const auto mu = noise_moments(scm, degree);
  MomentTable out(degree);
  for (int p = 0; p <= degree; ++p)
    for (int q = 0; p + q <= degree; ++q) out.at(p, q) = expand_moment(scm, mu, p, q);
  return out;
}

ScmParams rescale_alpha_to_one(const ScmParams& scm) {
  if (scm.alpha == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "cannot rescale alpha = 0 to one");
  }
  ScmParams out = scm;
  out.noise_u = scm.noise_u.scaled(scm.alpha);
  out.gamma = scm.gamma / scm.alpha;
  out.alpha = 1.0;
  return out;
}

ScenarioSpec construct_counterexample(const ScenarioSpec& scenario) {
  require_change(scenario, ChangeKind::EpsTAndEpsU, "construct_counterexample");
  return {tilde_env(scenario.env1), tilde_env(scenario.env2), ChangeKind::EpsTAndEpsU};
}

ScenarioSpec construct_epsy_counterexample(const ScenarioSpec& scenario) {
  require_change(scenario, ChangeKind::EpsY, "construct_epsy_counterexample");
  return {tilde_env(scenario.env1), tilde_env(scenario.env2), ChangeKind::EpsY};
}

}  // namespace momentid
