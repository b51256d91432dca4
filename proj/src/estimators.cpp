#include "momentid/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "momentid/errors.hpp"

namespace momentid {

namespace {

int search_limit(const MomentSource& source, const EstimatorConfig& cfg) {
  if (cfg.max_order < 3 || cfg.max_order > kHardMaxOrder) {
    throw Error(ErrorCode::InvalidArgument,
                "max order must lie in [3, " + std::to_string(kHardMaxOrder) + "]");
  }
  return std::min(cfg.max_order, source.degree());
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Typical size of an order-n statistic of (X, Y): sd(X)^px sd(Y)^py.
double scale_of(const MomentTable& m, int px, int py) {
  return std::pow(std::sqrt(std::abs(m(2, 0))), px) * std::pow(std::sqrt(std::abs(m(0, 2))), py);
}

MomentEstimate env_diff(const MomentSource& src, int p, int q, double& magnitude) {
  const auto& f = src.full();
  magnitude = std::abs(f[0](p, q)) + std::abs(f[1](p, q));
  return src.evaluate([p, q](const TableSet& s) { return s[0](p, q) - s[1](p, q); });
}

// Ratio of joint cumulants at a fixed order; zero when no order was found.
double ratio_at(const MomentTable& pair, std::optional<int> order) {
  if (!order) return 0.0;
  const int n = *order;
  return joint_cumulant(pair, 2, n - 2) / joint_cumulant(pair, 1, n - 1);
}

// Smallest k with E[T1^k] != E[T2^k].
int first_moment_difference(const MomentSource& src, const EstimatorConfig& cfg,
                            std::map<std::string, double>& diag) {
  const int limit = search_limit(src, cfg);
  const auto rule = cfg.rule();
  for (int k = 1; k <= limit; ++k) {
    double mag = 0.0;
    const auto d = env_diff(src, k, 0, mag);
    if (rule.nonzero(d, mag)) {
      diag["moment_diff"] = d.value;
      diag["moment_diff_se"] = d.se;
      return k;
    }
  }
  throw Error(ErrorCode::NoMomentDifference,
              "no treatment moment up to order " + std::to_string(limit) +
                  " differs between environments");
}

// Table of (c T1 - Y1, T1) with c held fixed. Order searches run on this so
// that the nonzero tests are conditional on the estimated coefficient.
PairTransform frozen_pair(double c) {
  return [c](const TableSet& s) { return s[0].transformed(c, -1.0, 1.0, 0.0); };
}

double alg1_ratio(const TableSet& s, int k) {
  return (s[0](k - 1, 1) - s[1](k - 1, 1)) / (s[0](k, 0) - s[1](k, 0));
}

EstimateReport finish(Method method, const MomentEstimate& beta, EstimateReport report) {
  report.method = method;
  report.beta_hat = beta.value;
  report.diagnostics["beta_se"] = beta.se;
  return report;
}

MomentSource source_for(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return dataset_moments(data, cfg);
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Alg1: return "Alg1";
    case Method::Alg2: return "Alg2";
    case Method::Alg3: return "Alg3";
    case Method::Alg4: return "Alg4";
    case Method::OlsSeparate: return "OlsSeparate";
    case Method::OlsCombined: return "OlsCombined";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::Alg1, Method::Alg2, Method::Alg3, Method::Alg4, Method::OlsSeparate,
                 Method::OlsCombined}) {
    if (method_name(m) == name) return m;
  }
  throw Error(ErrorCode::ParseError, "unknown method '" + std::string(name) + "'");
}

MomentSource dataset_moments(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  data.validate();
  if (cfg.max_order < 3 || cfg.max_order > kHardMaxOrder) {
    throw Error(ErrorCode::InvalidArgument,
                "max order must lie in [3, " + std::to_string(kHardMaxOrder) + "]");
  }
  return MomentSource::from_samples({{data.t1, data.y1}, {data.t2, data.y2}}, cfg.max_order,
                                    cfg.jackknife_groups);
}

MomentSource population_moments(const ScenarioSpec& scenario, int degree) {
  return MomentSource::exact(
      {population_table(scenario.env1, degree), population_table(scenario.env2, degree)});
}

RatioResult get_ratio(const MomentSource& source, const PairTransform& pair,
                      const EstimatorConfig& cfg) {
  const int limit = search_limit(source, cfg);
  const auto rule = cfg.rule();
  const MomentTable full = pair(source.full());
  for (int n = 3; n <= limit; ++n) {
    const auto kappa = source.evaluate(
        [&pair, n](const TableSet& s) { return joint_cumulant(pair(s), 1, n - 1); });
    if (rule.nonzero(kappa, scale_of(full, 1, n - 1))) {
      RatioResult out;
      out.order = n;
      out.ratio = source.evaluate([&pair, n](const TableSet& s) { return ratio_at(pair(s), n); });
      return out;
    }
  }
  // No shared component: X1 carries none of X2's non-Gaussian part (a = 0),
  // which is only meaningful when X2 has such a part at all.
  for (int n = 3; n <= limit; ++n) {
    const auto own = source.evaluate(
        [&pair, n](const TableSet& s) { return joint_cumulant(pair(s), 0, n); });
    if (rule.nonzero(own, scale_of(full, 0, n))) {
      RatioResult out;
      out.ratio.n = source.sample_count();
      return out;
    }
  }
  throw Error(ErrorCode::SharedComponentNotFound,
              "no non-Gaussian shared component found up to order " + std::to_string(limit));
}

RatioResult get_ratio_detailed(std::span<const double> x1, std::span<const double> x2,
                               const EstimatorConfig& cfg) {
  const auto src = MomentSource::from_samples({{x1, x2}}, cfg.max_order, cfg.jackknife_groups);
  return get_ratio(src, [](const TableSet& s) { return s[0]; }, cfg);
}

double get_ratio(std::span<const double> x1, std::span<const double> x2,
                 const EstimatorConfig& cfg) {
  return get_ratio_detailed(x1, x2, cfg).ratio.value;
}

EstimateReport estimate_eps_t(const MomentSource& source, const EstimatorConfig& cfg) {
  EstimateReport report;
  const int k = first_moment_difference(source, cfg, report.diagnostics);
  report.order_found = k;
  const auto beta = source.evaluate([k](const TableSet& s) { return alg1_ratio(s, k); });
  return finish(Method::Alg1, beta, std::move(report));
}

EstimateReport estimate_eps_u(const MomentSource& source, const EstimatorConfig& cfg) {
  EstimateReport report;
  const int k = first_moment_difference(source, cfg, report.diagnostics);
  report.order_found = k;
  const auto r1 = source.evaluate([k](const TableSet& s) { return alg1_ratio(s, k); });

  const PairTransform pair = [k](const TableSet& s) {
    return s[0].transformed(alg1_ratio(s, k), -1.0, 1.0, 0.0);
  };
  const auto r2 = get_ratio(source, frozen_pair(r1.value), cfg);
  const auto order = r2.order;
  const auto beta = source.evaluate(
      [&pair, k, order](const TableSet& s) { return alg1_ratio(s, k) - ratio_at(pair(s), order); });

  report.diagnostics["r1"] = r1.value;
  report.diagnostics["r2"] = r2.ratio.value;
  report.diagnostics["r2_se"] = r2.ratio.se;
  report.diagnostics["ratio_order"] = order ? *order : 0;
  return finish(Method::Alg2, beta, std::move(report));
}

namespace {

// Pieces of the gamma-change procedure, all as functions of the (T, Y) tables.
struct GammaSteps {
  static double r(const TableSet& s) {
    return (s[1](0, 2) - s[0](0, 2)) / (s[1](1, 1) - s[0](1, 1));
  }
  // Table of (T, X) with X = r T - 2 Y.
  static MomentTable tx(const MomentTable& env, double r) {
    return env.transformed(1.0, 0.0, r, -2.0);
  }
  static double phi(const MomentTable& m, int n) {
    if (n % 2 == 1) return m(n - 1, 1);
    return m(n - 1, 1) - (n - 1) * m(1, 1) * m(n - 2, 0);
  }
  static double phi_scale(const MomentTable& m, int n) {
    double mag = std::abs(m(n - 1, 1)) + scale_of(m, n - 1, 1);
    if (n % 2 == 0) mag += (n - 1) * std::abs(m(1, 1) * m(n - 2, 0));
    return mag;
  }
  static double psi(const MomentTable& m, int n, int j) {
    if (n % 2 == 1) return m(n - j, j);
    return m(j, n - j) - (n - 1) * m(1, 1) * m(0, n - 2);
  }
};

struct GammaPlan {
  int n_star = 0;
  bool case1 = true;
  int j = 0;
  int l = 0;
};

double gamma_coefficient(const TableSet& s, const GammaPlan& plan) {
  const double r = GammaSteps::r(s);
  const auto m1 = GammaSteps::tx(s[0], r);
  const auto m2 = GammaSteps::tx(s[1], r);
  const double c1 = m1(1, 1);
  const double c2 = m2(1, 1);
  const double f1 = GammaSteps::phi(m1, plan.n_star);
  const double f2 = GammaSteps::phi(m2, plan.n_star);
  const double p1 = GammaSteps::psi(m1, plan.n_star, plan.j);
  const double p2 = GammaSteps::psi(m2, plan.n_star, plan.j);
  if (plan.case1) {
    const double mag = std::pow(std::abs((p1 - p2) / (f1 - f2)), 1.0 / plan.l);
    return sign_of(0.5 * (c1 - c2)) * mag;
  }
  const double mag = std::pow(std::abs((p1 + p2) / (f1 + f2)), 1.0 / plan.l);
  return sign_of(0.5 * (c1 + c2)) * mag;
}

}  // namespace

EstimateReport estimate_gamma(const MomentSource& source, const EstimatorConfig& cfg) {
  const int limit = search_limit(source, cfg);
  const auto rule = cfg.rule();
  EstimateReport report;
  auto& diag = report.diagnostics;

  double mag = 0.0;
  const auto denom = env_diff(source, 1, 1, mag);
  if (!rule.nonzero(denom, mag)) {
    throw Error(ErrorCode::ZeroDenominator,
                "E[T Y] does not differ between environments; gamma did not change");
  }
  const auto r = source.evaluate(GammaSteps::r);
  diag["r"] = r.value;

  const auto& f = source.full();
  const auto m1 = GammaSteps::tx(f[0], r.value);
  const auto m2 = GammaSteps::tx(f[1], r.value);
  diag["a_tilde"] = 0.5 * (m1(1, 1) - m2(1, 1));
  diag["b_tilde"] = 0.5 * (m1(1, 1) + m2(1, 1));

  GammaPlan plan;
  for (int n = 3; n <= limit && plan.n_star == 0; ++n) {
    for (int env = 0; env < 2; ++env) {
      const auto phi = source.evaluate([n, env](const TableSet& s) {
        return GammaSteps::phi(GammaSteps::tx(s[env], GammaSteps::r(s)), n);
      });
      const auto& m = env == 0 ? m1 : m2;
      if (rule.nonzero(phi, GammaSteps::phi_scale(m, n))) {
        plan.n_star = n;
        break;
      }
    }
  }
  if (plan.n_star == 0) {
    throw Error(ErrorCode::NoOrderFound,
                "no order up to " + std::to_string(limit) + " separates the environments");
  }
  const int n = plan.n_star;
  report.order_found = n;

  const auto phi_diff = source.evaluate([n](const TableSet& s) {
    const double rr = GammaSteps::r(s);
    return GammaSteps::phi(GammaSteps::tx(s[0], rr), n) -
           GammaSteps::phi(GammaSteps::tx(s[1], rr), n);
  });
  plan.case1 = rule.nonzero(phi_diff, GammaSteps::phi_scale(m1, n) + GammaSteps::phi_scale(m2, n));
  const bool odd = n % 2 == 1;
  if (plan.case1) {
    plan.j = odd ? 3 : 1;
    plan.l = odd ? 2 : n - 2;
  } else {
    plan.j = odd ? 2 : 1;
    plan.l = odd ? 1 : n - 2;
  }
  diag["phi_diff"] = phi_diff.value;
  diag["phi_diff_se"] = phi_diff.se;

  const auto coef = source.evaluate([plan](const TableSet& s) { return gamma_coefficient(s, plan); });
  if (plan.case1) {
    report.branch = "case1";
    diag["a"] = coef.value;
    // beta + gamma1 = (r - a) / 2, then strip gamma1 through the shared eps_t.
    const PairTransform pair = [plan](const TableSet& s) {
      const double rt = 0.5 * (GammaSteps::r(s) - gamma_coefficient(s, plan));
      return s[0].transformed(rt, -1.0, 1.0, 0.0);
    };
    const double rt = 0.5 * (r.value - coef.value);
    diag["r_tilde"] = rt;
    const auto ratio = get_ratio(source, frozen_pair(rt), cfg);
    const auto order = ratio.order;
    diag["ratio"] = ratio.ratio.value;
    diag["ratio_order"] = order ? *order : 0;
    const auto beta = source.evaluate([&pair, plan, order](const TableSet& s) {
      const double rt = 0.5 * (GammaSteps::r(s) - gamma_coefficient(s, plan));
      return rt - ratio_at(pair(s), order);
    });
    return finish(Method::Alg3, beta, std::move(report));
  }
  report.branch = "case2";
  diag["b"] = coef.value;
  const auto beta = source.evaluate(
      [plan](const TableSet& s) { return 0.5 * (GammaSteps::r(s) - gamma_coefficient(s, plan)); });
  return finish(Method::Alg3, beta, std::move(report));
}

namespace {

struct Quadratic {
  double a, b, c;  // C beta^2 - 2 B beta + A
  static Quadratic of(const TableSet& s) {
    return {s[0](0, 2) - s[1](0, 2), s[0](1, 1) - s[1](1, 1), s[0](2, 0) - s[1](2, 0)};
  }
  double disc() const { return b * b - a * c; }
  // Root 1 is (B + s sqrt(disc)) / C and root 2 is (B - s sqrt(disc)) / C,
  // with s the sign of the full-sample B. Root 1 is the one of larger
  // magnitude; root 2 comes from the product of the roots to avoid cancellation.
  double root(int which, double s) const {
    const double q = b + s * std::sqrt(std::max(disc(), 0.0));
    if (which == 1) return q / c;
    return q == 0.0 ? b / c : a / q;
  }
};

// Table of (X, T) with X = Y - beta T.
MomentTable residual_table(const MomentTable& env, double beta) {
  return env.transformed(-beta, 1.0, 1.0, 0.0);
}

double alpha_phi(const MomentTable& m, int n) {
  return m(n - 1, 1) - (n - 1) * m(1, 1) * m(n - 2, 0);
}

double alpha_phi_scale(const MomentTable& m, int n) {
  return std::abs(m(n - 1, 1)) + (n - 1) * std::abs(m(1, 1) * m(n - 2, 0)) +
         scale_of(m, n - 1, 1);
}

using RootFn = std::function<double(const TableSet&)>;

std::optional<int> alpha_order(const MomentSource& src, const RootFn& root, int limit,
                               const DecisionRule& rule) {
  const auto full = residual_table(src.full()[0], root(src.full()));
  for (int n = 3; n <= limit; ++n) {
    const auto phi = src.evaluate(
        [&root, n](const TableSet& s) { return alpha_phi(residual_table(s[0], root(s)), n); });
    if (rule.nonzero(phi, alpha_phi_scale(full, n))) return n;
  }
  return std::nullopt;
}

double alpha_tiebreak(const TableSet& s, double beta, int n) {
  const auto m1 = residual_table(s[0], beta);
  const auto m2 = residual_table(s[1], beta);
  return std::abs(m1(1, 1) / m2(1, 1) - alpha_phi(m1, n) / alpha_phi(m2, n));
}

}  // namespace

EstimateReport estimate_alpha(const MomentSource& source, const EstimatorConfig& cfg) {
  const int limit = search_limit(source, cfg);
  const auto rule = cfg.rule();
  EstimateReport report;
  auto& diag = report.diagnostics;

  double mag_c = 0.0, mag_b = 0.0;
  const auto cq = env_diff(source, 2, 0, mag_c);
  const auto bq = env_diff(source, 1, 1, mag_b);
  const bool c_zero = !rule.nonzero(cq, mag_c);
  const bool b_zero = !rule.nonzero(bq, mag_b);
  const auto quad = Quadratic::of(source.full());
  diag["coef_const"] = quad.a;
  diag["coef_linear"] = -2.0 * quad.b;
  diag["coef_quadratic"] = quad.c;

  if (c_zero) {
    if (b_zero) {
      throw Error(ErrorCode::AlphaUnchanged,
                  "second moments agree across environments; alpha did not change");
    }
    const RootFn root = [](const TableSet& s) {
      const auto q = Quadratic::of(s);
      return q.a / (2.0 * q.b);
    };
    const auto n = alpha_order(source, root, limit, rule);
    if (!n) {
      throw Error(ErrorCode::NoOrderFound,
                  "no order up to " + std::to_string(limit) + " shows a non-Gaussian confounder");
    }
    report.order_found = *n;
    report.branch = "linear";
    return finish(Method::Alg4, source.evaluate(root), std::move(report));
  }

  const auto disc = source.evaluate([](const TableSet& s) { return Quadratic::of(s).disc(); });
  diag["discriminant"] = disc.value;
  if (disc.value < 0.0 && rule.nonzero(disc, quad.b * quad.b + std::abs(quad.a * quad.c))) {
    throw Error(ErrorCode::RootsNotReal, "quadratic in beta has complex roots");
  }

  const double sb = sign_of(quad.b);
  const RootFn roots[2] = {[sb](const TableSet& s) { return Quadratic::of(s).root(1, sb); },
                           [sb](const TableSet& s) { return Quadratic::of(s).root(2, sb); }};
  const double beta1 = roots[0](source.full());
  const double beta2 = roots[1](source.full());
  diag["beta_1"] = beta1;
  diag["beta_2"] = beta2;

  std::optional<int> n[2];
  for (int i = 0; i < 2; ++i) n[i] = alpha_order(source, roots[i], limit, rule);
  if (n[0]) diag["n_1"] = *n[0];
  if (n[1]) diag["n_2"] = *n[1];
  if (!n[0] || !n[1]) {
    throw Error(ErrorCode::NoOrderFound,
                "no order up to " + std::to_string(limit) +
                    " shows a non-Gaussian confounder for both roots");
  }

  int pick = 0;
  if (*n[0] == *n[1]) {
    const double t1 = alpha_tiebreak(source.full(), beta1, *n[0]);
    const double t2 = alpha_tiebreak(source.full(), beta2, *n[1]);
    diag["tiebreak_1"] = t1;
    diag["tiebreak_2"] = t2;
    pick = t2 < t1 ? 1 : 0;
  } else {
    pick = *n[1] > *n[0] ? 1 : 0;
  }
  report.order_found = *n[pick];
  report.branch = pick == 0 ? "root_1" : "root_2";
  return finish(Method::Alg4, source.evaluate(roots[pick]), std::move(report));
}

EstimateReport ols_separate(const MomentSource& source, const EstimatorConfig&) {
  for (const auto& m : source.full()) {
    if (!(m(2, 0) > 0.0)) throw Error(ErrorCode::ZeroVariance, "treatment has zero variance");
  }
  const auto beta = source.evaluate([](const TableSet& s) {
    double sum = 0.0;
    for (const auto& m : s) sum += m(1, 1) / m(2, 0);
    return sum / static_cast<double>(s.size());
  });
  return finish(Method::OlsSeparate, beta, {});
}

EstimateReport ols_combined(const MomentSource& source, double weight1,
                            const EstimatorConfig&) {
  if (!(weight1 >= 0.0 && weight1 <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "pooling weight must lie in [0, 1]");
  }
  const double w[2] = {weight1, 1.0 - weight1};
  const auto& f = source.full();
  if (!(w[0] * f[0](2, 0) + w[1] * f[1](2, 0) > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "pooled treatment has zero variance");
  }
  const auto beta = source.evaluate([w](const TableSet& s) {
    return (w[0] * s[0](1, 1) + w[1] * s[1](1, 1)) / (w[0] * s[0](2, 0) + w[1] * s[1](2, 0));
  });
  return finish(Method::OlsCombined, beta, {});
}

EstimateReport ols_combined(const EnvPairDataset& data, const EstimatorConfig&) {
  data.validate();
  std::vector<double> t(data.t1), y(data.y1);
  t.insert(t.end(), data.t2.begin(), data.t2.end());
  y.insert(y.end(), data.y2.begin(), data.y2.end());
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::ZeroVariance, "pooled treatment has zero variance");
  EstimateReport report;
  report.method = Method::OlsCombined;
  report.beta_hat = sxy / sxx;
  return report;
}

EstimateReport estimate_eps_t(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return estimate_eps_t(source_for(data, cfg), cfg);
}
EstimateReport estimate_eps_u(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return estimate_eps_u(source_for(data, cfg), cfg);
}
EstimateReport estimate_gamma(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return estimate_gamma(source_for(data, cfg), cfg);
}
EstimateReport estimate_alpha(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return estimate_alpha(source_for(data, cfg), cfg);
}
EstimateReport ols_separate(const EnvPairDataset& data, const EstimatorConfig& cfg) {
  return ols_separate(source_for(data, cfg), cfg);
}

EstimateReport run_method(Method method, const MomentSource& source, double pooled_weight1,
                          const EstimatorConfig& cfg) {
  switch (method) {
    case Method::Alg1: return estimate_eps_t(source, cfg);
    case Method::Alg2: return estimate_eps_u(source, cfg);
    case Method::Alg3: return estimate_gamma(source, cfg);
    case Method::Alg4: return estimate_alpha(source, cfg);
    case Method::OlsSeparate: return ols_separate(source, cfg);
    case Method::OlsCombined: return ols_combined(source, pooled_weight1, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

std::pair<std::vector<double>, std::vector<double>> residualize(
    std::span<const double> t, std::span<const double> y, const Eigen::MatrixXd& covariates) {
  if (t.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "residualize: t and y lengths differ");
  }
  const auto n = static_cast<Eigen::Index>(t.size());
  if (covariates.rows() != n && covariates.cols() > 0) {
    throw Error(ErrorCode::InvalidArgument, "residualize: covariate rows do not match samples");
  }
  Eigen::MatrixXd design(n, covariates.cols() + 1);
  design.col(0).setOnes();
  if (covariates.cols() > 0) design.rightCols(covariates.cols()) = covariates;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorCode::RankDeficient, "residualize: covariate matrix is rank deficient");
  }
  auto resid = [&](std::span<const double> v) {
    const Eigen::Map<const Eigen::VectorXd> vec(v.data(), n);
    const Eigen::VectorXd r = vec - design * qr.solve(vec);
    return std::vector<double>(r.data(), r.data() + r.size());
  };
  return {resid(t), resid(y)};
}

}  // namespace momentid
