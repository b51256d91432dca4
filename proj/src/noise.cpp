#include "momentid/noise.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "momentid/errors.hpp"

namespace momentid {

namespace {

// |B_n| for even n = 0, 2, ..., 20.
constexpr std::array<double, 11> kAbsBernoulliEven = {
    1.0,           1.0 / 6.0,         1.0 / 30.0,    1.0 / 42.0,
    1.0 / 30.0,    5.0 / 66.0,        691.0 / 2730.0, 7.0 / 6.0,
    3617.0 / 510.0, 43867.0 / 798.0,  174611.0 / 330.0};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Moments of a mean-zero variable from its cumulants (kappa[1] ignored).
std::vector<double> moments_from_cumulants(const std::vector<double>& kappa,
                                           int max_order) {
  std::vector<double> mu(max_order + 1, 0.0);
  mu[0] = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    double s = 0.0;
    for (int m = 2; m <= n; ++m) s += binomial(n - 1, m - 1) * kappa[m] * mu[n - m];
    mu[n] = s;
  }
  return mu;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

std::vector<double> unscaled_moments(const NoiseSpec& spec, int max_order) {
  const auto& p = spec.params;
  std::vector<double> mu(max_order + 1, 0.0);
  mu[0] = 1.0;
  switch (spec.family) {
    case NoiseFamily::Exponential:
    case NoiseFamily::Gamma: {
      const double shape = spec.family == NoiseFamily::Gamma ? p[0] : 1.0;
      const double theta = spec.family == NoiseFamily::Gamma ? p[1] : 1.0 / p[0];
      std::vector<double> kappa(max_order + 1, 0.0);
      for (int n = 2; n <= max_order; ++n)
        kappa[n] = shape * std::pow(theta, n) * factorial(n - 1);
      return moments_from_cumulants(kappa, max_order);
    }
    case NoiseFamily::Gumbel: {
      std::vector<double> kappa(max_order + 1, 0.0);
      for (int n = 2; n <= max_order; ++n)
        kappa[n] = factorial(n - 1) * std::riemann_zeta(static_cast<double>(n)) *
                   std::pow(p[0], n);
      return moments_from_cumulants(kappa, max_order);
    }
    case NoiseFamily::Logistic:
      for (int n = 2; n <= max_order; n += 2)
        mu[n] = std::pow(p[0] * std::numbers::pi, n) * (std::pow(2.0, n) - 2.0) *
                kAbsBernoulliEven[n / 2];
      return mu;
    case NoiseFamily::Uniform:
      for (int n = 2; n <= max_order; n += 2) mu[n] = std::pow(p[0], n) / (n + 1);
      return mu;
    case NoiseFamily::Gaussian: {
      double dfact = 1.0;
      for (int n = 2; n <= max_order; n += 2) {
        dfact *= (n - 1);
        mu[n] = dfact * std::pow(p[0], n);
      }
      return mu;
    }
    case NoiseFamily::PointMass:
      return mu;
  }
  return mu;
}

}  // namespace

std::string_view family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Exponential: return "exponential";
    case NoiseFamily::Gamma: return "gamma";
    case NoiseFamily::Gumbel: return "gumbel";
    case NoiseFamily::Logistic: return "logistic";
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::PointMass: return "point_mass";
    case NoiseFamily::Gaussian: return "gaussian";
  }
  return "unknown";
}

NoiseFamily parse_family(std::string_view name) {
  for (auto f : {NoiseFamily::Exponential, NoiseFamily::Gamma, NoiseFamily::Gumbel,
                 NoiseFamily::Logistic, NoiseFamily::Uniform, NoiseFamily::PointMass,
                 NoiseFamily::Gaussian}) {
    if (family_name(f) == name) return f;
  }
  throw Error(ErrorCode::ParseError, "unknown noise family '" + std::string(name) + "'");
}

NoiseSpec NoiseSpec::make(NoiseFamily family, std::vector<double> params, double scale) {
  std::size_t expected = 1;
  if (family == NoiseFamily::Gamma) expected = 2;
  if (family == NoiseFamily::PointMass) expected = 0;
  const std::string name(family_name(family));
  require(params.size() == expected,
          name + " expects " + std::to_string(expected) + " parameter(s)");
  for (double v : params) {
    require(std::isfinite(v) && v > 0.0, name + " parameters must be positive and finite");
  }
  require(std::isfinite(scale), "noise scale must be finite");
  return NoiseSpec{family, std::move(params), scale};
}

NoiseSpec NoiseSpec::exponential(double rate) { return make(NoiseFamily::Exponential, {rate}); }
NoiseSpec NoiseSpec::gamma(double shape, double scale) {
  return make(NoiseFamily::Gamma, {shape, scale});
}
NoiseSpec NoiseSpec::gumbel(double scale) { return make(NoiseFamily::Gumbel, {scale}); }
NoiseSpec NoiseSpec::logistic(double scale) { return make(NoiseFamily::Logistic, {scale}); }
NoiseSpec NoiseSpec::uniform(double halfwidth) { return make(NoiseFamily::Uniform, {halfwidth}); }
NoiseSpec NoiseSpec::point_mass() { return make(NoiseFamily::PointMass, {}); }
NoiseSpec NoiseSpec::gaussian(double sigma) { return make(NoiseFamily::Gaussian, {sigma}); }

NoiseSpec NoiseSpec::scaled(double factor) const {
  NoiseSpec out = *this;
  out.scale *= factor;
  return out;
}

std::string describe(const NoiseSpec& spec) {
  std::ostringstream os;
  os << family_name(spec.family) << '(';
  for (std::size_t i = 0; i < spec.params.size(); ++i) os << (i ? "," : "") << spec.params[i];
  os << ')';
  if (spec.scale != 1.0) os << '*' << spec.scale;
  return os.str();
}

std::vector<double> raw_moments(const NoiseSpec& spec, int max_order) {
  if (max_order < 0 || max_order > kHardMaxOrder) {
    throw Error(ErrorCode::OrderOverflow,
                "moment order " + std::to_string(max_order) + " outside [0, " +
                    std::to_string(kHardMaxOrder) + "]");
  }
  auto mu = unscaled_moments(spec, max_order);
  double f = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    f *= spec.scale;
    mu[n] *= f;
  }
  return mu;
}

double raw_moment(const NoiseSpec& spec, int order, int max_order) {
  if (order < 0 || order > max_order) {
    throw Error(ErrorCode::OrderOverflow, "moment order " + std::to_string(order) +
                                              " exceeds configured maximum " +
                                              std::to_string(max_order));
  }
  return raw_moments(spec, order)[order];
}

std::optional<int> nongaussian_order(const NoiseSpec& spec, int max_order) {
  const auto mu = raw_moments(spec, max_order);
  for (int n = 3; n <= max_order; ++n) {
    const double lhs = mu[n];
    const double rhs = (n - 1) * mu[n - 2] * mu[2];
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (std::abs(lhs - rhs) > 1e-9 * scale) return n;
  }
  return std::nullopt;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  // splitmix64 finalizer applied along the path
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master);
  for (auto v : path) h = mix(h ^ mix(v + 0x632be59bd9b4e019ULL));
  return h;
}

double StreamRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Marsaglia-Tsang; shape < 1 handled by the u^(1/shape) boost.
double gamma_draw(double shape, StreamRng& rng) {
  if (shape < 1.0) {
    const double g = gamma_draw(shape + 1.0, rng);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

void sample_into(const NoiseSpec& spec, std::span<double> out, StreamRng& rng) {
  const auto& p = spec.params;
  const double s = spec.scale;
  switch (spec.family) {
    case NoiseFamily::Exponential: {
      const double inv = 1.0 / p[0];
      for (double& x : out) x = s * (-std::log(rng.uniform()) * inv - inv);
      return;
    }
    case NoiseFamily::Gamma: {
      const double mean = p[0] * p[1];
      for (double& x : out) x = s * (gamma_draw(p[0], rng) * p[1] - mean);
      return;
    }
    case NoiseFamily::Gumbel: {
      const double mean = std::numbers::egamma * p[0];
      for (double& x : out) x = s * (-p[0] * std::log(-std::log(rng.uniform())) - mean);
      return;
    }
    case NoiseFamily::Logistic:
      for (double& x : out) {
        const double u = rng.uniform();
        x = s * p[0] * std::log(u / (1.0 - u));
      }
      return;
    case NoiseFamily::Uniform:
      for (double& x : out) x = s * p[0] * (2.0 * rng.uniform() - 1.0);
      return;
    case NoiseFamily::Gaussian:
      for (double& x : out) x = s * p[0] * rng.normal();
      return;
    case NoiseFamily::PointMass:
      for (double& x : out) x = 0.0;
      return;
  }
}

std::vector<double> sample(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  StreamRng rng(seed);
  sample_into(spec, out, rng);
  return out;
}

}  // namespace momentid
