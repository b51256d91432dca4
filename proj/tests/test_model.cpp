#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "momentid/errors.hpp"
#include "momentid/model.hpp"

using namespace momentid;

namespace {

ScmParams unit_variance_env(double alpha, double beta, double gamma) {
  ScmParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.noise_u = NoiseSpec::exponential(1.0);
  p.noise_t = NoiseSpec::uniform(std::sqrt(3.0));
  p.noise_y = NoiseSpec::logistic(std::sqrt(3.0) / 3.14159265358979323846);
  return p;
}

void expect_same_moments(const ScmParams& a, const ScmParams& b, int degree, double rel) {
  for (int p = 0; p <= degree; ++p)
    for (int q = 0; p + q <= degree; ++q) {
      const double x = population_moment(a, p, q), y = population_moment(b, p, q);
      EXPECT_NEAR(x, y, rel * (1.0 + std::abs(x))) << "p=" << p << " q=" << q;
    }
}

ScenarioSpec tagged(ScenarioSpec s, ChangeKind change) {
  s.change = change;
  return s;
}

}  // namespace

TEST(PopulationMoment, IndependentOutcomeHasZeroCovariance) {
  EXPECT_EQ(population_moment(unit_variance_env(1.0, 0.0, 0.0), 1, 1), 0.0);
}

TEST(PopulationMoment, VarianceOfTreatment) {
  fixtures::Gen g(3);
  for (int i = 0; i < 10; ++i) {
    auto p = unit_variance_env(1.0, g.uniform(-2, 2), g.uniform(-2, 2));
    EXPECT_NEAR(population_moment(p, 2, 0), 2.0, 1e-12);
  }
}

TEST(PopulationMoment, ThirdMomentOfSummedExponentials) {
  ScmParams p;
  p.noise_u = NoiseSpec::exponential(1.0);
  p.noise_t = NoiseSpec::exponential(1.0);
  EXPECT_NEAR(population_moment(p, 3, 0), 4.0, 1e-12);
}

TEST(PopulationMoment, MatchesMonteCarlo) {
  ScmParams p;
  p.alpha = 0.5;
  p.beta = 0.65;
  p.gamma = 0.85;
  p.noise_u = NoiseSpec::exponential(1.0);
  p.noise_t = NoiseSpec::gumbel(0.8);
  p.noise_y = NoiseSpec::exponential(0.7);
  const std::size_t n = 4000000;
  const auto u = sample(p.noise_u, n, 1), et = sample(p.noise_t, n, 2), ey = sample(p.noise_y, n, 3);
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = p.alpha * u[i] + et[i];
    y[i] = p.beta * t[i] + p.gamma * u[i] + ey[i];
  }
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      if (a + b == 0) continue;
      double s = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = std::pow(t[i], a) * std::pow(y[i], b);
        s += v;
        ss += v * v;
      }
      const double mean = s / n, se = std::sqrt((ss / n - mean * mean) / n);
      EXPECT_LE(std::abs(mean - population_moment(p, a, b)), 5.0 * se) << a << "," << b;
    }
}

TEST(PopulationMoment, PointMassNoisesGiveZero) {
  ScmParams p;
  p.alpha = 1.3;
  p.beta = -0.4;
  p.gamma = 2.0;
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b) {
      if (a + b == 0) continue;
      EXPECT_EQ(population_moment(p, a, b), 0.0);
    }
}

TEST(PopulationMoment, OrderOverflowThrows) {
  const auto p = unit_variance_env(1.0, 1.0, 1.0);
  EXPECT_THROW(population_moment(p, 10, 3), Error);
  EXPECT_THROW(population_moment(p, -1, 2), Error);
  const auto m = population_table(p, 6);
  EXPECT_EQ(m(2, 3), population_moment(p, 2, 3));
}

TEST(RescaleAlpha, IdentityWhenAlphaIsOne) {
  const auto p = unit_variance_env(1.0, 0.3, 0.7);
  EXPECT_EQ(rescale_alpha_to_one(p), p);
}

TEST(RescaleAlpha, AbsorbsAlphaIntoConfounder) {
  auto p = unit_variance_env(2.0, 0.3, 1.0);
  p.noise_u = NoiseSpec::uniform(std::sqrt(3.0));
  const auto r = rescale_alpha_to_one(p);
  EXPECT_EQ(r.alpha, 1.0);
  EXPECT_NEAR(r.gamma, 0.5, 1e-15);
  EXPECT_NEAR(raw_moment(r.noise_u, 2), 4.0, 1e-12);
}

TEST(RescaleAlpha, PreservesEveryMoment) {
  fixtures::Gen g(21);
  for (int i = 0; i < 50; ++i) {
    const auto p = g.any_env();
    expect_same_moments(p, rescale_alpha_to_one(p), 6, 1e-12);
  }
}

TEST(RescaleAlpha, ZeroAlphaThrows) {
  EXPECT_THROW(rescale_alpha_to_one(unit_variance_env(0.0, 1.0, 1.0)), Error);
}

TEST(Counterexample, ShiftsBetaByGammaOverAlpha) {
  fixtures::Gen g(1);
  auto s = g.standard_scenario(ChangeKind::EpsU);
  s.env2.noise_t = NoiseSpec::exponential(0.5);
  s.change = ChangeKind::EpsTAndEpsU;
  for (auto* e : {&s.env1, &s.env2}) {
    e->alpha = 0.5;
    e->beta = 0.65;
    e->gamma = 0.85;
  }
  const auto tilde = construct_counterexample(s);
  EXPECT_NEAR(tilde.env1.beta, 2.35, 1e-12);
  EXPECT_NEAR(tilde.env2.beta, 2.35, 1e-12);
  EXPECT_EQ(tilde.change, ChangeKind::EpsTAndEpsU);
  for (int i : {1, 2}) expect_same_moments(s.env(i), tilde.env(i), 6, 1e-9);

  auto sy = tagged(s, ChangeKind::EpsY);
  sy.env2 = sy.env1;
  sy.env2.noise_y = NoiseSpec::exponential(0.5);
  const auto ty = construct_epsy_counterexample(sy);
  EXPECT_NEAR(ty.env1.beta, 2.35, 1e-12);
  for (int i : {1, 2}) expect_same_moments(sy.env(i), ty.env(i), 6, 1e-9);
  EXPECT_EQ(ty.env1.noise_y, sy.env1.noise_y);
  EXPECT_EQ(ty.env2.noise_y, sy.env2.noise_y);
}

TEST(Counterexample, NoConfoundingCollapses) {
  fixtures::Gen g(2);
  auto s = tagged(g.standard_scenario(ChangeKind::EpsU), ChangeKind::EpsTAndEpsU);
  s.env2.noise_t = NoiseSpec::exponential(0.5);
  s.env1.alpha = s.env2.alpha = 1.0;
  s.env1.gamma = s.env2.gamma = 0.0;
  EXPECT_EQ(construct_counterexample(s).env1.beta, s.env1.beta);

  auto sy = g.standard_scenario(ChangeKind::EpsY);
  sy.env1.gamma = sy.env2.gamma = 0.0;
  EXPECT_EQ(construct_epsy_counterexample(sy).env1.beta, sy.env1.beta);
}

TEST(Counterexample, WrongTagThrows) {
  fixtures::Gen g(4);
  const auto s = g.standard_scenario(ChangeKind::Gamma);
  EXPECT_THROW(construct_counterexample(s), Error);
  EXPECT_THROW(construct_epsy_counterexample(s), Error);
}

TEST(Counterexample, SoundOnRandomScenarios) {
  fixtures::Gen g(5);
  for (int i = 0; i < 60; ++i) {
    ScenarioSpec s;
    s.env1 = g.any_env();
    s.env2 = s.env1;
    const bool both = g.coin();
    if (both) {
      s.change = ChangeKind::EpsTAndEpsU;
      s.env2.noise_t = g.noise();
      s.env2.noise_u = g.noise();
    } else {
      s.change = ChangeKind::EpsY;
      s.env2.noise_y = g.noise();
    }
    const auto tilde = both ? construct_counterexample(s) : construct_epsy_counterexample(s);
    for (int e : {1, 2}) expect_same_moments(s.env(e), tilde.env(e), 6, 1e-9);
    const double shift = std::abs(tilde.env1.beta - s.env1.beta);
    EXPECT_NEAR(shift, std::abs(s.env1.gamma / s.env1.alpha), 1e-12);
    EXPECT_GT(shift, 0.0);
  }
}

TEST(Scenario, ValidateFlagsUndeclaredChanges) {
  fixtures::Gen g(6);
  for (auto change : fixtures::single_changes()) {
    EXPECT_TRUE(validate(g.standard_scenario(change)).empty()) << change_name(change);
  }
  auto s = g.standard_scenario(ChangeKind::Gamma);
  s.env2.beta += 0.1;
  EXPECT_FALSE(validate(s).empty());
  s = g.standard_scenario(ChangeKind::EpsT);
  s.env2.alpha += 0.1;
  EXPECT_FALSE(validate(s).empty());
}

TEST(Scenario, ChangeNamesRoundTrip) {
  for (auto c : {ChangeKind::EpsT, ChangeKind::EpsU, ChangeKind::Gamma, ChangeKind::Alpha,
                 ChangeKind::EpsY, ChangeKind::EpsTAndEpsU}) {
    EXPECT_EQ(parse_change(change_name(c)), c);
  }
  EXPECT_THROW(parse_change("beta"), Error);
}
