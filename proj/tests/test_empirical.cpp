#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "momentid/empirical.hpp"
#include "momentid/errors.hpp"

using namespace momentid;

TEST(MixedMoment, ConstantPairs) {
  const std::vector<double> t{1.0, 1.0}, y{2.0, 2.0};
  const auto e = mixed_moment(t, y, 1, 1);
  EXPECT_EQ(e.value, 2.0);
  EXPECT_EQ(e.se, 0.0);
  EXPECT_EQ(e.n, 2u);
  const std::vector<double> t2{1.0, -1.0}, y2{1.0, 1.0};
  EXPECT_EQ(mixed_moment(t2, y2, 2, 0).value, 1.0);
}

TEST(MixedMoment, RejectsBadInput) {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{1.0, 2.0};
  EXPECT_THROW(mixed_moment(a, b, 1, 1), Error);
  const std::vector<double> one{1.0};
  EXPECT_THROW(mixed_moment(one, one, 1, 0), Error);
  const std::vector<double> bad{1.0, NAN};
  EXPECT_THROW(mixed_moment(bad, bad, 1, 0), Error);
  EXPECT_THROW(mixed_moment(a, a, 10, 10), Error);
}

TEST(MixedMoment, ExponentialThirdMoment) {
  const auto t = sample(NoiseSpec::exponential(1.0), 1000000, 9);
  const auto e = mixed_moment(t, t, 3, 0);
  EXPECT_LE(std::abs(e.value - 2.0), 5.0 * e.se);
}

TEST(MixedMoment, ScalesByPowerOfTwo) {
  fixtures::Gen g(1);
  for (int i = 0; i < 20; ++i) {
    auto t = sample(g.noise(), 200, 10 + i);
    const auto y = sample(g.noise(), 200, 100 + i);
    const int p = g.integer(0, 4), q = g.integer(0, 3);
    // Powers of two keep the rescaling exact in floating point.
    const double c = std::ldexp(1.0, g.integer(-3, 3));
    const double base = mixed_moment(t, y, p, q).value;
    for (auto& v : t) v *= c;
    EXPECT_EQ(mixed_moment(t, y, p, q).value, std::pow(c, p) * base);
  }
}

TEST(MixedMoment, MatchesOracleAtLargeN) {
  ScmParams p;
  p.alpha = 0.5;
  p.beta = 0.6;
  p.gamma = 0.9;
  p.noise_u = NoiseSpec::exponential(1.0);
  p.noise_t = NoiseSpec::exponential(1.1);
  p.noise_y = NoiseSpec::exponential(0.9);
  const std::size_t n = 1000000;
  const auto u = sample(p.noise_u, n, 1), et = sample(p.noise_t, n, 2), ey = sample(p.noise_y, n, 3);
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = p.alpha * u[i] + et[i];
    y[i] = p.beta * t[i] + p.gamma * u[i] + ey[i];
  }
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b) {
      if (a + b == 0) continue;
      const auto e = mixed_moment(t, y, a, b);
      EXPECT_LE(std::abs(e.value - population_moment(p, a, b)), 5.0 * e.se) << a << "," << b;
    }
}

TEST(MomentDiffTest, Examples) {
  const MomentEstimate a{0.3, 0.01, 100};
  EXPECT_FALSE(moment_diff_test(a, a));
  EXPECT_TRUE(moment_diff_test({0.0, 0.01, 100}, {1.0, 0.01, 100}, 4.0));
  EXPECT_FALSE(moment_diff_test({0.0, 0.1, 100}, {0.3, 0.1, 100}, 4.0));
  EXPECT_FALSE(moment_diff_test({1.0, 0.0, 1}, {1.0 + 1e-12, 0.0, 1}));
}

TEST(MomentDiffTest, DetectsVarianceChange) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = sample(NoiseSpec::exponential(1.0), 100000, 2 * s + 1);
    const auto b = sample(NoiseSpec::exponential(0.5), 100000, 2 * s + 2);
    if (moment_diff_test(mixed_moment(a, a, 2, 0), mixed_moment(b, b, 2, 0))) ++hits;
  }
  EXPECT_GE(hits, 99);
}

TEST(JointCumulant, IndependentCrossTermVanishes) {
  const auto x = sample(NoiseSpec::exponential(1.0), 200000, 1);
  const auto y = sample(NoiseSpec::exponential(1.0), 200000, 2);
  const auto e = joint_cumulant(x, y, 1, 2);
  EXPECT_LE(std::abs(e.value), 5.0 * e.se);
  EXPECT_GT(e.se, 0.0);
}

TEST(JointCumulant, ExponentialThirdCumulant) {
  const auto x = sample(NoiseSpec::exponential(1.0), 1000000, 3);
  const auto e = joint_cumulant(x, x, 2, 1);
  EXPECT_LE(std::abs(e.value - 2.0), 5.0 * e.se);
}

TEST(JointCumulant, SharedComponentRatio) {
  const std::size_t n = 1000000;
  const auto s = sample(NoiseSpec::exponential(1.0), n, 4);
  const auto e1 = sample(NoiseSpec::uniform(1.0), n, 5);
  const auto e2 = sample(NoiseSpec::logistic(0.5), n, 6);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 2.0 * s[i] + e1[i];
    y[i] = s[i] + e2[i];
  }
  const double r = joint_cumulant(x, y, 1, 2).value / joint_cumulant(x, y, 2, 1).value;
  EXPECT_NEAR(r, 0.5, 0.02);
}

TEST(JointCumulant, ScalesMultilinearly) {
  auto x = sample(NoiseSpec::gumbel(1.0), 5000, 7);
  const auto y = sample(NoiseSpec::exponential(1.0), 5000, 8);
  for (auto& v : x) v += 0.5 * y[&v - x.data()];
  const double base = joint_cumulant(x, y, 2, 2).value;
  for (auto& v : x) v *= 2.0;
  EXPECT_NEAR(joint_cumulant(x, y, 2, 2).value, 4.0 * base, 1e-12 * std::abs(base));
  EXPECT_THROW(joint_cumulant(x, y, 1, 0), Error);
}

TEST(KsTest, Examples) {
  const auto a = sample(NoiseSpec::exponential(1.0), 100000, 1);
  EXPECT_FALSE(ks_two_sample(a, a));
  EXPECT_EQ(ks_two_sample_test(a, a).statistic, 0.0);
  const auto b = sample(NoiseSpec::exponential(0.5), 100000, 2);
  EXPECT_TRUE(ks_two_sample(a, b));
  EXPECT_THROW(ks_two_sample(a, std::vector<double>{}), Error);
  EXPECT_THROW(ks_two_sample(a, b, 1.0), Error);
}

TEST(KsTest, SizeUnderTheNull) {
  int rejections = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = sample(NoiseSpec::exponential(1.0), 100000, 1000 + 2 * s);
    const auto b = sample(NoiseSpec::exponential(1.0), 100000, 1001 + 2 * s);
    if (ks_two_sample(a, b, 0.01)) ++rejections;
  }
  // Expected 1 at the 1% level; P(Bin(100, 0.01) >= 5) is about 0.003.
  EXPECT_LE(rejections, 4);
}

TEST(KsTest, CriticalValueFormula) {
  const std::vector<double> a(400, 0.0), b(100, 1.0);
  const auto r = ks_two_sample_test(a, b, 0.05);
  EXPECT_EQ(r.statistic, 1.0);
  EXPECT_NEAR(r.critical, std::sqrt(-0.5 * std::log(0.025)) * std::sqrt(500.0 / 40000.0), 1e-12);
}

TEST(DecisionRule, Thresholds) {
  const DecisionRule rule;
  EXPECT_FALSE(rule.nonzero({0.0, 0.0, 1}));
  EXPECT_FALSE(rule.nonzero({5e-10, 0.0, 1}));
  EXPECT_TRUE(rule.nonzero({2e-9, 0.0, 1}));
  EXPECT_FALSE(rule.nonzero({1e-3, 0.0, 1}, 1e7));
  EXPECT_TRUE(rule.nonzero({0.5, 0.1, 1}));
  EXPECT_FALSE(rule.nonzero({0.39, 0.1, 1}));
  EXPECT_FALSE(rule.nonzero({-0.39, 0.1, 1}));
}

TEST(MomentSource, ExactSourceHasNoError) {
  ScmParams p;
  p.noise_t = NoiseSpec::exponential(1.0);
  const auto src = MomentSource::exact({population_table(p, 4)});
  EXPECT_TRUE(src.is_exact());
  EXPECT_EQ(src.degree(), 4);
  const auto e = src.evaluate([](const TableSet& t) { return t[0](3, 0); });
  EXPECT_NEAR(e.value, 2.0, 1e-12);
  EXPECT_EQ(e.se, 0.0);
}

TEST(MomentSource, JackknifeMatchesAnalyticError) {
  const auto t = sample(NoiseSpec::exponential(1.0), 400000, 11);
  const auto y = sample(NoiseSpec::gumbel(1.0), 400000, 12);
  const auto src = MomentSource::from_samples({{t, y}}, 4, 20);
  EXPECT_FALSE(src.is_exact());
  EXPECT_EQ(src.sample_count(), 400000u);
  const auto jk = src.evaluate([](const TableSet& s) { return s[0](1, 1); });
  const auto direct = mixed_moment(t, y, 1, 1);
  const double cov =
      direct.value - mixed_moment(t, y, 1, 0).value * mixed_moment(t, y, 0, 1).value;
  EXPECT_NEAR(jk.value, cov, 1e-12);
  // With 20 groups the jackknife se has about 16% relative noise.
  EXPECT_NEAR(jk.se / direct.se, 1.0, 0.5);
}

TEST(MomentSource, CentersEachSlot) {
  std::vector<double> t{1.0, 2.0, 3.0, 4.0}, y{10.0, 10.0, 12.0, 12.0};
  const auto src = MomentSource::from_samples({{t, y}}, 2, 2);
  EXPECT_NEAR(src.full()[0](1, 0), 0.0, 1e-15);
  EXPECT_NEAR(src.full()[0](0, 1), 0.0, 1e-15);
  EXPECT_NEAR(src.full()[0](2, 0), 1.25, 1e-15);
}
