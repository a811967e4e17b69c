#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "okl/measure.hpp"
#include "okl/orlicz.hpp"
#include "okl/random.hpp"
#include "support/oracles.hpp"

using namespace okl;

TEST(Measure, UniformMidpoint) {
  const auto mu = DiscreteMeasure::uniform_midpoint(4);
  EXPECT_TRUE(mu.probability());
  EXPECT_DOUBLE_EQ(mu.nodes()[0], 0.125);
  EXPECT_DOUBLE_EQ(mu.nodes()[3], 0.875);
  EXPECT_DOUBLE_EQ(mu.weights()[2], 0.25);
}

TEST(Measure, Trapezoid) {
  const auto mu = DiscreteMeasure::trapezoid(0.0, 1.0, 5);
  EXPECT_NEAR(mu.total_mass(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(mu.weights()[0], 0.125);
  const std::vector<double> x(mu.nodes().begin(), mu.nodes().end());
  EXPECT_NEAR(integrate(x, mu), 0.5, 1e-15);
}

TEST(Measure, RejectsBadInput) {
  EXPECT_THROW(DiscreteMeasure({0.0, 1.0}, {0.5, -0.1}), DomainError);
  EXPECT_THROW(DiscreteMeasure({0.5, 0.1}, {0.5, 0.5}), DomainError);
  EXPECT_THROW(DiscreteMeasure({0.0, 1.0}, {0.5, 0.6}, true), DomainError);
  EXPECT_THROW(DiscreteMeasure::uniform_midpoint(0), DomainError);
}

TEST(Measure, PushforwardKeepsMass) {
  const auto mu = DiscreteMeasure::uniform_midpoint(8);
  std::vector<double> T(8);
  for (std::size_t i = 0; i < 8; ++i) T[i] = std::exp(mu.nodes()[i]);
  const auto nu = pushforward(mu, T);
  EXPECT_NEAR(nu.total_mass(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(nu.nodes()[7], T[7]);
}

TEST(Orlicz, ZeroFunction) {
  const auto mu = DiscreteMeasure::uniform_midpoint(10);
  EXPECT_EQ(gauge_norm(std::vector<double>(10, 0.0), make_power_weight(2.0), mu), 0.0);
}

TEST(Orlicz, ConstantFunctionIsItsModulus) {
  const auto mu = DiscreteMeasure::uniform_midpoint(50);
  for (auto w : {make_power_weight(1.0), make_power_weight(2.5), mollify(make_power_weight(1.5), 8)})
    EXPECT_NEAR(gauge_norm(std::vector<double>(50, -3.0), w, mu), 3.0, 3e-12);
}

TEST(Orlicz, MatchesLpNormOracle) {
  Rng rng(11);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (int k = 0; k < 40; ++k) {
      const auto mu = random_measure(rng, 64);
      const auto f = random_samples(rng, 64);
      const double ref = oracle::lp_norm(f, mu.weights(), p);
      EXPECT_NEAR(gauge_norm(f, make_power_weight(p), mu), ref, 1e-10 * ref) << "p=" << p;
    }
}

TEST(Orlicz, IndicatorConjugateGivesSupNorm) {
  Rng rng(5);
  const auto mu = random_measure(rng, 30);
  const auto f = random_samples(rng, 30);
  EXPECT_DOUBLE_EQ(gauge_norm(f, conjugate(make_power_weight(1.0)), mu), oracle::sup_norm(f));
}

TEST(Orlicz, Homogeneity) {
  Rng rng(8);
  const auto mu = random_measure(rng, 40);
  const auto f = random_samples(rng, 40);
  const auto w = mollify(make_power_weight(1.5), 8);
  const double n1 = gauge_norm(f, w, mu);
  std::vector<double> g(f);
  for (double& x : g) x *= -7.5;
  EXPECT_NEAR(gauge_norm(g, w, mu), 7.5 * n1, 1e-11 * n1);
}

TEST(Orlicz, TriangleInequality) {
  Rng rng(9);
  const auto w = mollify(make_power_weight(1.0), 8);
  for (int k = 0; k < 30; ++k) {
    const auto mu = random_measure(rng, 32);
    const auto f = random_samples(rng, 32), g = random_samples(rng, 32);
    std::vector<double> s(32);
    for (std::size_t i = 0; i < 32; ++i) s[i] = f[i] + g[i];
    EXPECT_LE(gauge_norm(s, w, mu), gauge_norm(f, w, mu) + gauge_norm(g, w, mu) + 1e-10);
  }
}

TEST(Orlicz, SandwichHoldsAndIsAudited) {
  const long v0 = norm_audit::violations.load(), c0 = norm_audit::checked.load();
  Rng rng(12);
  for (auto w : {make_power_weight(1.5), make_power_weight(3.0), mollify(make_power_weight(1.5), 8)})
    for (int k = 0; k < 20; ++k) {
      const auto mu = random_measure(rng, 40);
      const auto r = gauge_norm_report(random_samples(rng, 40, 10.0), w, mu);
      EXPECT_LE(r.sandwich_excess, 1e-9);
      EXPECT_LE(r.lower, r.norm * (1 + 1e-12));
      EXPECT_GE(r.upper, r.norm * (1 - 1e-12));
    }
  EXPECT_EQ(norm_audit::checked.load() - c0, 60);
  EXPECT_EQ(norm_audit::violations.load(), v0);
}

TEST(Orlicz, RejectsBadInput) {
  const auto mu = DiscreteMeasure::uniform_midpoint(3);
  const auto w = make_power_weight(2.0);
  EXPECT_THROW(gauge_norm(std::vector<double>{1.0, 2.0}, w, mu), DomainError);
  EXPECT_THROW(gauge_norm(std::vector<double>{1.0, 2.0, NAN}, w, mu), DomainError);
  const DiscreteMeasure half({0.1, 0.2, 0.3}, {0.2, 0.2, 0.1});
  EXPECT_THROW(gauge_norm(std::vector<double>{1.0, 2.0, 3.0}, w, half), DomainError);
}

TEST(Orlicz, MHelpers) {
  auto [m, M] = mM_helpers(2.0, 0.5);
  EXPECT_DOUBLE_EQ(m, 0.25);
  EXPECT_DOUBLE_EQ(M, 0.5);
  std::tie(m, M) = mM_helpers(2.0, 3.0);
  EXPECT_DOUBLE_EQ(m, 3.0);
  EXPECT_DOUBLE_EQ(M, 9.0);
  EXPECT_THROW(mM_helpers(-1.0, 1.0), DomainError);
}

TEST(Orlicz, HolderProperty) {
  Rng rng(21);
  for (auto w : {make_power_weight(1.0), make_power_weight(2.0), mollify(make_power_weight(1.5), 8)}) {
    const auto c = conjugate(w);
    for (int k = 0; k < 40; ++k) {
      const auto mu = random_measure(rng, 24);
      const auto h = holder_pair(random_samples(rng, 24), random_samples(rng, 24), w, c, mu);
      EXPECT_LE(h.lhs, h.rhs + 1e-10);
    }
  }
}

TEST(Orlicz, HolderEqualityForL2) {
  // f = g attains equality in Cauchy–Schwarz
  Rng rng(2);
  const auto mu = random_measure(rng, 16);
  const auto f = random_samples(rng, 16);
  const auto h = holder_pair(f, f, make_power_weight(2.0), mu);
  EXPECT_NEAR(h.lhs, h.rhs, 1e-10 * h.rhs);
}
