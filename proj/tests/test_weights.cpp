#include <gtest/gtest.h>

#include <cmath>

#include "okl/random.hpp"
#include "okl/weights.hpp"

using namespace okl;

TEST(Weights, PowerValues) {
  const auto w3 = make_power_weight(3.0);
  EXPECT_DOUBLE_EQ(w3(2.0), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(w3(-2.0), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(make_power_weight(1.0)(-0.7), 0.7);
  EXPECT_DOUBLE_EQ(make_power_weight(2.0).chi_one(), 0.5);
  EXPECT_EQ(w3.growth_exponent(), 3.0);
}

TEST(Weights, RejectsSubLinearExponent) {
  EXPECT_THROW(make_power_weight(0.5), DomainError);
  EXPECT_THROW(make_power_weight(std::nan("")), DomainError);
}

TEST(Weights, PowerWeightsValidate) {
  for (double p : {1.0, 1.25, 1.5, 2.0, 3.0, 7.0}) {
    const auto r = validate(make_power_weight(p));
    EXPECT_TRUE(r.ok()) << "p=" << p;
  }
}

TEST(Weights, NormalizationSubgradient) {
  // 1 ∈ ∂χ(1): both one-sided derivatives bracket 1
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    const auto w = make_power_weight(p);
    EXPECT_NEAR(w.derivative(1.0), 1.0, 1e-15);
  }
}

TEST(Weights, MollifiedIsSmoothYoungWeight) {
  for (double p : {1.0, 1.5}) {
    const auto m = mollify(make_power_weight(p), 8);
    EXPECT_TRUE(m.smooth());
    const auto r = validate(m);
    EXPECT_LE(r.zero, 1e-12);
    EXPECT_LE(r.evenness, 1e-12);
    EXPECT_LE(r.convexity, 1e-10);
    EXPECT_LE(r.normalization, 1e-10) << "p=" << p;
    EXPECT_LE(r.growth, 1e-10);
    EXPECT_GT(m.second_derivative(0.0), 0.0);
    EXPECT_TRUE(std::isfinite(m.second_derivative(0.0)));
  }
}

TEST(Weights, MollifiedApproachesBase) {
  // normalized χ_k → χ locally uniformly as k grows
  const auto base = make_power_weight(1.5);
  double prev = kInf;
  for (int k : {2, 8, 32}) {
    const auto m = mollify(base, k);
    double err = 0.0;
    for (double l = 0.0; l <= 3.0; l += 0.125) err = std::max(err, std::abs(m(l) - base(l)));
    EXPECT_LT(err, prev) << "k=" << k;
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Weights, MollifyRejectsBadK) { EXPECT_THROW(mollify(make_power_weight(2.0), 0), DomainError); }

TEST(Weights, GrowthSandwich) {
  const auto samples = log_samples(1e-3, 1e3, 200);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double eps : {0.1, 0.5, 0.9}) {
      const auto r = check_growth_sandwich(make_power_weight(p), eps, samples);
      EXPECT_EQ(r.violations, 0u) << "p=" << p << " eps=" << eps;
    }
  const auto m = mollify(make_power_weight(1.5), 8);
  EXPECT_EQ(check_growth_sandwich(m, 0.3, samples).violations, 0u);
}

TEST(Weights, ConjugateClosedForms) {
  const auto c2 = conjugate(make_power_weight(2.0));
  ASSERT_TRUE(c2.closed_form());
  EXPECT_DOUBLE_EQ(*c2.closed_form(), 2.0);
  EXPECT_DOUBLE_EQ(c2(3.0), 4.5);

  const auto c3 = conjugate(make_power_weight(3.0));
  EXPECT_NEAR(*c3.closed_form(), 1.5, 1e-15);
  EXPECT_NEAR(c3(2.0), std::pow(2.0, 1.5) / 1.5, 1e-14);

  const auto c1 = conjugate(make_power_weight(1.0));
  EXPECT_TRUE(c1.indicator());
  EXPECT_EQ(c1(0.5), 0.0);
  EXPECT_EQ(c1(1.0), 0.0);
  EXPECT_TRUE(std::isinf(c1(1.5)));
}

TEST(Weights, NumericConjugateMatchesDirectSup) {
  const auto m = mollify(make_power_weight(1.5), 8);
  const auto c = conjugate(m);
  EXPECT_EQ(c.form(), ConjugateWeight::Form::numeric);
  for (double h : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    double best = 0.0;
    for (double l = 0.0; l <= 200.0; l += 1e-3) best = std::max(best, l * h - m(l));
    EXPECT_NEAR(c(h), best, 1e-5 * std::max(1.0, best)) << "h=" << h;
  }
}

TEST(Weights, YoungInequalityProperty) {
  for (auto w : {make_power_weight(1.5), make_power_weight(3.0), mollify(make_power_weight(1.0), 8)}) {
    const auto c = conjugate(w);
    Rng rng(3);
    for (int k = 0; k < 300; ++k) {
      const double a = rng.uniform(-6.0, 6.0), b = rng.uniform(-3.0, 3.0);
      const double cb = c(b);
      if (std::isfinite(cb)) EXPECT_LE(a * b, w(a) + cb + 1e-8);
    }
  }
}

TEST(Weights, YoungEqualityOnSubgradient) {
  for (auto w : {make_power_weight(2.0), make_power_weight(1.5), mollify(make_power_weight(1.5), 8)}) {
    const auto c = conjugate(w);
    for (double a : {0.2, 0.9, 1.0, 2.5}) {
      const double d = w.derivative(a);
      EXPECT_NEAR(w(a) + c(d), a * d, 1e-8 * std::max(1.0, a * d));
    }
  }
}
