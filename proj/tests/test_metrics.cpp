#include <gtest/gtest.h>

#include <cmath>

#include "okl/metrics.hpp"
#include "okl/random.hpp"
#include "okl/verify.hpp"

using namespace okl;

namespace {

SymplecticPotential smooth(std::uint64_t seed, std::size_t n) {
  RoughnessParams p;
  p.amplitude = 0.3;
  p.min_width = 0.1;
  return random_potential(seed, p, n);
}

}  // namespace

TEST(Metrics, DistanceToShiftIsTheShift) {
  const auto u = smooth(1, 512);
  for (double p : {1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(d_p(u, shifted(u, -0.6), p), 0.6, 1e-12);
  EXPECT_NEAR(d_chi(u, shifted(u, 0.6), mollify(make_power_weight(1.5), 8)), 0.6, 1e-11);
}

TEST(Metrics, BasicAxioms) {
  const auto a = smooth(2, 512), b = smooth(3, 512), c = smooth(4, 512);
  const auto w = make_power_weight(1.5);
  EXPECT_EQ(d_chi(a, a, w), 0.0);
  EXPECT_DOUBLE_EQ(d_chi(a, b, w), d_chi(b, a, w));
  EXPECT_LE(d_chi(a, c, w), d_chi(a, b, w) + d_chi(b, c, w) + 1e-12);
}

TEST(Metrics, DistancesIncreaseWithP) {
  const auto a = smooth(5, 512), b = smooth(6, 512);
  EXPECT_LE(d_p(a, b, 1.0), d_p(a, b, 2.0) + 1e-14);
  EXPECT_LE(d_p(a, b, 2.0), d_p(a, b, 3.0) + 1e-14);
}

TEST(Metrics, AmOfShift) {
  const auto u = smooth(7, 1024);
  EXPECT_NEAR(am_energy_dual(shifted(u, 0.3)) - am_energy_dual(u), 0.3, 1e-14);
  EXPECT_NEAR(am_energy(shifted(u, 0.3)) - am_energy(u), 0.3, 1e-10);
  EXPECT_NEAR(am_energy_dual(renormalize(u)), 0.0, 1e-14);
}

TEST(Metrics, AmPrimaryAgreesWithDual) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto u = random_potential(s, {}, 2048);
    EXPECT_NEAR(am_energy(u), am_energy_dual(u), 1e-6) << s;
  }
}

TEST(Metrics, D1IsAmDifferenceForOrderedPair) {
  // u0 ≤ u1 ⇒ d_1(u0,u1) = AM(u1) − AM(u0)
  const auto a = smooth(8, 1024), b = smooth(9, 1024);
  const auto P = rooftop(a, b);
  EXPECT_NEAR(d_p(P, a, 1.0), am_energy_dual(a) - am_energy_dual(P), 1e-12);
}

TEST(Metrics, IEnergyNonnegative) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_potential(2 * s, {}, 512), b = random_potential(2 * s + 1, {}, 512);
    EXPECT_GE(i_energy(a, b), -1e-9);
    EXPECT_NEAR(i_energy(a, a), 0.0, 1e-14);
  }
}

TEST(Metrics, IChiEnergyOfShift) {
  const auto u = smooth(10, 512);
  EXPECT_NEAR(i_chi_energy(u, shifted(u, 0.2), make_power_weight(2.0)), 0.4, 1e-11);
}

TEST(Metrics, EChiEnergyTwoQuadraturesAgree) {
  const auto w = make_power_weight(2.0);
  EXPECT_NEAR(e_chi_energy(SymplecticPotential::zero(256), w), 0.0, 1e-15);
  const auto u = shifted(smooth(11, 2048), 0.5);
  EXPECT_NEAR(e_chi_energy(u, w), e_chi_energy_fiber(u, w), 1e-3 * std::abs(e_chi_energy(u, w)));
}

TEST(Metrics, SupPrimal) {
  EXPECT_NEAR(sup_primal(SymplecticPotential::zero(256)), 0.0, 1e-12);
  const auto u = smooth(12, 512);
  EXPECT_NEAR(sup_primal(shifted(u, 1.25)) - sup_primal(u), 1.25, 1e-12);
}

TEST(Metrics, RicciPotentialIsConstantForRoundMetric) {
  const auto h = ricci_potential(2048);
  EXPECT_LE(h.oscillation(), 1e-6);
  EXPECT_LE(h.cohomology_defect, 1e-6);
}

TEST(Metrics, DingAndJAtZero) {
  const auto h = ricci_potential(512);
  const auto fj = ding_and_j(SymplecticPotential::zero(512), h);
  EXPECT_NEAR(fj.F, 0.0, 1e-12);
  EXPECT_NEAR(fj.J, 0.0, 1e-12);
  EXPECT_THROW(ding_and_j(shifted(SymplecticPotential::zero(512), 1.0), h), DomainError);
}

TEST(Metrics, JensenBound) {
  // 𝓕 ≤ 𝓙 − ∫h dω
  const auto h = ricci_potential(1024);
  for (const auto& u : normalized_samples(20, 3, 1, 1024)) {
    const auto fj = ding_and_j(u, h);
    EXPECT_LE(fj.F, fj.J - detail::ricci_level(h) + 1e-10);
  }
}

TEST(Metrics, SupControl) {
  const double c = sup_control_constant();
  EXPECT_GT(c, 0.0);
  const auto h = ricci_potential(1024);
  for (const auto& u : normalized_samples(20, 4, 1, 1024)) {
    const auto fj = ding_and_j(u, h);
    const double s = sup_primal(u);
    EXPECT_LE(fj.J, s + 1e-9);
    EXPECT_LE(s - c, fj.J + 1e-9);
  }
}

TEST(Metrics, PythagoreanFormulas) {
  const auto a = smooth(13, 2048), b = smooth(14, 2048);
  const auto r1 = d_p_pythagoras_check(a, b, 1.0);
  const auto r2 = d_p_pythagoras_check(a, b, 2.0);
  EXPECT_LE(r1.defect, 1e-4);
  EXPECT_LE(r1.am_defect, 1e-4);
  EXPECT_LE(r2.defect, 1e-4);
  EXPECT_THROW(d_p_pythagoras_check(a, b, 0.5), DomainError);
}

TEST(Metrics, InequalityBatteryOnSmallRun) {
  for (const auto& nw : battery_weights())
    for (const auto& r : verify_metrics_for(nw, 10, 99, 512))
      EXPECT_TRUE(r.pass()) << r.property << ' ' << r.weight << " worst " << r.worst;
}
