#include <gtest/gtest.h>

#include <cmath>

#include "okl/flow.hpp"
#include "okl/random.hpp"

using namespace okl;

namespace {

constexpr std::size_t kGrid = 512;

SymplecticPotential even_start(std::uint64_t seed, std::size_t n = kGrid) {
  RoughnessParams p;
  p.amplitude = 0.3;
  p.min_width = 0.1;
  p.even = true;
  return renormalize(random_potential(seed, p, n));
}

FlowConfig config(const SymplecticPotential& u, double t_end) {
  FlowConfig c;
  c.initial = u;
  c.t_end = t_end;
  c.ricci = ricci_potential(u.size());
  c.reference_ke = SymplecticPotential::zero(u.size());
  return c;
}

double sup_diff_minus_mean(const SymplecticPotential& a, const SymplecticPotential& b) {
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(a.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i] - mean));
  return m;
}

}  // namespace

TEST(Flow, KahlerEinsteinIsFixedPoint) {
  const auto z = SymplecticPotential::zero(kGrid);
  auto cfg = config(z, 1.0);
  const auto s1 = ricci_step(initial_state(cfg), cfg);
  double m = 0.0;
  for (std::size_t i = 0; i < kGrid; ++i) m = std::max(m, std::abs(s1.potential[i]));
  EXPECT_LE(m, 1e-8);
  EXPECT_LE(s1.diagnostics.sup_rdot, 1e-8);
}

TEST(Flow, TEndZeroIsInitialState) {
  const auto u = even_start(1);
  const auto run = run_flow(config(u, 0.0));
  ASSERT_EQ(run.trajectory.size(), 1u);
  EXPECT_EQ(run.trajectory[0].potential.values(), u.values());
}

TEST(Flow, ShiftInvarianceUnderAmZero) {
  const auto u = even_start(2);
  auto a = config(u, 1.0);
  auto b = a;
  b.initial = renormalize(shifted(u, 0.8));
  const auto ra = run_flow(a), rb = run_flow(b);
  EXPECT_LE(sup_diff_minus_mean(ra.trajectory.back().potential, rb.trajectory.back().potential), 1e-12);
  for (std::size_t i = 0; i < kGrid; ++i)
    ASSERT_NEAR(ra.trajectory.back().potential[i], rb.trajectory.back().potential[i], 1e-12);
}

TEST(Flow, ConvexityAndNormalizationPreserved) {
  const auto run = run_flow(config(even_start(3), 5.0));
  for (const auto& s : run.trajectory) {
    EXPECT_TRUE(s.potential.valid());
    EXPECT_LE(std::abs(s.diagnostics.am), 1e-8);
  }
  EXPECT_LE(run.summary.max_am_drift, 1e-8);
  EXPECT_TRUE(run.summary.ding_monotone);
}

TEST(Flow, MassNormalization) {
  auto cfg = config(even_start(4), 3.0);
  cfg.normalization = Normalization::mass_one;
  const auto run = run_flow(cfg);
  EXPECT_LE(run.summary.max_mass_defect, 1e-8);
}

TEST(Flow, NormalizationsAgreeModuloConstants) {
  auto a = config(even_start(5), 4.0);
  auto b = a;
  b.normalization = Normalization::mass_one;
  const auto ra = run_flow(a), rb = run_flow(b);
  ASSERT_EQ(ra.trajectory.size(), rb.trajectory.size());
  for (std::size_t k = 0; k < ra.trajectory.size(); ++k)
    ASSERT_LE(sup_diff_minus_mean(ra.trajectory[k].potential, rb.trajectory[k].potential), 1e-6) << k;
}

TEST(Flow, ExponentialDecayAndConvergence) {
  const auto run = run_flow(config(even_start(6), 20.0));
  EXPECT_LT(run.summary.decay.rate, 0.0);
  EXPECT_GE(run.summary.decay.r_squared, 0.99);
  ASSERT_TRUE(run.summary.final_d1);
  EXPECT_LE(*run.summary.final_d1, 1e-4);
}

TEST(Flow, DecayRateStableUnderDtHalving) {
  auto a = config(even_start(7), 10.0);
  auto b = a;
  b.dt = a.dt / 2;
  const double ra = run_flow(a).summary.decay.rate, rb = run_flow(b).summary.decay.rate;
  EXPECT_NEAR(rb / ra, 1.0, 0.2) << ra << ' ' << rb;
}

TEST(Flow, TwoStartsShareTheLimit) {
  const auto ra = run_flow(config(even_start(8), 20.0));
  const auto rb = run_flow(config(even_start(9), 20.0));
  EXPECT_LE(d_p(ra.trajectory.back().potential, rb.trajectory.back().potential, 1.0), 1e-4);
}

TEST(Flow, RejectsBadConfig) {
  auto cfg = config(even_start(10), 1.0);
  cfg.dt = 0.0;
  EXPECT_THROW(initial_state(cfg), DomainError);
  cfg = config(shifted(even_start(10), 0.1), 1.0);
  EXPECT_THROW(initial_state(cfg), DomainError);
}

TEST(Flow, NewtonFailureAborts) {
  auto cfg = config(even_start(11), 1.0);
  cfg.max_newton = 0;
  cfg.max_halvings = 2;
  EXPECT_THROW(ricci_step(initial_state(cfg), cfg), NumericalError);
}

TEST(Flow, DecayFitOnExactExponential) {
  std::vector<double> t, y;
  for (int k = 0; k < 50; ++k) {
    t.push_back(0.1 * k);
    y.push_back(3.0 * std::exp(-2.5 * t.back()));
  }
  const auto f = fit_log_decay(t, y);
  EXPECT_NEAR(f.rate, -2.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Stability, ConvergentFlowIsCauchy) {
  const auto run = run_flow(config(even_start(12), 20.0));
  const auto rep = stability_probe(run.trajectory, make_power_weight(2.0));
  EXPECT_EQ(rep.verdict, StabilityVerdict::cauchy);
  EXPECT_LE(rep.tail_max, 1e-4);
  EXPECT_NE(rep.message.find("no divergence observed"), std::string::npos);
}

TEST(Stability, StationaryTrajectory) {
  const auto z = SymplecticPotential::zero(256);
  std::vector<SymplecticPotential> path(10, z);
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(k);
  const auto rep = stability_probe(path, t, make_power_weight(1.0));
  for (const auto& row : rep.pairwise)
    for (double d : row) EXPECT_LE(d, 1e-8);
  EXPECT_EQ(rep.verdict, StabilityVerdict::cauchy);
}

TEST(Stability, LinearFamilyDiverges) {
  // u_t = t·v, so d_χ(u_0,u_t) = t·d_χ(0,v); v has convex dual perturbation so every u_t is admissible
  const auto v = SymplecticPotential::sample(256, [](double y) { return (y - 0.3) * (y - 0.3); });
  std::vector<SymplecticPotential> path;
  std::vector<double> t;
  for (int k = 0; k < 20; ++k) {
    path.push_back(SymplecticPotential::sample(256, [k](double y) { return k * (y - 0.3) * (y - 0.3); }));
    t.push_back(k);
  }
  const auto w = make_power_weight(2.0);
  const auto rep = stability_probe(path, t, w);
  EXPECT_EQ(rep.verdict, StabilityVerdict::diverging);
  const double d1 = d_chi(SymplecticPotential::zero(256), v, w);
  EXPECT_NEAR(rep.pairwise[0].back(), rep.times.back() * d1, 1e-9 * rep.times.back());
}

TEST(Ding, ZeroPotentialIsTrivial) {
  const auto h = ricci_potential(512);
  const auto p = ding_point(SymplecticPotential::zero(512), h);
  EXPECT_NEAR(p.d1, 0.0, 1e-14);
  EXPECT_NEAR(p.F, 0.0, 1e-12);
  EXPECT_NEAR(p.J, 0.0, 1e-12);
}

TEST(Ding, StretchingFamilyGrowsInBoth) {
  // u_s = renormalized s·v: 𝓙 and d_1 grow together
  const auto h = ricci_potential(512);
  double prev_j = -1.0, prev_d = -1.0;
  for (double s : {1.0, 4.0, 16.0, 64.0}) {
    const auto u = SymplecticPotential::sample(512, [s](double y) { return s * (y - 0.5) * (y - 0.5); });
    const auto p = ding_point(renormalize(u), h);
    EXPECT_GT(p.J, prev_j);
    EXPECT_GT(p.d1, prev_d);
    prev_j = p.J;
    prev_d = p.d1;
  }
  EXPECT_GT(prev_d, 1.0);
}
