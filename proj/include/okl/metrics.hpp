#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "okl/orlicz.hpp"
#include "okl/toric.hpp"
#include "okl/weights.hpp"

namespace okl {

struct EnergyReport {
  std::string name;
  double value = 0.0;
  std::size_t grid_resolution = 0;
};

/// AM(u) = ½(∫u dω + ∫u dω_u), both integrals sampled at the reference fiber nodes.
inline double am_energy(const SymplecticPotential& u) {
  const std::size_t n = u.size();
  const double a = fiber_integral_reference(n, [&](double s) { return u.kahler_at(s); });
  const double b = fiber_integral(u, [](double s, const LegendrePoint& pt) { return pt.value - softplus(s); });
  return 0.5 * (a + b);
}

/// AM(u) = ∫_P (0* − u*) dy.
inline double am_energy_dual(const SymplecticPotential& u) {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return -s / static_cast<double>(u.size());
}

/// u − AM(u).
inline SymplecticPotential renormalize(const SymplecticPotential& u) { return shifted(u, -am_energy_dual(u)); }

inline std::vector<double> geodesic_tangent(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  return weak_geodesic(u0, u1).tangent(0.0);
}

template <OrliczWeight W>
double d_chi(const SymplecticPotential& u0, const SymplecticPotential& u1, const W& w) {
  require_same_grid(u0, u1);
  return gauge_norm(geodesic_tangent(u0, u1), w, DiscreteMeasure::uniform_midpoint(u0.size()));
}

inline double d_p(const SymplecticPotential& u0, const SymplecticPotential& u1, double p) {
  return d_chi(u0, u1, make_power_weight(p));
}

/// ‖u1 − u0‖_{χ,u0}.
template <OrliczWeight W>
double norm_at(const SymplecticPotential& base, const SymplecticPotential& other, const W& w) {
  return gauge_norm(difference_in_moment_coords(base, other), w, DiscreteMeasure::uniform_midpoint(base.size()));
}

template <OrliczWeight W>
double i_chi_energy(const SymplecticPotential& u0, const SymplecticPotential& u1, const W& w) {
  return norm_at(u0, u1, w) + norm_at(u1, u0, w);
}

/// ∫(u0 − u1)(dω_{u1} − dω_{u0}).
inline double i_energy(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  const auto a = difference_in_moment_coords(u1, u0);  // u0 − u1 in u1-coordinates
  const auto b = difference_in_moment_coords(u0, u1);  // u1 − u0 in u0-coordinates
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] + b[i];
  return s / static_cast<double>(a.size());
}

/// χ̃(l) = −χ(l) for l ≤ 0, 0 otherwise.
template <OrliczWeight W>
double chi_tilde(const W& w, double l) {
  return l <= 0.0 ? -w(l) : 0.0;
}

template <OrliczWeight W>
double e_chi_energy(const SymplecticPotential& u, const W& w) {
  const auto self = self_in_moment_coords(u);
  double s = 0.0;
  for (double x : self) s += chi_tilde(w, x);
  return s / static_cast<double>(self.size());
}

/// Same integral by fiber quadrature against the MA density.
template <OrliczWeight W>
double e_chi_energy_fiber(const SymplecticPotential& u, const W& w) {
  return fiber_integral(u, [&](double s, const LegendrePoint& pt) { return chi_tilde(w, pt.value - softplus(s)); });
}

/// sup_X u, including the two poles (s → ±∞).
inline double sup_primal(const SymplecticPotential& u) {
  const std::size_t n = u.size();
  const double at0 = -(u[0] - u.dv(0) * u.y(0));
  const double at1 = -(u[n - 1] + u.dv(n - 1) * (1.0 - u.y(n - 1)));
  double m = std::max(at0, at1);
  for (std::size_t j = 0; j < n; ++j) m = std::max(m, u.kahler_at(logit(grid_node(j, n))));
  return m;
}

/// Ricci potential of Fubini–Study in the reduced model: Ric ω = λω + i∂∂̄h with λ = 2 for the
/// unit moment interval. In fiber coordinates h = −log φ_ref'' − λ φ_ref + κ s, where κ removes
/// the linear growth; h is normalized so that ∫e^h dω = 1.
struct RicciPotential {
  std::vector<double> fiber;
  std::vector<double> values;
  double lambda = 2.0;
  double cohomology_defect = 0.0;  // mismatch of the asymptotic slopes of h

  double at(double s) const {
    if (s <= fiber.front()) return values.front();
    if (s >= fiber.back()) return values.back();
    const auto it = std::upper_bound(fiber.begin(), fiber.end(), s);
    const std::size_t j = static_cast<std::size_t>(it - fiber.begin());
    const double t = (s - fiber[j - 1]) / (fiber[j] - fiber[j - 1]);
    return (1.0 - t) * values[j - 1] + t * values[j];
  }
  double oscillation() const {
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= static_cast<double>(values.size());
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x - mean));
    return m;
  }
};

inline RicciPotential ricci_potential(std::size_t n, double lambda = 2.0) {
  RicciPotential r;
  r.lambda = lambda;
  r.fiber = fiber_nodes(n);
  std::vector<double> raw(n);
  for (std::size_t j = 0; j < n; ++j) raw[j] = -std::log(rho_ref(r.fiber[j])) - lambda * softplus(r.fiber[j]);
  const double left = (raw[1] - raw[0]) / (r.fiber[1] - r.fiber[0]);
  const double right = (raw[n - 1] - raw[n - 2]) / (r.fiber[n - 1] - r.fiber[n - 2]);
  const double kappa = -left;
  r.cohomology_defect = std::abs(right - left);
  r.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) r.values[j] = raw[j] + kappa * r.fiber[j];
  double mx = *std::max_element(r.values.begin(), r.values.end());
  double acc = 0.0;
  for (double x : r.values) acc += std::exp(x - mx);
  const double logmass = mx + std::log(acc / static_cast<double>(n));
  for (double& x : r.values) x -= logmass;
  return r;
}

struct DingJ {
  double F = 0.0;
  double J = 0.0;
};

/// 𝓕(u) = −log ∫e^{−u+h}dω and 𝓙(u) = ∫u dω, for AM-normalized u.
inline DingJ ding_and_j(const SymplecticPotential& u, const RicciPotential& h) {
  if (std::abs(am_energy_dual(u)) > 1e-8) throw DomainError("ding_and_j: potential must satisfy AM(u) = 0");
  const std::size_t n = u.size();
  std::vector<double> e(n);
  double J = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = logit(grid_node(j, n));
    const double uj = u.kahler_at(s);
    J += uj;
    e[j] = -uj + h.at(s);
  }
  const double mx = *std::max_element(e.begin(), e.end());
  double acc = 0.0;
  for (double x : e) acc += std::exp(x - mx);
  return {-(mx + std::log(acc / static_cast<double>(n))), J / static_cast<double>(n)};
}

/// C′ with sup u − C′ ≤ ∫u dω for every ω-psh u: the worst case is a supporting line ℓ of
/// log(1+e^s), giving C′ = sup over tangency points of ∫(log(1+e^s) − ℓ) dω.
inline double sup_control_constant(std::size_t n = 4096) {
  double best = 0.0;
  const auto s = fiber_nodes(n);
  auto excess = [&](double s0, double m, double c) {
    double acc = 0.0;
    for (double x : s) acc += softplus(x) - (c + m * (x - s0));
    return acc / static_cast<double>(n);
  };
  for (int k = -400; k <= 400; ++k) {
    const double s0 = k / 20.0;
    best = std::max(best, excess(s0, sigmoid(s0), softplus(s0)));
  }
  best = std::max(best, excess(0.0, 0.0, 0.0));  // tangency at s = −∞: ℓ ≡ 0
  best = std::max(best, excess(0.0, 1.0, 0.0));  // tangency at s = +∞: ℓ = s
  return best;
}

struct PythagorasReport {
  double lhs = 0.0;          // d_p(u0,u1)^p
  double rhs = 0.0;          // d_p(u0,P)^p + d_p(u1,P)^p
  double defect = 0.0;       // |lhs − rhs| / lhs
  double am_formula = 0.0;   // AM(u0) + AM(u1) − 2AM(P), p = 1 only
  double am_defect = 0.0;    // |d_1 − am_formula| / d_1
};

/// The rooftop P enters through its primal definition (fiber-grid envelope of min(u0,u1)),
/// AM through its fiber-quadrature formula.
inline PythagorasReport d_p_pythagoras_check(const SymplecticPotential& u0, const SymplecticPotential& u1, double p) {
  if (!(p >= 1.0)) throw DomainError("pythagoras: p >= 1");
  const auto P = rooftop_primal(u0, u1);
  PythagorasReport r;
  r.lhs = std::pow(d_p(u0, u1, p), p);
  r.rhs = std::pow(d_p(u0, P, p), p) + std::pow(d_p(u1, P, p), p);
  r.defect = r.lhs > 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : std::abs(r.rhs);
  if (p == 1.0) {
    r.am_formula = am_energy(u0) + am_energy(u1) - 2.0 * am_energy(P);
    r.am_defect = r.lhs > 0.0 ? std::abs(r.lhs - r.am_formula) / r.lhs : std::abs(r.am_formula);
  }
  return r;
}

}  // namespace okl
