#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "okl/convex.hpp"
#include "okl/error.hpp"
#include "okl/measure.hpp"

/// S¹-invariant potentials on ℂP¹. A Kähler potential u is φ_u(s) = log(1+e^s) + u(s) in the
/// fiber coordinate s = log|z|²; its symplectic potential is the Legendre dual U = φ_u* on the
/// moment interval [0,1]. We store v = U − g with g(y) = y log y + (1−y) log(1−y) the dual of
/// the Fubini–Study potential.
namespace okl {

inline double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

inline double logit(double y) { return std::log(y) - std::log1p(-y); }

/// Fubini–Study density φ_ref''(s) = σ(s)σ(−s).
inline double rho_ref(double s) { return sigmoid(s) * sigmoid(-s); }

inline double g_ref(double y) {
  const double a = y > 0.0 ? y * std::log(y) : 0.0;
  const double b = y < 1.0 ? (1.0 - y) * std::log1p(-y) : 0.0;
  return a + b;
}
inline double g_ref1(double y) { return logit(y); }
inline double g_ref2(double y) { return 1.0 / (y * (1.0 - y)); }

inline double grid_node(std::size_t i, std::size_t n) { return (static_cast<double>(i) + 0.5) / static_cast<double>(n); }

inline std::vector<double> grid_nodes(std::size_t n) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = grid_node(i, n);
  return y;
}

/// Fiber coordinates s_j = logit(y_j): points of X whose Fubini–Study moment is y_j.
inline std::vector<double> fiber_nodes(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = logit(grid_node(i, n));
  return s;
}

/// Point of the Legendre transform: φ(s) = sup_y (s y − U(y)), the maximizer y and U''(y).
struct LegendrePoint {
  double value = 0.0;
  double y = 0.0;
  double curvature = 0.0;
};

class SymplecticPotential {
 public:
  static constexpr std::size_t kDefaultGrid = 2048;

  explicit SymplecticPotential(std::vector<double> values) : v_(std::move(values)) {
    const std::size_t n = v_.size();
    if (n < 4) throw DomainError("potential: grid needs at least 4 nodes");
    for (double x : v_)
      if (!std::isfinite(x)) throw DomainError("potential: non-finite value");
    h_ = 1.0 / static_cast<double>(n);
    d_.resize(n);
    raw_.resize(n);
    s_.resize(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d_[i] = (v_[i + 1] - v_[i - 1]) / (2.0 * h_);
    d_[0] = (-3.0 * v_[0] + 4.0 * v_[1] - v_[2]) / (2.0 * h_);
    d_[n - 1] = (3.0 * v_[n - 1] - 4.0 * v_[n - 2] + v_[n - 3]) / (2.0 * h_);
    for (std::size_t i = 0; i < n; ++i) {
      raw_[i] = g_ref1(y(i)) + d_[i];
      s_[i] = i == 0 ? raw_[i] : std::max(raw_[i], s_[i - 1]);
    }
  }

  static SymplecticPotential zero(std::size_t n = kDefaultGrid) { return SymplecticPotential(std::vector<double>(n, 0.0)); }

  /// Samples v(y) at the grid nodes.
  template <class F>
  static SymplecticPotential sample(std::size_t n, F v) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v(grid_node(i, n));
    return SymplecticPotential(std::move(out));
  }

  /// From samples of the full dual U; U is replaced by its lower convex envelope.
  static SymplecticPotential from_dual(std::span<const double> U) {
    const auto y = grid_nodes(U.size());
    auto env = convex_envelope(y, U);
    for (std::size_t i = 0; i < env.size(); ++i) env[i] -= g_ref(y[i]);
    return SymplecticPotential(std::move(env));
  }

  std::size_t size() const { return v_.size(); }
  double h() const { return h_; }
  double y(std::size_t i) const { return grid_node(i, v_.size()); }
  const std::vector<double>& values() const { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }
  double dual(std::size_t i) const { return g_ref(y(i)) + v_[i]; }
  std::vector<double> duals() const {
    std::vector<double> U(size());
    for (std::size_t i = 0; i < size(); ++i) U[i] = dual(i);
    return U;
  }
  /// Finite-difference v'(y_i).
  double dv(std::size_t i) const { return d_[i]; }
  /// Moment map y ↦ s = U'(y) at the nodes, made nondecreasing.
  std::span<const double> slopes() const { return s_; }

  /// Largest violation of discrete convexity of U, 0 when convex.
  double convexity_defect() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < size(); ++i) worst = std::max(worst, -(dual(i + 1) - 2.0 * dual(i) + dual(i - 1)));
    return worst;
  }
  bool valid(double tol = 1e-9) const { return convexity_defect() <= tol; }

  /// Legendre transform of the continuous dual: cubic Hermite on interior cells, linear
  /// continuation of v on the two end cells.
  LegendrePoint legendre_at(double s) const {
    const std::size_t n = size();
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    if (it == s_.begin()) return end_cell(s, 0);
    std::size_t j = static_cast<std::size_t>(it - s_.begin()) - 1;
    while (j + 1 < n && raw_[j + 1] < s) ++j;
    if (j + 1 >= n) return end_cell(s, n - 1);
    if (raw_[j] == s) return {s * y(j) - dual(j), y(j), curvature_at(j, 0.0)};
    double lo = 0.0, hi = 1.0, t = 0.5;
    for (int it2 = 0; it2 < 100 && hi - lo > 1e-15; ++it2) {
      const double yy = y(j) + t * h_;
      const double f = g_ref1(yy) + hermite1(j, t) - s;
      if (f == 0.0) break;
      (f < 0.0 ? lo : hi) = t;
      const double fp = (g_ref2(yy) + hermite2(j, t)) * h_;
      double next = fp > 0.0 ? t - f / fp : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) < 1e-16) {
        t = next;
        break;
      }
      t = next;
    }
    const double yy = y(j) + t * h_;
    return {s * yy - g_ref(yy) - hermite0(j, t), yy, curvature_at(j, t)};
  }

  /// Primal samples u(s) = φ_u(s) − log(1+e^s).
  double kahler_at(double s) const { return legendre_at(s).value - softplus(s); }

  std::vector<double> primal(std::span<const double> s) const {
    std::vector<double> out(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) out[j] = kahler_at(s[j]);
    return out;
  }

 private:
  LegendrePoint end_cell(double s, std::size_t i) const {
    const double yy = sigmoid(s - d_[i]);
    const double val = s * yy - g_ref(yy) - (v_[i] + d_[i] * (yy - y(i)));
    return {val, yy, g_ref2(yy)};
  }
  double hermite0(std::size_t j, double t) const {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v_[j] + (t3 - 2 * t2 + t) * h_ * d_[j] + (-2 * t3 + 3 * t2) * v_[j + 1] +
           (t3 - t2) * h_ * d_[j + 1];
  }
  double hermite1(std::size_t j, double t) const {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * (v_[j] - v_[j + 1]) + (3 * t2 - 4 * t + 1) * h_ * d_[j] + (3 * t2 - 2 * t) * h_ * d_[j + 1]) / h_;
  }
  double hermite2(std::size_t j, double t) const {
    return ((12 * t - 6) * (v_[j] - v_[j + 1]) + (6 * t - 4) * h_ * d_[j] + (6 * t - 2) * h_ * d_[j + 1]) / (h_ * h_);
  }
  double curvature_at(std::size_t j, double t) const {
    if (j + 1 >= size()) return g_ref2(y(j));
    return g_ref2(y(j) + t * h_) + hermite2(j, t);
  }

  std::vector<double> v_, d_, raw_, s_;
  double h_ = 0.0;
};

inline void require_same_grid(const SymplecticPotential& a, const SymplecticPotential& b) {
  if (a.size() != b.size()) throw DomainError("potentials live on different grids");
}

inline SymplecticPotential shifted(const SymplecticPotential& u, double c) {
  auto v = u.values();
  for (double& x : v) x -= c;  // u + c has dual U − c
  return SymplecticPotential(std::move(v));
}

/// Moment-map pushforward of ω_u: Lebesgue probability on the grid plus the fiber coordinate of each node.
struct MomentMeasure {
  DiscreteMeasure measure;
  std::vector<double> fiber;
};

inline MomentMeasure ma_pushforward(const SymplecticPotential& u) {
  const auto s = u.slopes();
  return {DiscreteMeasure::uniform_midpoint(u.size()), std::vector<double>(s.begin(), s.end())};
}

/// (u_b − u_a) at the point of X with u_a-moment y_i, for every node.
inline std::vector<double> difference_in_moment_coords(const SymplecticPotential& a, const SymplecticPotential& b) {
  require_same_grid(a, b);
  const auto s = a.slopes();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = b.legendre_at(s[i]).value - a.legendre_at(s[i]).value;
  return out;
}

/// u itself in its own moment coordinates.
inline std::vector<double> self_in_moment_coords(const SymplecticPotential& u) {
  const auto s = u.slopes();
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u.legendre_at(s[i]).value - softplus(s[i]);
  return out;
}

/// ∫ F dω by sampling F at the reference fiber nodes (each carries ω-mass 1/n).
template <class F>
double fiber_integral_reference(std::size_t n, F f) {
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += f(logit(grid_node(j, n)));
  return sum / static_cast<double>(n);
}

/// ∫ F dω_u in fiber coordinates as the Stieltjes integral ∫F dφ_u' over the reference fiber
/// nodes (trapezoid rule), so point masses of ω_u at kinks of φ_u are captured. The tails
/// beyond the outer nodes carry F at the outer nodes.
template <class F>
double fiber_integral(const SymplecticPotential& u, F f) {
  const std::size_t n = u.size();
  double sum = 0.0, prev_f = 0.0, prev_y = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = logit(grid_node(j, n));
    const auto pt = u.legendre_at(s);
    const double fj = f(s, pt);
    sum += j == 0 ? fj * pt.y : 0.5 * (fj + prev_f) * (pt.y - prev_y);
    prev_f = fj;
    prev_y = pt.y;
  }
  return sum + prev_f * (1.0 - prev_y);
}

/// P(u0,u1)* = max(u0*, u1*).
inline SymplecticPotential rooftop(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  require_same_grid(u0, u1);
  std::vector<double> v(u0.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(u0[i], u1[i]);
  return SymplecticPotential(std::move(v));
}

/// max(u0,u1): its dual is the convex envelope of min(u0*, u1*).
inline SymplecticPotential max_potential(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  require_same_grid(u0, u1);
  std::vector<double> U(u0.size());
  for (std::size_t i = 0; i < U.size(); ++i) U[i] = std::min(u0.dual(i), u1.dual(i));
  return SymplecticPotential::from_dual(U);
}

/// Rooftop computed from its primal definition: the convex envelope in s of min(φ0, φ1)
/// sampled on the fiber grid, Legendre-transformed back to the moment grid.
inline SymplecticPotential rooftop_primal(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                          std::size_t fiber_refine = 1) {
  require_same_grid(u0, u1);
  const std::size_t n = u0.size();
  const std::size_t m = n * fiber_refine;
  const auto s = fiber_nodes(m);
  std::vector<double> phi(m);
  for (std::size_t j = 0; j < m; ++j) phi[j] = std::min(u0.legendre_at(s[j]).value, u1.legendre_at(s[j]).value);
  const auto y = grid_nodes(n);
  const auto back = legendre(s, phi, y);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = back.values[i] - g_ref(y[i]);
  return SymplecticPotential(std::move(v));
}

/// The potential (u0 + u1)/2 formed in primal coordinates.
inline SymplecticPotential primal_average(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  require_same_grid(u0, u1);
  const std::size_t n = u0.size();
  std::vector<double> U(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = u0.y(i);
    // φ_mid'(s) = (y0(s) + y1(s))/2 is nondecreasing; solve φ_mid'(s) = y_i
    double lo = std::min(u0.slopes()[i], u1.slopes()[i]) - 1.0;
    double hi = std::max(u0.slopes()[i], u1.slopes()[i]) + 1.0;
    auto grad = [&](double s) { return 0.5 * (u0.legendre_at(s).y + u1.legendre_at(s).y); };
    while (grad(lo) > yi) lo -= 2.0 * (hi - lo);
    while (grad(hi) < yi) hi += 2.0 * (hi - lo);
    // safeguarded Newton; dy/ds = 1/U'' for each potential
    double s = 0.5 * (lo + hi);
    for (int k = 0; k < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++k) {
      const auto p0 = u0.legendre_at(s), p1 = u1.legendre_at(s);
      const double f = 0.5 * (p0.y + p1.y) - yi;
      if (f == 0.0) break;
      (f < 0.0 ? lo : hi) = s;
      const double fp = 0.5 * (1.0 / p0.curvature + 1.0 / p1.curvature);
      double next = fp > 0.0 && std::isfinite(fp) ? s - f / fp : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(s))) {
        s = next;
        break;
      }
      s = next;
    }
    const double phi = 0.5 * (u0.legendre_at(s).value + u1.legendre_at(s).value);
    U[i] = s * yi - phi;
  }
  return SymplecticPotential::from_dual(U);
}

/// Dual-linear weak geodesic.
class GeodesicSegment {
 public:
  GeodesicSegment(SymplecticPotential u0, SymplecticPotential u1) : u0_(std::move(u0)), u1_(std::move(u1)) {
    require_same_grid(u0_, u1_);
  }
  SymplecticPotential operator()(double t) const {
    if (t == 0.0) return u0_;
    if (t == 1.0) return u1_;
    std::vector<double> v(u0_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * u0_[i] + t * u1_[i];
    return SymplecticPotential(std::move(v));
  }
  /// u̇_t in u_t-moment coordinates; the same function u0* − u1* for every t.
  std::vector<double> tangent(double /*t*/) const {
    std::vector<double> d(u0_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u0_[i] - u1_[i];
    return d;
  }
  const SymplecticPotential& start() const { return u0_; }
  const SymplecticPotential& end() const { return u1_; }

 private:
  SymplecticPotential u0_, u1_;
};

inline GeodesicSegment weak_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1) { return {u0, u1}; }

struct PartitionReport {
  double mass_u0 = 0.0;  // ω_{u0}({u0 = P})
  double mass_u1 = 0.0;  // ω_{u1}({u1 = P} \ {u0 = P})
  double defect = 0.0;   // |mass_u0 + mass_u1 − 1|
};

/// Checks ω_P = 1_{u0=P} ω_{u0} + 1_{{u1=P}∖{u0=P}} ω_{u1} through total masses.
inline PartitionReport ma_partition_check(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                          double contact_tol = 1e-9) {
  require_same_grid(u0, u1);
  const auto P = rooftop(u0, u1);
  const std::size_t n = u0.size();
  const double w = 1.0 / static_cast<double>(n);
  PartitionReport r;
  for (std::size_t i = 0; i < n; ++i) {
    if (P[i] - u0[i] <= contact_tol) r.mass_u0 += w;
    if (P[i] - u1[i] <= contact_tol) {
      // the point of X with u1-moment y_i; skip it if u0 also touches P there
      const double s = u1.slopes()[i];
      const bool in_u0_contact = u0.legendre_at(s).value - P.legendre_at(s).value <= contact_tol;
      if (!in_u0_contact) r.mass_u1 += w;
    }
  }
  r.defect = std::abs(r.mass_u0 + r.mass_u1 - 1.0);
  return r;
}

}  // namespace okl
