#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "okl/error.hpp"
#include "okl/orlicz.hpp"
#include "okl/toric.hpp"

/// ε-geodesics in the dual picture. With U(t,·) the symplectic potential of u_t, the reduced
/// equation (φ_tt − φ_ts²/φ_ss) φ_ss = ε φ_ref''(s) becomes
///     U_tt = −ε ρ(U_y) U_yy,   ρ(s) = σ(s)σ(−s),
/// which is degenerate at y = 0, 1 and needs no boundary condition there.
namespace okl {

struct SpaceTimeField {
  std::vector<double> t;                 // time nodes, t[0] = 0, t.back() = 1
  std::vector<std::vector<double>> v;    // v[m] = U(t_m,·) − g on the moment grid
  double epsilon = 0.0;
  double residual = 0.0;                 // max-norm of the discrete residual
  std::vector<double> residual_history;

  std::size_t space() const { return v.front().size(); }
  SymplecticPotential at(std::size_t m) const { return SymplecticPotential(v[m]); }
};

struct EpsGeodesicOptions {
  std::size_t time_nodes = 64;
  double tolerance = 1e-10;
  int max_newton = 40;
};

namespace detail {

/// v', v'' at node i; the end nodes use a linear ghost (v'' = 0 there).
inline void space_derivs(const std::vector<double>& v, std::size_t i, double h, double& d1, double& d2) {
  const std::size_t n = v.size();
  if (i == 0) {
    d1 = (v[1] - v[0]) / h;
    d2 = 0.0;
  } else if (i == n - 1) {
    d1 = (v[n - 1] - v[n - 2]) / h;
    d2 = 0.0;
  } else {
    d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
  }
}

inline double eps_residual(const SpaceTimeField& f, std::size_t m, std::size_t i, double dt, double h) {
  double d1 = 0.0, d2 = 0.0;
  space_derivs(f.v[m], i, h, d1, d2);
  const double y = grid_node(i, f.space());
  const double s = g_ref1(y) + d1;
  const double tt = (f.v[m + 1][i] - 2.0 * f.v[m][i] + f.v[m - 1][i]) / (dt * dt);
  return tt + f.epsilon * rho_ref(s) * (g_ref2(y) + d2);
}

inline double eps_residual_norm(const SpaceTimeField& f, double dt, double h) {
  double r = 0.0;
  for (std::size_t m = 1; m + 1 < f.t.size(); ++m)
    for (std::size_t i = 0; i < f.space(); ++i) r = std::max(r, std::abs(eps_residual(f, m, i, dt, h)));
  return r;
}

}  // namespace detail

/// Damped Newton on the full space-time grid, started from the dual-linear geodesic.
inline SpaceTimeField solve_eps_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1, double eps,
                                         const EpsGeodesicOptions& opt = {}) {
  require_same_grid(u0, u1);
  if (!(eps > 0.0)) throw DomainError("eps-geodesic: eps must be positive");
  if (opt.time_nodes < 3) throw DomainError("eps-geodesic: need at least 3 time nodes");
  const std::size_t M = opt.time_nodes, n = u0.size(), K = M - 2;
  const double dt = 1.0 / static_cast<double>(M - 1), h = 1.0 / static_cast<double>(n);

  SpaceTimeField f;
  f.epsilon = eps;
  f.t.resize(M);
  f.v.assign(M, std::vector<double>(n));
  for (std::size_t m = 0; m < M; ++m) {
    const double t = static_cast<double>(m) * dt;
    f.t[m] = m + 1 == M ? 1.0 : t;
    for (std::size_t i = 0; i < n; ++i) f.v[m][i] = (1.0 - f.t[m]) * u0[i] + f.t[m] * u1[i];
  }
  f.v.front() = u0.values();
  f.v.back() = u1.values();

  auto index = [K](std::size_t m, std::size_t i) { return static_cast<int>(i * K + (m - 1)); };
  const int N = static_cast<int>(n * K);
  Eigen::VectorXd R(N), delta(N);
  double rnorm = detail::eps_residual_norm(f, dt, h);
  f.residual_history.push_back(rnorm);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trip;
  for (int it = 0; it < opt.max_newton && rnorm > opt.tolerance; ++it) {
    trip.clear();
    trip.reserve(static_cast<std::size_t>(N) * 5);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = grid_node(i, n);
      for (std::size_t m = 1; m + 1 < M; ++m) {
        const int row = index(m, i);
        R[row] = detail::eps_residual(f, m, i, dt, h);
        trip.emplace_back(row, row, -2.0 / (dt * dt));
        if (m > 1) trip.emplace_back(row, index(m - 1, i), 1.0 / (dt * dt));
        if (m + 2 < M) trip.emplace_back(row, index(m + 1, i), 1.0 / (dt * dt));
        double d1 = 0.0, d2 = 0.0;
        detail::space_derivs(f.v[m], i, h, d1, d2);
        const double s = g_ref1(y) + d1;
        const double sg = sigmoid(s);
        const double rho = sg * (1.0 - sg);
        const double a1 = eps * rho * (1.0 - 2.0 * sg) * (g_ref2(y) + d2);  // ∂/∂v'
        const double a2 = eps * rho;                                         // ∂/∂v''
        if (i == 0) {
          trip.emplace_back(row, index(m, 0), -a1 / h);
          trip.emplace_back(row, index(m, 1), a1 / h);
        } else if (i == n - 1) {
          trip.emplace_back(row, index(m, n - 1), a1 / h);
          trip.emplace_back(row, index(m, n - 2), -a1 / h);
        } else {
          trip.emplace_back(row, index(m, i - 1), -a1 / (2.0 * h) + a2 / (h * h));
          trip.emplace_back(row, index(m, i + 1), a1 / (2.0 * h) + a2 / (h * h));
          trip.emplace_back(row, row, -2.0 * a2 / (h * h));
        }
      }
    }
    Eigen::SparseMatrix<double> J(N, N);
    J.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw NumericalError("eps-geodesic: Jacobian factorization failed");
    delta = lu.solve(-R);

    // Armijo backtracking on the max-norm residual
    const auto saved = f.v;
    double alpha = 1.0, trial = rnorm;
    for (int k = 0; k < 30; ++k) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 1; m + 1 < M; ++m) f.v[m][i] = saved[m][i] + alpha * delta[index(m, i)];
      trial = detail::eps_residual_norm(f, dt, h);
      if (trial <= (1.0 - 1e-4 * alpha) * rnorm) break;
      alpha *= 0.5;
    }
    if (!(trial < rnorm)) {
      f.v = saved;
      break;
    }
    rnorm = trial;
    f.residual_history.push_back(rnorm);
  }
  f.residual = rnorm;
  if (rnorm > opt.tolerance) {
    std::ostringstream os;
    os << "eps-geodesic: Newton did not reach " << opt.tolerance << "; residual history:";
    for (double r : f.residual_history) os << ' ' << r;
    throw NumericalError(os.str());
  }
  return f;
}

/// ∂_t v at time node m: central differences, second-order one-sided at the ends.
inline std::vector<double> time_derivative(const SpaceTimeField& f, std::size_t m) {
  const std::size_t M = f.t.size(), n = f.space();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (m == 0) {
      d[i] = (-3.0 * f.v[0][i] + 4.0 * f.v[1][i] - f.v[2][i]) / (f.t[2] - f.t[0]);
    } else if (m + 1 == M) {
      d[i] = (3.0 * f.v[M - 1][i] - 4.0 * f.v[M - 2][i] + f.v[M - 3][i]) / (f.t[M - 1] - f.t[M - 3]);
    } else {
      d[i] = (f.v[m + 1][i] - f.v[m - 1][i]) / (f.t[m + 1] - f.t[m - 1]);
    }
  }
  return d;
}

/// ‖u̇_t‖_{χ,u_t} at each time node; u̇_t at the point with u_t-moment y is −∂_t U(t,y).
template <OrliczWeight W>
std::vector<double> speeds(const SpaceTimeField& f, const W& w) {
  const auto mu = DiscreteMeasure::uniform_midpoint(f.space());
  std::vector<double> out(f.t.size());
  for (std::size_t m = 0; m < f.t.size(); ++m) {
    auto d = time_derivative(f, m);
    for (double& x : d) x = -x;
    out[m] = gauge_norm(d, w, mu);
  }
  return out;
}

/// ∫₀¹ ‖u̇_t‖_{χ,u_t} dt by the trapezoid rule over the time nodes.
template <OrliczWeight W>
double chi_length(const SpaceTimeField& f, const W& w) {
  const auto sp = speeds(f, w);
  double L = 0.0;
  for (std::size_t m = 0; m + 1 < sp.size(); ++m) L += 0.5 * (sp[m] + sp[m + 1]) * (f.t[m + 1] - f.t[m]);
  return L;
}

/// Samples a weak geodesic on the same time grid, so it can be measured like a field.
inline SpaceTimeField sample_geodesic(const GeodesicSegment& g, std::size_t time_nodes = 64) {
  SpaceTimeField f;
  f.t.resize(time_nodes);
  for (std::size_t m = 0; m < time_nodes; ++m)
    f.t[m] = m + 1 == time_nodes ? 1.0 : static_cast<double>(m) / static_cast<double>(time_nodes - 1);
  for (double t : f.t) f.v.push_back(g(t).values());
  return f;
}

template <OrliczWeight W>
double chi_length(const GeodesicSegment& g, const W& w, std::size_t time_nodes = 64) {
  return chi_length(sample_geodesic(g, time_nodes), w);
}

/// max over the space-time grid of Δ_ω u_t = φ_t''/φ_ref'' − 1 = 1/(U_yy ρ(U_y)) − 1.
inline double laplacian_bound_probe(const SpaceTimeField& f) {
  const std::size_t n = f.space();
  const double h = 1.0 / static_cast<double>(n);
  double worst = -kInf;
  for (const auto& v : f.v) {
    for (std::size_t i = 0; i < n; ++i) {
      double d1 = 0.0, d2 = 0.0;
      detail::space_derivs(v, i, h, d1, d2);
      const double y = grid_node(i, n);
      const double s = g_ref1(y) + d1;
      const double uyy = g_ref2(y) + d2;
      worst = std::max(worst, 1.0 / (uyy * rho_ref(s)) - 1.0);
    }
  }
  return worst;
}

/// sup over space-time of |U^ε − U^geo|; the Legendre transform is a sup-norm isometry, so this
/// is also the primal sup-distance.
inline double sup_distance(const SpaceTimeField& a, const GeodesicSegment& g) {
  double d = 0.0;
  for (std::size_t m = 0; m < a.t.size(); ++m) {
    const auto ref = g(a.t[m]);
    for (std::size_t i = 0; i < a.space(); ++i) d = std::max(d, std::abs(a.v[m][i] - ref[i]));
  }
  return d;
}

}  // namespace okl
