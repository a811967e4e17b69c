#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "okl/error.hpp"
#include "okl/metrics.hpp"
#include "okl/toric.hpp"

/// Normalized Kähler–Ricci flow ṙ = log(ω_r/ω) + λr + h + c(t) on the S¹-reduced ℂP¹, λ = 2.
/// With U = g + v the dual of φ_ref + r, the flow reads
///     v̇ = log(1 + y(1−y)v'') + (1 − 2y)v' + 2v − h − c,
/// the log((1−Y)/(1−y)) terms cancelling exactly because λ = 2. The equation degenerates at
/// y = 0, 1 with outgoing characteristics, so one-sided differences need no boundary data.
namespace okl {

enum class Normalization { am_zero, mass_one };

struct FlowConfig {
  SymplecticPotential initial = SymplecticPotential::zero();
  double dt = 0.05;
  double t_end = 20.0;
  Normalization normalization = Normalization::am_zero;
  RicciPotential ricci = ricci_potential(SymplecticPotential::kDefaultGrid);
  std::optional<SymplecticPotential> reference_ke;
  double newton_tol = 1e-10;
  int max_newton = 30;
  int max_halvings = 10;
};

struct FlowDiagnostics {
  double sup_rdot = 0.0;
  double am = 0.0;
  double ding_F = 0.0;
  double j = 0.0;
  double mass = 1.0;  // ∫e^{−ṙ}dω
  std::optional<double> d1_to_ref;
};

struct FlowState {
  SymplecticPotential potential;
  double time = 0.0;
  FlowDiagnostics diagnostics;
  int newton_iterations = 0;
  double dt_used = 0.0;
};

namespace detail {

/// v', v'' with one-sided second-order stencils on the end nodes.
inline void flow_derivs(const Eigen::VectorXd& v, std::size_t i, double h, double& d1, double& d2) {
  const std::size_t n = static_cast<std::size_t>(v.size());
  if (i == 0) {
    d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d2 = (v[0] - 2.0 * v[1] + v[2]) / (h * h);
  } else if (i == n - 1) {
    d1 = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d2 = (v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) / (h * h);
  } else {
    d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
  }
}

/// Stencil columns for node i: {offset indices} and weights of d1, d2.
struct Stencil {
  std::size_t col[3];
  double w1[3];
  double w2[3];
};

inline Stencil flow_stencil(std::size_t i, std::size_t n, double h) {
  if (i == 0)
    return {{0, 1, 2}, {-1.5 / h, 2.0 / h, -0.5 / h}, {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)}};
  if (i == n - 1)
    return {{n - 1, n - 2, n - 3}, {1.5 / h, -2.0 / h, 0.5 / h}, {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)}};
  return {{i - 1, i, i + 1}, {-0.5 / h, 0.0, 0.5 / h}, {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)}};
}

/// The spatial operator without the constant: log(1 + y(1−y)v'') + (1−2y)v' + 2v − h.
/// Returns NaN where the metric degenerates.
inline double flow_operator(const Eigen::VectorXd& v, std::size_t i, double h, double hval) {
  const std::size_t n = static_cast<std::size_t>(v.size());
  const double y = grid_node(i, n);
  double d1 = 0.0, d2 = 0.0;
  flow_derivs(v, i, h, d1, d2);
  const double arg = 1.0 + y * (1.0 - y) * d2;
  if (!(arg > 0.0)) return std::nan("");
  return std::log(arg) + (1.0 - 2.0 * y) * d1 + 2.0 * v[i] - hval;
}

/// The mean of h, which is constant for the Fubini–Study reference.
inline double ricci_level(const RicciPotential& r) {
  double m = 0.0;
  for (double x : r.values) m += x;
  return m / static_cast<double>(r.values.size());
}

/// One implicit Euler step of the shape equation (c = 0); nullopt when Newton fails.
inline std::optional<Eigen::VectorXd> implicit_step(const Eigen::VectorXd& vn, double dt, double hval, double tol,
                                                    int max_newton, int& iterations) {
  const std::size_t n = static_cast<std::size_t>(vn.size());
  const double h = 1.0 / static_cast<double>(n);
  Eigen::VectorXd v = vn, G(n), trial(n);
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = flow_operator(x, i, h, hval);
      if (!std::isfinite(f)) return std::nan("");
      out[i] = x[i] - vn[i] - dt * f;
      worst = std::max(worst, std::abs(out[i]));
    }
    return worst;
  };
  double r = residual(v, G);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  std::vector<Eigen::Triplet<double>> trip;
  iterations = 0;
  while (r > tol) {
    if (iterations++ >= max_newton || !std::isfinite(r)) return std::nullopt;
    trip.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const double y = grid_node(i, n);
      double d1 = 0.0, d2 = 0.0;
      flow_derivs(v, i, h, d1, d2);
      const double a2 = y * (1.0 - y) / (1.0 + y * (1.0 - y) * d2);
      const double a1 = 1.0 - 2.0 * y;
      const auto st = flow_stencil(i, n, h);
      trip.emplace_back(i, i, 1.0 - 2.0 * dt);
      for (int k = 0; k < 3; ++k) trip.emplace_back(i, st.col[k], -dt * (a1 * st.w1[k] + a2 * st.w2[k]));
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd delta = lu.solve(-G);
    double alpha = 1.0, rt = r;
    for (int k = 0; k < 30; ++k) {
      trial = v + alpha * delta;
      rt = residual(trial, G);
      if (std::isfinite(rt) && rt < r) break;
      alpha *= 0.5;
    }
    if (!(std::isfinite(rt) && rt < r)) return std::nullopt;
    v = trial;
    r = rt;
  }
  return v;
}

/// Σ e^{V̇_i} ρ_ref(U'_i) U''_i / n, the discrete ∫e^{−ṙ}dω in moment coordinates.
inline double log_mass(const Eigen::VectorXd& v, const Eigen::VectorXd& vdot) {
  const std::size_t n = static_cast<std::size_t>(v.size());
  const double h = 1.0 / static_cast<double>(n);
  double mx = -kInf;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = grid_node(i, n);
    double d1 = 0.0, d2 = 0.0;
    flow_derivs(v, i, h, d1, d2);
    const double dens = rho_ref(g_ref1(y) + d1) * (g_ref2(y) + d2);
    e[i] = vdot[i] + std::log(dens);
    mx = std::max(mx, e[i]);
  }
  double acc = 0.0;
  for (double x : e) acc += std::exp(x - mx);
  return mx + std::log(acc / static_cast<double>(n));
}

inline Eigen::VectorXd as_eigen(const SymplecticPotential& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.values().data(), static_cast<Eigen::Index>(u.size()));
}

inline SymplecticPotential from_eigen(const Eigen::VectorXd& v) {
  return SymplecticPotential(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace detail

inline FlowDiagnostics flow_diagnostics(const SymplecticPotential& u, const Eigen::VectorXd& vdot, double mass,
                                        const FlowConfig& cfg) {
  FlowDiagnostics d;
  d.sup_rdot = vdot.size() ? vdot.cwiseAbs().maxCoeff() : 0.0;
  d.am = am_energy_dual(u);
  const auto fj = ding_and_j(renormalize(u), cfg.ricci);
  d.ding_F = fj.F;
  d.j = fj.J;
  d.mass = mass;
  if (cfg.reference_ke) d.d1_to_ref = d_p(u, *cfg.reference_ke, 1.0);
  return d;
}

inline FlowState initial_state(const FlowConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw DomainError("flow: dt must be positive");
  if (cfg.normalization == Normalization::am_zero && std::abs(am_energy_dual(cfg.initial)) > 1e-8)
    throw DomainError("flow: initial potential must satisfy |AM| <= 1e-8 under am_zero");
  if (!cfg.initial.valid()) throw DomainError("flow: initial dual is not convex");
  FlowState s{cfg.initial, 0.0, {}, 0, 0.0};
  s.diagnostics = flow_diagnostics(cfg.initial, Eigen::VectorXd(), 1.0, cfg);
  s.diagnostics.sup_rdot = kInf;
  return s;
}

/// One accepted step. A failed Newton solve halves dt (up to cfg.max_halvings times); the
/// returned state may therefore advance by less than cfg.dt.
inline FlowState ricci_step(const FlowState& state, const FlowConfig& cfg) {
  const Eigen::VectorXd vn = detail::as_eigen(state.potential);
  const double hval = detail::ricci_level(cfg.ricci);
  double dt = cfg.dt;
  std::ostringstream history;
  for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt, dt *= 0.5) {
    int its = 0;
    auto next = detail::implicit_step(vn, dt, hval, cfg.newton_tol, cfg.max_newton, its);
    if (!next) {
      history << " dt=" << dt << " failed after " << its << " iterations;";
      continue;
    }
    Eigen::VectorXd v = *next;
    double shift = 0.0;
    if (cfg.normalization == Normalization::am_zero) {
      shift = v.mean();
    } else {
      shift = dt * detail::log_mass(v, (v - vn) / dt);
    }
    v.array() -= shift;
    const Eigen::VectorXd vdot = (v - vn) / dt;
    const double mass = std::exp(detail::log_mass(v, vdot));
    auto u = detail::from_eigen(v);
    if (!u.valid()) {
      history << " dt=" << dt << " lost convexity;";
      continue;
    }
    FlowState out{std::move(u), state.time + dt, {}, its, dt};
    out.diagnostics = flow_diagnostics(out.potential, vdot, mass, cfg);
    return out;
  }
  throw NumericalError("ricci_step: Newton failed at t = " + std::to_string(state.time) + ":" + history.str());
}

struct DecayFit {
  double rate = 0.0;  // slope of log sup_rdot against t
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least squares fit of log y against t on the points with floor < y < ∞.
inline DecayFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& y, double floor = 1e-8) {
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::isfinite(y[i]) && y[i] > floor) {
      xs.push_back(t[i]);
      ls.push_back(std::log(y[i]));
    }
  DecayFit f;
  f.points = xs.size();
  if (xs.size() < 3) return f;
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ls[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ls[i] - my);
    syy += (ls[i] - my) * (ls[i] - my);
  }
  f.rate = sxy / sxx;
  f.intercept = my - f.rate * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

struct FlowSummary {
  DecayFit decay;
  bool ding_monotone = true;   // 𝓕 nonincreasing up to 1e−10
  double max_am_drift = 0.0;
  double max_mass_defect = 0.0;
  std::optional<double> final_d1;
};

struct FlowRun {
  std::vector<FlowState> trajectory;
  FlowSummary summary;
};

inline FlowRun run_flow(const FlowConfig& cfg) {
  FlowRun run;
  run.trajectory.push_back(initial_state(cfg));
  const double am0 = run.trajectory.front().diagnostics.am;
  while (run.trajectory.back().time < cfg.t_end - 1e-12) {
    FlowConfig step_cfg = cfg;
    step_cfg.dt = std::min(cfg.dt, cfg.t_end - run.trajectory.back().time);
    run.trajectory.push_back(ricci_step(run.trajectory.back(), step_cfg));
  }
  std::vector<double> t, r;
  auto& s = run.summary;
  for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
    const auto& st = run.trajectory[k];
    t.push_back(st.time);
    r.push_back(st.diagnostics.sup_rdot);
    if (cfg.normalization == Normalization::am_zero)
      s.max_am_drift = std::max(s.max_am_drift, std::abs(st.diagnostics.am - am0));
    else if (k > 0)
      s.max_mass_defect = std::max(s.max_mass_defect, std::abs(st.diagnostics.mass - 1.0));
    if (k > 0 && st.diagnostics.ding_F > run.trajectory[k - 1].diagnostics.ding_F + 1e-10) s.ding_monotone = false;
  }
  s.decay = fit_log_decay(t, r);
  s.final_d1 = run.trajectory.back().diagnostics.d1_to_ref;
  return run;
}

enum class StabilityVerdict { cauchy, diverging, inconclusive };

struct StabilityReport {
  std::vector<double> times;
  std::vector<std::vector<double>> pairwise;  // d_χ(r_{t_i}, r_{t_j})
  double tail_max = 0.0;                       // max pairwise distance among the tail samples
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  std::string message;
};

/// d_χ over a mesh of trajectory samples. The tail is the last quarter of the mesh.
template <OrliczWeight W>
StabilityReport stability_probe(const std::vector<SymplecticPotential>& path, const std::vector<double>& times,
                                const W& w, double cauchy_tol = 1e-4, std::size_t mesh = 16) {
  if (path.size() != times.size() || path.empty()) throw DomainError("stability_probe: bad trajectory");
  StabilityReport rep;
  std::vector<std::size_t> idx;
  const std::size_t m = std::min(mesh, path.size());
  for (std::size_t k = 0; k < m; ++k)
    idx.push_back(m == 1 ? 0 : k * (path.size() - 1) / (m - 1));
  for (std::size_t a : idx) rep.times.push_back(times[a]);
  rep.pairwise.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      rep.pairwise[a][b] = rep.pairwise[b][a] = d_chi(path[idx[a]], path[idx[b]], w);
  const std::size_t tail = m - std::max<std::size_t>(2, m / 4);
  for (std::size_t a = tail; a < m; ++a)
    for (std::size_t b = tail; b < m; ++b) rep.tail_max = std::max(rep.tail_max, rep.pairwise[a][b]);
  bool growing = m >= 3;
  for (std::size_t a = 1; a + 1 < m; ++a) growing = growing && rep.pairwise[0][a + 1] > rep.pairwise[0][a];
  if (rep.tail_max <= cauchy_tol) {
    rep.verdict = StabilityVerdict::cauchy;
    rep.message = "d_chi-Cauchy on the sampled mesh; no divergence observed";
  } else if (growing) {
    rep.verdict = StabilityVerdict::diverging;
    rep.message = "d_chi(r_0, r_t) grows monotonically; trajectory diverges";
  } else {
    rep.message = "inconclusive; no divergence observed";
  }
  return rep;
}

template <OrliczWeight W>
StabilityReport stability_probe(const std::vector<FlowState>& traj, const W& w, double cauchy_tol = 1e-4,
                                std::size_t mesh = 16) {
  std::vector<SymplecticPotential> path;
  std::vector<double> times;
  for (const auto& s : traj) {
    path.push_back(s.potential);
    times.push_back(s.time);
  }
  return stability_probe(path, times, w, cauchy_tol, mesh);
}

struct DingPoint {
  double d1 = 0.0;
  double F = 0.0;
  double J = 0.0;
  double sup = 0.0;
};

struct DingBounds {
  double A = 0.0;        // 𝓕 ≤ A d_1 + B
  double B = 0.0;
  double C = 0.0;        // 𝓙/C ≤ d_1 ≤ 2𝓙 + 2C
  double C_sup = 0.0;    // sup u − C′ ≤ 𝓙
};

struct DingReport {
  std::vector<DingPoint> points;
  DingBounds bounds;
  std::size_t upper_violations = 0;    // 𝓕 > A d_1 + B
  std::size_t j_lower_violations = 0;  // 𝓙/C > d_1
  std::size_t j_upper_violations = 0;  // d_1 > 2𝓙 + 2C
  std::size_t sup_violations = 0;      // sup u − C′ > 𝓙 or 𝓙 > sup u
  double slack = 1e-9;

  std::size_t violations() const { return upper_violations + j_lower_violations + j_upper_violations + sup_violations; }
};

inline DingPoint ding_point(const SymplecticPotential& u, const RicciPotential& h) {
  const auto fj = ding_and_j(u, h);
  return {d_p(SymplecticPotential::zero(u.size()), u, 1.0), fj.F, fj.J, sup_primal(u)};
}

/// Constants for the probe. Jensen gives 𝓕 ≤ 𝓙 − ∫h dω; A is a calibrated bound for 𝓙/d_1
/// (from a separate calibration set, times a margin), B = −∫h dω, C = max(C′, A).
inline DingBounds calibrate_ding_bounds(const std::vector<SymplecticPotential>& calibration, const RicciPotential& h,
                                        double margin = 1.5) {
  DingBounds b;
  double ratio = 0.0;
  for (const auto& u : calibration) {
    const auto p = ding_point(u, h);
    if (p.d1 > 0.0) ratio = std::max(ratio, p.J / p.d1);
  }
  b.A = margin * ratio;
  b.B = -detail::ricci_level(h);
  b.C_sup = sup_control_constant();
  b.C = std::max(b.C_sup, b.A);
  return b;
}

inline DingReport ding_properness_probe(const std::vector<SymplecticPotential>& samples, const RicciPotential& h,
                                        const DingBounds& bounds, double slack = 1e-9) {
  DingReport rep;
  rep.bounds = bounds;
  rep.slack = slack;
  for (const auto& u : samples) {
    const auto p = ding_point(u, h);
    rep.points.push_back(p);
    if (p.F > bounds.A * p.d1 + bounds.B + slack) ++rep.upper_violations;
    if (p.J / bounds.C > p.d1 + slack) ++rep.j_lower_violations;
    if (p.d1 > 2.0 * p.J + 2.0 * bounds.C + slack) ++rep.j_upper_violations;
    if (p.sup - bounds.C_sup > p.J + slack || p.J > p.sup + slack) ++rep.sup_violations;
  }
  return rep;
}

}  // namespace okl
