#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "okl/error.hpp"
#include "okl/flow.hpp"
#include "okl/metrics.hpp"
#include "okl/orlicz.hpp"
#include "okl/random.hpp"
#include "okl/toric.hpp"
#include "okl/weights.hpp"

namespace okl {

struct PropertyResult {
  std::string suite;
  std::string property;
  std::string weight;
  long trials = 0;
  long violations = 0;
  double worst = -kInf;   // largest (lhs − rhs) seen; ≤ tolerance means the property held
  double tolerance = 0.0;
  double constant = std::numeric_limits<double>::quiet_NaN();  // empirical constant where one is fitted
  bool pass() const { return violations == 0; }
};

struct VerifyConfig {
  std::string suite = "all";  // weights, orlicz, metrics, geodesic, ding, all
  long trials = 200;
  std::uint64_t seed = 7;
  std::size_t grid = SymplecticPotential::kDefaultGrid;
};

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"weights", "orlicz", "metrics", "geodesic", "ding"};
  return s;
}

struct NamedWeight {
  std::string name;
  YoungWeight w;
};

/// χ_1, χ_2 and the mollified χ_1.5 (k = 8).
inline const std::vector<NamedWeight>& battery_weights() {
  static const std::vector<NamedWeight> w{{"chi_1", make_power_weight(1.0)},
                                          {"chi_2", make_power_weight(2.0)},
                                          {"chi_1.5_mollified_k8", mollify(make_power_weight(1.5), 8)}};
  return w;
}

namespace detail {

class Tally {
 public:
  Tally(std::string suite, std::string property, std::string weight, double tol) {
    r_.suite = std::move(suite);
    r_.property = std::move(property);
    r_.weight = std::move(weight);
    r_.tolerance = tol;
  }
  /// Records one check of lhs ≤ rhs.
  void le(double lhs, double rhs) {
    const double e = lhs - rhs;
    r_.worst = std::max(r_.worst, std::isnan(e) ? kInf : e);
    if (!(e <= r_.tolerance)) ++r_.violations;
  }
  void trial() { ++r_.trials; }
  void constant(double c) { r_.constant = std::isnan(r_.constant) ? c : std::max(r_.constant, c); }
  PropertyResult result() const { return r_; }

 private:
  PropertyResult r_;
};

/// Stream id for (property, trial) so each property sees independent draws.
inline std::uint64_t stream_id(std::uint64_t property, long trial) {
  return property * 1000003ULL + static_cast<std::uint64_t>(trial);
}

inline SymplecticPotential draw(Rng& rng, std::size_t grid) {
  return random_bumps(rng).sample(grid);
}

}  // namespace detail

// --- weights -------------------------------------------------------------------------------

inline std::vector<PropertyResult> verify_weights(const VerifyConfig& cfg) {
  std::vector<PropertyResult> out;
  std::uint64_t pid = 100;
  for (const auto& [name, w] : battery_weights()) {
    const auto rep = validate(w);
    detail::Tally v("weights", "normalization_and_convexity", name, 1e-10);
    v.trial();
    v.le(std::max({rep.zero, rep.evenness, rep.convexity, rep.normalization, rep.growth}), 0.0);
    out.push_back(v.result());

    const auto g = check_growth_sandwich(w, 0.5, log_samples(1e-3, 1e3, 512));
    detail::Tally gr("weights", "growth_sandwich", name, 1e-10);
    gr.trial();
    gr.le(g.max_violation, 0.0);
    gr.constant(w.growth_exponent());
    out.push_back(gr.result());

    const auto cj = conjugate(w);
    const double bmax = cj.indicator() ? 1.0 : 3.0;
    detail::Tally y("weights", "young_inequality", name, 1e-8);
    detail::Tally yi("weights", "young_identity", name, 1e-8);
    for (long t = 0; t < cfg.trials; ++t) {
      Rng rng(cfg.seed, detail::stream_id(pid, t));
      const double a = rng.uniform(-5.0, 5.0);
      const double b = rng.uniform(-bmax, bmax);
      y.trial();
      const double cb = cj(b);
      if (std::isfinite(cb)) y.le(a * b, w(a) + cb);
      // χ(a) + χ*(χ'(a)) = aχ'(a) where χ is differentiable
      if (a != 0.0) {
        const double d = w.derivative(a);
        const double cd = cj(d);
        if (std::isfinite(cd)) {
          yi.trial();
          const double lhs = w(a) + cd, rhs = a * d;
          yi.le(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), 0.0);
        }
      }
    }
    out.push_back(y.result());
    out.push_back(yi.result());
    ++pid;
  }
  return out;
}

// --- orlicz --------------------------------------------------------------------------------

/// gauge_norm against the direct (∫|f|^p dμ)^{1/p} for power weights.
inline PropertyResult verify_lp_exactness(double p, long trials, std::uint64_t seed, double tol = 1e-10) {
  std::ostringstream nm;
  nm << "chi_" << p;
  detail::Tally t("orlicz", "lp_exactness", nm.str(), tol);
  const auto w = make_power_weight(p);
  for (long k = 0; k < trials; ++k) {
    Rng rng(seed, detail::stream_id(200 + static_cast<std::uint64_t>(p * 10), k));
    const std::size_t n = 16 + static_cast<std::size_t>(rng.uniform() * 500);
    const auto mu = random_measure(rng, n);
    const auto f = random_samples(rng, n, std::exp(rng.uniform(-4.0, 4.0)));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(f[i]), p) * mu.weights()[i];
    const double direct = std::pow(acc, 1.0 / p);
    const double g = gauge_norm(f, w, mu);
    t.trial();
    t.le(std::abs(g - direct) / direct, 0.0);
  }
  return t.result();
}

/// ∫fg dμ ≤ ‖f‖_χ ‖g‖_χ* on random pairs.
inline PropertyResult verify_holder(const NamedWeight& nw, long trials, std::uint64_t seed, std::uint64_t pid,
                                    double tol = 1e-10) {
  detail::Tally t("orlicz", "holder", nw.name, tol);
  const auto cj = conjugate(nw.w);
  for (long k = 0; k < trials; ++k) {
    Rng rng(seed, detail::stream_id(pid, k));
    const std::size_t n = 16 + static_cast<std::size_t>(rng.uniform() * 200);
    const auto mu = random_measure(rng, n);
    const auto f = random_samples(rng, n);
    const auto g = random_samples(rng, n);
    const auto h = holder_pair(f, g, nw.w, cj, mu);
    t.trial();
    t.le(h.lhs, h.rhs);
  }
  return t.result();
}

inline std::vector<PropertyResult> verify_orlicz(const VerifyConfig& cfg) {
  std::vector<PropertyResult> out;
  for (double p : {1.0, 1.5, 2.0, 3.0}) out.push_back(verify_lp_exactness(p, cfg.trials, cfg.seed));
  std::uint64_t pid = 300;
  for (const auto& nw : battery_weights()) out.push_back(verify_holder(nw, cfg.trials, cfg.seed, pid++));
  return out;
}

// --- metrics -------------------------------------------------------------------------------

/// The inequality battery for one weight; trials potentials are drawn on the given grid.
inline std::vector<PropertyResult> verify_metrics_for(const NamedWeight& nw, long trials, std::uint64_t seed,
                                                      std::size_t grid, double slack = 1e-6) {
  const auto& w = nw.w;
  const auto& name = nw.name;
  detail::Tally axioms("metrics", "metric_axioms", name, 1e-9);
  detail::Tally ordered("metrics", "ordered_sandwich", name, slack);
  detail::Tally roof("metrics", "rooftop_decomposition", name, slack);
  detail::Tally maxan("metrics", "max_analog", name, kInf);
  detail::Tally maxadd("metrics", "max_additivity", name, slack);
  detail::Tally contr("metrics", "contraction", name, slack);
  detail::Tally halfway("metrics", "halfway_estimate", name, kInf);
  detail::Tally amlip("metrics", "am_lipschitz", name, slack);
  detail::Tally naive("metrics", "naive_compare", name, slack);
  detail::Tally thmc("metrics", "energy_metric_equivalence", name, kInf);

  const auto mu = DiscreteMeasure::uniform_midpoint(grid);
  const double one_star = gauge_norm(std::vector<double>(grid, 1.0), conjugate(w), mu);

  for (long k = 0; k < trials; ++k) {
    Rng rng(seed, detail::stream_id(400, k));
    const auto a = detail::draw(rng, grid);
    const auto b = detail::draw(rng, grid);
    const auto c = detail::draw(rng, grid);
    const double dab = d_chi(a, b, w), dbc = d_chi(b, c, w), dac = d_chi(a, c, w);

    axioms.trial();
    axioms.le(dac, dab + dbc);
    axioms.le(std::abs(dab - d_chi(b, a, w)), 0.0);
    axioms.le(d_chi(a, a, w), 0.0);
    axioms.le(0.0, dab);

    // u0 = P(a,b) ≤ u1 = a
    {
      const auto u0 = rooftop(a, b);
      const auto& u1 = a;
      const double d = d_chi(u0, u1, w);
      const double n0 = norm_at(u0, u1, w), n1 = norm_at(u1, u0, w);
      ordered.trial();
      ordered.le(std::max(0.125 * n0, n1), d);
      ordered.le(d, n0);
    }
    {
      const auto P = rooftop(a, b);
      const double s = d_chi(a, P, w) + d_chi(b, P, w);
      roof.trial();
      roof.le(0.5 * s, dab);
      roof.le(dab, 2.0 * s);
    }
    {
      const auto M = max_potential(a, b);
      const double s = d_chi(a, M, w) + d_chi(b, M, w);
      maxan.trial();
      if (dab > 0.0 && s > 0.0) maxan.constant(std::max(dab / s, s / dab));
      const double iab = i_chi_energy(a, b, w);
      const double sm = i_chi_energy(a, M, w) + i_chi_energy(M, b, w);
      maxadd.trial();
      maxadd.le(0.5 * sm, iab);
      maxadd.le(iab, 2.0 * sm);
      thmc.trial();
      if (dab > 0.0 && iab > 0.0) thmc.constant(std::max(dab / iab, iab / dab));
    }
    {
      contr.trial();
      contr.le(d_chi(rooftop(a, b), rooftop(a, c), w), dbc);
    }
    {
      const auto mid = primal_average(a, b);
      halfway.trial();
      if (dab > 0.0) halfway.constant(d_chi(a, mid, w) / dab);
    }
    {
      amlip.trial();
      amlip.le(std::abs(am_energy(a) - am_energy(b)), one_star * dab);
    }
    {
      // a ≥ P(a,b) ≥ P(P(a,b),c)
      const auto v = rooftop(a, b);
      const auto x = rooftop(v, c);
      naive.trial();
      naive.le(d_chi(a, v, w), d_chi(a, x, w));
    }
  }
  return {axioms.result(), ordered.result(), roof.result(),    maxan.result(), maxadd.result(),
          contr.result(),  halfway.result(), amlip.result(),   naive.result(), thmc.result()};
}

/// Grid-level checks that do not depend on the weight.
inline std::vector<PropertyResult> verify_energies(long trials, std::uint64_t seed, std::size_t grid) {
  detail::Tally iener("metrics", "i_energy_nonneg_and_max_monotone", "-", 1e-9);
  detail::Tally amx("metrics", "am_primary_vs_dual", "-", 1e-6);
  detail::Tally pyth1("metrics", "pythagoras_p1", "-", 1e-4);
  detail::Tally pyth2("metrics", "pythagoras_p2", "-", 1e-4);
  detail::Tally pytham("metrics", "pythagoras_am_formula", "-", 1e-4);
  detail::Tally supc("metrics", "sup_control", "chi_1", 0.0);
  const long pyth_trials = std::max(1L, trials / 10);

  // sup u ≤ C d_1(0,u) + C, C calibrated on a separate seed set and frozen
  double csup = 0.0;
  for (long k = 0; k < 50; ++k) {
    Rng rng(seed, detail::stream_id(590, k));
    const auto u = detail::draw(rng, grid);
    const double d = d_p(SymplecticPotential::zero(grid), u, 1.0);
    csup = std::max(csup, sup_primal(u) / (d + 1.0));
  }
  csup = std::max(1.0, 1.5 * csup);
  supc.constant(csup);

  for (long k = 0; k < trials; ++k) {
    Rng rng(seed, detail::stream_id(500, k));
    const auto a = detail::draw(rng, grid);
    const auto b = detail::draw(rng, grid);
    iener.trial();
    const double iab = i_energy(a, b);
    iener.le(0.0, iab);
    iener.le(i_energy(max_potential(a, b), b), iab);
    amx.trial();
    amx.le(std::abs(am_energy(a) - am_energy_dual(a)), 0.0);
    supc.trial();
    supc.le(sup_primal(a), csup * d_p(SymplecticPotential::zero(grid), a, 1.0) + csup);
    if (k < pyth_trials) {
      const auto r1 = d_p_pythagoras_check(a, b, 1.0);
      const auto r2 = d_p_pythagoras_check(a, b, 2.0);
      pyth1.trial();
      pyth1.le(r1.defect, 0.0);
      pytham.trial();
      pytham.le(r1.am_defect, 0.0);
      pyth2.trial();
      pyth2.le(r2.defect, 0.0);
    }
  }
  return {iener.result(), amx.result(), pyth1.result(), pyth2.result(), pytham.result(), supc.result()};
}

inline std::vector<PropertyResult> verify_metrics(const VerifyConfig& cfg) {
  std::vector<PropertyResult> out;
  for (const auto& nw : battery_weights()) {
    auto r = verify_metrics_for(nw, cfg.trials, cfg.seed, cfg.grid);
    out.insert(out.end(), r.begin(), r.end());
  }
  auto e = verify_energies(cfg.trials, cfg.seed, cfg.grid);
  out.insert(out.end(), e.begin(), e.end());
  return out;
}

// --- geodesic ------------------------------------------------------------------------------

/// max_t ‖u̇_t‖ − min_t ‖u̇_t‖ along the dual-linear geodesic, from time differences of the
/// sampled path.
template <OrliczWeight W>
double speed_variation(const GeodesicSegment& g, const W& w, std::size_t time_nodes = 11) {
  std::vector<double> sp;
  const auto mu = DiscreteMeasure::uniform_midpoint(g.start().size());
  const double dt = 1e-3;
  for (std::size_t m = 0; m < time_nodes; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(time_nodes - 1);
    const double ta = std::max(0.0, t - dt), tb = std::min(1.0, t + dt);
    const auto ua = g(ta), ub = g(tb);
    std::vector<double> d(ua.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -(ub[i] - ua[i]) / (tb - ta);
    sp.push_back(gauge_norm(d, w, mu));
  }
  const auto [lo, hi] = std::minmax_element(sp.begin(), sp.end());
  return *hi - *lo;
}

inline std::vector<PropertyResult> verify_geodesic(const VerifyConfig& cfg) {
  std::vector<PropertyResult> out;
  std::uint64_t pid = 600;
  for (const auto& nw : battery_weights()) {
    detail::Tally t("geodesic", "constant_speed", nw.name, 1e-8);
    for (long k = 0; k < cfg.trials; ++k) {
      Rng rng(cfg.seed, detail::stream_id(pid, k));
      const auto g = weak_geodesic(detail::draw(rng, cfg.grid), detail::draw(rng, cfg.grid));
      t.trial();
      t.le(speed_variation(g, nw.w), 0.0);
    }
    out.push_back(t.result());
    ++pid;
  }
  detail::Tally am("geodesic", "am_affine", "-", 1e-6);
  for (long k = 0; k < std::max(1L, cfg.trials / 10); ++k) {
    Rng rng(cfg.seed, detail::stream_id(650, k));
    const auto g = weak_geodesic(detail::draw(rng, cfg.grid), detail::draw(rng, cfg.grid));
    const double a0 = am_energy(g.start()), a1 = am_energy(g.end());
    am.trial();
    for (int m = 1; m < 10; ++m) {
      const double t = m / 10.0;
      am.le(std::abs(am_energy(g(t)) - ((1.0 - t) * a0 + t * a1)), 0.0);
    }
  }
  out.push_back(am.result());
  return out;
}

// --- ding ----------------------------------------------------------------------------------

inline std::vector<SymplecticPotential> normalized_samples(long count, std::uint64_t seed, std::uint64_t pid,
                                                           std::size_t grid) {
  std::vector<SymplecticPotential> out;
  for (long k = 0; k < count; ++k) {
    Rng rng(seed, detail::stream_id(pid, k));
    RoughnessParams p;
    p.amplitude = rng.uniform(0.1, 3.0);
    out.push_back(renormalize(random_bumps(rng, p).sample(grid)));
  }
  return out;
}

inline std::vector<PropertyResult> verify_ding(const VerifyConfig& cfg, DingReport* report = nullptr) {
  const auto h = ricci_potential(cfg.grid);
  const auto bounds = calibrate_ding_bounds(normalized_samples(50, cfg.seed, 700, cfg.grid), h);
  const auto rep = ding_properness_probe(normalized_samples(cfg.trials, cfg.seed, 710, cfg.grid), h, bounds);
  auto row = [&](std::string name, std::size_t viol, double c) {
    PropertyResult r;
    r.suite = "ding";
    r.property = std::move(name);
    r.weight = "chi_1";
    r.trials = static_cast<long>(rep.points.size());
    r.violations = static_cast<long>(viol);
    r.tolerance = rep.slack;
    r.constant = c;
    return r;
  };
  std::vector<PropertyResult> out{row("ding_upper_bound", rep.upper_violations, bounds.A),
                                  row("j_lower_bound", rep.j_lower_violations, bounds.C),
                                  row("j_upper_bound", rep.j_upper_violations, bounds.C),
                                  row("sup_control_j", rep.sup_violations, bounds.C_sup)};
  // worst margins
  for (const auto& p : rep.points) {
    out[0].worst = std::max(out[0].worst, p.F - (bounds.A * p.d1 + bounds.B));
    out[1].worst = std::max(out[1].worst, p.J / bounds.C - p.d1);
    out[2].worst = std::max(out[2].worst, p.d1 - (2.0 * p.J + 2.0 * bounds.C));
    out[3].worst = std::max(out[3].worst, std::max(p.sup - bounds.C_sup - p.J, p.J - p.sup));
  }
  detail::Tally cd("ding", "ricci_potential_constant", "-", 1e-6);
  cd.trial();
  cd.le(h.oscillation(), 0.0);
  out.push_back(cd.result());
  if (report) *report = rep;
  return out;
}

// --- runner --------------------------------------------------------------------------------

inline std::vector<PropertyResult> run_verify(const VerifyConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("verify: trials must be >= 1");
  if (cfg.grid < 64) throw DomainError("verify: grid must be >= 64");
  const auto& all = verify_suites();
  if (cfg.suite != "all" && std::find(all.begin(), all.end(), cfg.suite) == all.end())
    throw DomainError("verify: unknown suite '" + cfg.suite + "'");
  const long checked0 = norm_audit::checked.load(), violations0 = norm_audit::violations.load();
  const double worst0 = norm_audit::worst.exchange(0.0);
  auto want = [&](const char* s) { return cfg.suite == "all" || cfg.suite == s; };
  std::vector<PropertyResult> out;
  auto add = [&](std::vector<PropertyResult> r) { out.insert(out.end(), r.begin(), r.end()); };
  if (want("weights")) add(verify_weights(cfg));
  if (want("orlicz")) add(verify_orlicz(cfg));
  if (want("metrics")) add(verify_metrics(cfg));
  if (want("geodesic")) add(verify_geodesic(cfg));
  if (want("ding")) add(verify_ding(cfg));

  // every norm computed above went through the sandwich audit
  PropertyResult audit;
  audit.suite = "orlicz";
  audit.property = "norm_integral_sandwich";
  audit.weight = "all";
  audit.trials = norm_audit::checked.load() - checked0;
  audit.violations = norm_audit::violations.load() - violations0;
  audit.worst = norm_audit::worst.load();
  norm_audit::record_worst(worst0);
  audit.tolerance = 1e-9;
  out.push_back(audit);
  return out;
}

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::scientific << std::setprecision(16) << x;
  return os.str();
}

inline std::string verify_csv(const std::vector<PropertyResult>& rows) {
  std::ostringstream os;
  os << "suite,property,weight,trials,violations,worst,tolerance,constant,pass\n";
  for (const auto& r : rows)
    os << r.suite << ',' << r.property << ',' << r.weight << ',' << r.trials << ',' << r.violations << ','
       << format_real(r.worst) << ',' << format_real(r.tolerance) << ',' << format_real(r.constant) << ','
       << (r.pass() ? "pass" : "FAIL") << '\n';
  return os.str();
}

}  // namespace okl
