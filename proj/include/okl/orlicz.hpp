#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <span>
#include <utility>

#include "okl/error.hpp"
#include "okl/measure.hpp"
#include "okl/weights.hpp"

namespace okl {

template <class W>
concept OrliczWeight = requires(const W& w, double l) {
  { w(l) } -> std::convertible_to<double>;
  { w.chi_one() } -> std::convertible_to<double>;
  { w.growth_exponent() } -> std::convertible_to<double>;
};

/// (m_p(l), M_p(l)) = (min(l, l^p), max(l, l^p)).
inline std::pair<double, double> mM_helpers(double p, double l) {
  if (!(p > 0.0) || !(l >= 0.0)) throw DomainError("mM_helpers: need p > 0 and l >= 0");
  const double lp = std::pow(l, p);
  return {std::min(l, lp), std::max(l, lp)};
}

/// Every gauge norm computed with a finite growth exponent is checked against
/// m_p(‖f‖) ≤ ∫χ(f)dμ/χ(1) ≤ M_p(‖f‖); the tallies live here.
namespace norm_audit {
inline std::atomic<long> checked{0};
inline std::atomic<long> violations{0};
inline std::atomic<double> worst{0.0};

inline void record_worst(double excess) {
  double cur = worst.load(std::memory_order_relaxed);
  while (excess > cur && !worst.compare_exchange_weak(cur, excess, std::memory_order_relaxed)) {
  }
}
inline void record(double excess) {
  checked.fetch_add(1, std::memory_order_relaxed);
  if (excess > 1e-9) violations.fetch_add(1, std::memory_order_relaxed);
  record_worst(excess);
}
inline void reset() {
  checked = 0;
  violations = 0;
  worst = 0.0;
}
}  // namespace norm_audit

struct NormReport {
  double norm = 0.0;
  double integral = 0.0;  // I = ∫χ(f)dμ
  double lower = 0.0;     // initial bracket m_{1/p}(I/χ(1))
  double upper = 0.0;     // initial bracket M_{1/p}(I/χ(1))
  int iterations = 0;
  double sandwich_excess = 0.0;  // relative violation of the norm/integral sandwich, 0 if it holds
};

template <OrliczWeight W>
NormReport gauge_norm_report(std::span<const double> f, const W& w, const DiscreteMeasure& mu) {
  if (!mu.probability()) throw DomainError("gauge_norm: measure must be a probability measure");
  if (f.size() != mu.size()) throw DomainError("gauge_norm: length mismatch");
  const auto wt = mu.weights();
  double fmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw DomainError("gauge_norm: non-finite sample");
    if (wt[i] > 0.0) fmax = std::max(fmax, std::abs(f[i]));
  }
  NormReport r;
  if (fmax < 1e-300) return r;
  if constexpr (requires { w.indicator(); }) {
    if (w.indicator()) {  // χ*(h) = 0 on |h| ≤ 1, +∞ beyond: the gauge is the sup norm
      r.norm = r.lower = r.upper = fmax;
      return r;
    }
  }

  const double c1 = w.chi_one();
  auto level = [&](double rr) {
    double s = 0.0;
    const double inv = 1.0 / rr;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (wt[i] > 0.0) s += w(f[i] * inv) * wt[i];
    return s;
  };
  r.integral = level(1.0);
  const double p = w.growth_exponent();
  double lo = 0.0, hi = 0.0;
  if (std::isfinite(p) && std::isfinite(r.integral)) {
    std::tie(lo, hi) = mM_helpers(1.0 / p, r.integral / c1);
    r.lower = lo;
    r.upper = hi;
  } else {
    lo = hi = fmax;
    r.lower = 0.0;
    r.upper = kInf;
  }
  if (!(hi - lo <= 1e-12 * hi)) {
    // the sandwich is a theorem for W⁺_p weights; widen only to absorb rounding
    lo *= 1.0 - 1e-13;
    hi *= 1.0 + 1e-13;
    for (int k = 0; level(lo) < c1 && k < 2000; ++k) lo *= 0.5;
    for (int k = 0; level(hi) > c1 && k < 2000; ++k) hi *= 2.0;
    while (hi - lo > 1e-12 * hi && r.iterations < 200) {
      const double mid = 0.5 * (lo + hi);
      (level(mid) > c1 ? lo : hi) = mid;
      ++r.iterations;
    }
    if (hi - lo > 1e-12 * hi) throw NumericalError("gauge_norm: bisection did not converge in 200 iterations");
  }
  r.norm = 0.5 * (lo + hi);

  if (std::isfinite(p) && std::isfinite(r.integral)) {
    const auto [m, M] = mM_helpers(p, r.norm);
    const double q = r.integral / c1;
    r.sandwich_excess = std::max({0.0, (m - q) / std::max(q, 1e-300), (q - M) / std::max(M, 1e-300)});
    norm_audit::record(r.sandwich_excess);
  }
  return r;
}

/// inf{r > 0 : ∫χ(f/r)dμ ≤ χ(1)}.
template <OrliczWeight W>
double gauge_norm(std::span<const double> f, const W& w, const DiscreteMeasure& mu) {
  return gauge_norm_report(f, w, mu).norm;
}

struct HolderPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// (∫fg dμ, ‖f‖_χ ‖g‖_χ*).
inline HolderPair holder_pair(std::span<const double> f, std::span<const double> g, const YoungWeight& w,
                              const ConjugateWeight& wstar, const DiscreteMeasure& mu) {
  if (f.size() != g.size()) throw DomainError("holder_pair: length mismatch");
  std::vector<double> fg(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fg[i] = f[i] * g[i];
  HolderPair h;
  h.lhs = integrate(fg, mu);
  const double nf = gauge_norm(f, w, mu);
  double ng = kInf;
  try {
    ng = gauge_norm(g, wstar, mu);
  } catch (const NumericalError&) {
    ng = kInf;
  }
  h.rhs = (nf == 0.0 || ng == 0.0) ? 0.0 : nf * ng;
  return h;
}

inline HolderPair holder_pair(std::span<const double> f, std::span<const double> g, const YoungWeight& w,
                              const DiscreteMeasure& mu) {
  return holder_pair(f, g, w, conjugate(w), mu);
}

}  // namespace okl
