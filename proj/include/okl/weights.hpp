#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <initializer_list>
#include <memory>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "okl/error.hpp"

namespace okl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline double bump(double t) {
  const double q = 1.0 - t * t;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

// integrate() is non-const here (abscissas grow lazily), so keep one per thread
inline boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  return ts;
}

template <class F>
double quad(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return integrator().integrate(f, a, b, 1e-12);
}

/// ∫_{-1}^{1} δ(τ) F(τ) dτ, split at the points where F is non-smooth.
template <class F>
double bump_average(F f, std::initializer_list<double> kinks = {});

/// Quintic Hermite interpolant on a uniform grid from values, first and second derivatives.
/// (Boost 1.74's cardinal_quintic_hermite returns wrong second derivatives.)
class QuinticTable {
 public:
  QuinticTable(std::vector<double> y, std::vector<double> d1, std::vector<double> d2, double dx)
      : y_(std::move(y)), d1_(std::move(d1)), d2_(std::move(d2)), dx_(dx) {}

  /// Returns (f, f', f'') at x in [0, (n-1) dx].
  std::array<double, 3> operator()(double x) const {
    const auto last = y_.size() - 2;
    auto i = static_cast<std::size_t>(std::max(0.0, x / dx_));
    if (i > last) i = last;
    const double h = dx_, t = x / h - static_cast<double>(i);
    // coefficients of the local polynomial in t
    const double a0 = y_[i], a1 = h * d1_[i], a2 = 0.5 * h * h * d2_[i];
    const double b0 = y_[i + 1], b1 = h * d1_[i + 1], b2 = 0.5 * h * h * d2_[i + 1];
    const double c3 = 10 * (b0 - a0) - 6 * a1 - 4 * b1 - 3 * a2 + b2;
    const double c4 = -15 * (b0 - a0) + 8 * a1 + 7 * b1 + 3 * a2 - 2 * b2;
    const double c5 = 6 * (b0 - a0) - 3 * a1 - 3 * b1 - a2 + b2;
    const double f = a0 + t * (a1 + t * (a2 + t * (c3 + t * (c4 + t * c5))));
    const double fp = a1 + t * (2 * a2 + t * (3 * c3 + t * (4 * c4 + t * 5 * c5)));
    const double fpp = 2 * a2 + t * (6 * c3 + t * (12 * c4 + t * 20 * c5));
    return {f, fp / h, fpp / (h * h)};
  }

 private:
  std::vector<double> y_, d1_, d2_;
  double dx_;
};

struct BumpMoments {
  double mass = 0.0;
  std::array<double, 48> even{};  // ∫ δ τ^{2j}
};

inline const BumpMoments& bump_moments() {
  static const BumpMoments m = [] {
    BumpMoments r;
    r.mass = quad(bump, -1.0, 1.0);
    for (std::size_t j = 0; j < r.even.size(); ++j) {
      const double e = 2.0 * static_cast<double>(j);
      r.even[j] = 2.0 * quad([e](double t) { return bump(t) * std::pow(t, e); }, 0.0, 1.0) / r.mass;
    }
    return r;
  }();
  return m;
}

template <class F>
double bump_average(F f, std::initializer_list<double> kinks) {
  const double z = bump_moments().mass;
  auto g = [&](double t) {
    const double v = f(t);
    return std::isfinite(v) ? bump(t) * v : 0.0;  // integrable singularity at a kink
  };
  std::array<double, 4> cuts{};
  std::size_t n = 0;
  cuts[n++] = -1.0;
  for (double c : kinks)
    if (c > -1.0 && c < 1.0 && n < 3) cuts[n++] = c;
  std::sort(cuts.begin() + 1, cuts.begin() + static_cast<std::ptrdiff_t>(n));
  cuts[n++] = 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) sum += quad(g, cuts[i], cuts[i + 1]);
  return sum / z;
}

}  // namespace detail

/// χ_p(l) = |l|^p / p.
class PowerWeight {
 public:
  explicit PowerWeight(double p) : p_(p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("power weight needs p >= 1");
  }
  double p() const { return p_; }
  double value(double a) const {
    if (p_ == 1.0) return a;
    if (p_ == 2.0) return 0.5 * a * a;
    return std::pow(a, p_) / p_;
  }
  double slope(double a) const {
    if (p_ == 1.0) return 1.0;
    if (p_ == 2.0) return a;
    return std::pow(a, p_ - 1.0);
  }
  double curvature(double a) const {
    if (p_ == 1.0) return a == 0.0 ? kInf : 0.0;
    if (p_ == 2.0) return 1.0;
    if (a == 0.0) return p_ < 2.0 ? kInf : 0.0;
    return (p_ - 1.0) * std::pow(a, p_ - 2.0);
  }

 private:
  double p_;
};

class YoungWeight;

namespace detail {
struct MollifiedData;
}

/// χ_k(l) = M(h_k l) − M(0) with M the bump average of a base weight at radius 1/k.
class MollifiedWeight {
 public:
  explicit MollifiedWeight(std::shared_ptr<const detail::MollifiedData> d) : d_(std::move(d)) {}
  double value(double a) const;
  double slope(double a) const;
  double curvature(double a) const;
  const YoungWeight& base() const;
  int k() const;
  double scale() const;
  double growth() const;

 private:
  std::shared_ptr<const detail::MollifiedData> d_;
};

/// A normalized even convex weight in W⁺_p. Cheap to copy; immutable.
class YoungWeight {
 public:
  YoungWeight(PowerWeight w) : impl_(w) {}
  YoungWeight(MollifiedWeight w) : impl_(std::move(w)) {}

  double operator()(double l) const {
    return std::visit([a = std::abs(l)](const auto& w) { return w.value(a); }, impl_);
  }
  /// Right derivative; at l = 0 this is the right derivative for p = 1.
  double derivative(double l) const {
    const double d = std::visit([a = std::abs(l)](const auto& w) { return w.slope(a); }, impl_);
    return l < 0.0 ? -d : d;
  }
  double second_derivative(double l) const {
    return std::visit([a = std::abs(l)](const auto& w) { return w.curvature(a); }, impl_);
  }
  double growth_exponent() const {
    if (auto* pw = std::get_if<PowerWeight>(&impl_)) return pw->p();
    return std::get<MollifiedWeight>(impl_).growth();
  }
  bool smooth() const {
    if (auto* pw = std::get_if<PowerWeight>(&impl_)) return pw->p() >= 2.0;
    return true;
  }
  double chi_one() const { return (*this)(1.0); }

  const PowerWeight* as_power() const { return std::get_if<PowerWeight>(&impl_); }
  const MollifiedWeight* as_mollified() const { return std::get_if<MollifiedWeight>(&impl_); }

 private:
  std::variant<PowerWeight, MollifiedWeight> impl_;
};

inline YoungWeight make_power_weight(double p) { return YoungWeight(PowerWeight(p)); }

namespace detail {

struct MollifiedData {
  YoungWeight base;
  int k = 1;
  double h = 1.0;
  double m0 = 0.0;  // M(0)
  double xa = 0.0;  // table covers [0, xa]
  std::optional<QuinticTable> table;
  std::optional<double> power;  // base exponent when the base is a power weight
  std::vector<double> series;   // coefficients of x^{p-2j} in M(x) for x > xa
  double growth = 2.0;

  // M(x) − M(0), M'(x), M''(x) for x ≥ 0.
  double D(double x) const {
    if (x <= xa) return (*table)(x)[0];
    if (power) return series_value(x, 0) - m0;
    const double kk = k;
    return bump_average([&](double t) { return base(x - t / kk) - base(t / kk); });
  }
  double D1(double x) const {
    if (x <= xa) return (*table)(x)[1];
    if (power) return series_value(x, 1);
    const double kk = k;
    return bump_average([&](double t) { return base.derivative(x - t / kk); });
  }
  double D2(double x) const {
    if (x <= xa) return (*table)(x)[2];
    if (power) return series_value(x, 2);
    const double kk = k;
    return bump_average([&](double t) { return base.second_derivative(x - t / kk); });
  }

  double series_value(double x, int order) const {
    const double p = *power;
    double sum = 0.0;
    const double inv2 = 1.0 / (x * x);
    double xp = std::pow(x, p - order);
    for (std::size_t j = 0; j < series.size(); ++j) {
      const double e = p - 2.0 * static_cast<double>(j);
      double c = series[j];
      if (order >= 1) c *= e;
      if (order >= 2) c *= e - 1.0;
      const double term = c * xp;
      sum += term;
      if (c == 0.0 && std::floor(p) == p) break;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      xp *= inv2;
    }
    return sum;
  }
};

}  // namespace detail

inline double MollifiedWeight::value(double a) const { return d_->D(d_->h * a); }
inline double MollifiedWeight::slope(double a) const { return d_->h * d_->D1(d_->h * a); }
inline double MollifiedWeight::curvature(double a) const { return d_->h * d_->h * d_->D2(d_->h * a); }
inline const YoungWeight& MollifiedWeight::base() const { return d_->base; }
inline int MollifiedWeight::k() const { return d_->k; }
inline double MollifiedWeight::scale() const { return d_->h; }
inline double MollifiedWeight::growth() const { return d_->growth; }

/// Log-spaced positive sample points, used for growth-exponent estimates.
inline std::vector<double> log_samples(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

/// Smooth the base weight with the bump mollifier of radius 1/k and renormalize so χ_k'(1) = 1.
inline YoungWeight mollify(const YoungWeight& w, int k) {
  if (k < 1) throw DomainError("mollify: k must be a positive integer");
  auto d = std::make_shared<detail::MollifiedData>(detail::MollifiedData{w});
  d->k = k;
  const double kk = k;
  if (auto* pw = w.as_power()) d->power = pw->p();

  d->xa = 4.0 / kk;
  const std::size_t n = 257;
  const double dx = d->xa / static_cast<double>(n - 1);
  std::vector<double> v(n), v1(n), v2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = dx * static_cast<double>(i);
    const double kink = kk * x;
    v[i] = detail::bump_average([&](double t) { return w(x - t / kk) - w(t / kk); }, {kink, 0.0});
    v1[i] = detail::bump_average([&](double t) { return w.derivative(x - t / kk); }, {kink});
    if (d->power && *d->power == 1.0) {
      v2[i] = 2.0 * kk * detail::bump(kink) / detail::bump_moments().mass;
    } else {
      v2[i] = detail::bump_average([&](double t) { return w.second_derivative(x - t / kk); }, {kink});
    }
  }
  v[0] = 0.0;
  v1[0] = 0.0;
  d->table.emplace(std::move(v), std::move(v1), std::move(v2), dx);

  if (d->power) {
    const double p = *d->power;
    const auto& mom = detail::bump_moments();
    d->m0 = detail::bump_average([&](double t) { return std::pow(std::abs(t), p); }, {0.0}) / (p * std::pow(kk, p));
    double binom = 1.0;  // C(p, m)
    for (std::size_t j = 0; j < mom.even.size(); ++j) {
      const auto m = static_cast<double>(2 * j);
      d->series.push_back(binom * mom.even[j] * std::pow(kk, -m) / p);
      binom *= (p - m) / (m + 1.0);
      binom *= (p - m - 1.0) / (m + 2.0);
    }
  }

  auto f = [&](double h) { return h * d->D1(h) - 1.0; };
  const double lo = 1.0 - 1.0 / kk, hi = 1.0 + 1.0 / kk;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo <= 0.0 && fhi >= 0.0)) {
    std::ostringstream os;
    os << "mollify: scale root not bracketed on [" << lo << ", " << hi << "], f(lo)=" << flo << " f(hi)=" << fhi;
    throw NumericalError(os.str());
  }
  if (flo == 0.0) {
    d->h = lo;
  } else if (fhi == 0.0) {
    d->h = hi;
  } else {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
    d->h = 0.5 * (r.first + r.second);
  }

  // sup l χ'(l)/χ(l) on a log grid; the l → 0 limit of a smooth even weight is 2
  double g = 2.0;
  for (double l : log_samples(1e-3, 1e3, 2048)) {
    const double x = d->h * l;
    const double val = d->D(x);
    if (val > 0.0) g = std::max(g, x * d->D1(x) / val);
  }
  d->growth = std::max(1.0, g) * (1.0 + 1e-8);
  return YoungWeight(MollifiedWeight(std::move(d)));
}

struct ConjugateOptions {
  double h_max = 100.0;
  std::size_t samples = 4096;
};

/// The Legendre transform χ* of a Young weight.
class ConjugateWeight {
 public:
  enum class Form { power, indicator, numeric };

  explicit ConjugateWeight(YoungWeight base, ConjugateOptions opt = {}) : base_(std::move(base)) {
    if (auto* pw = base_.as_power()) {
      if (pw->p() == 1.0) {
        form_ = Form::indicator;
        growth_ = kInf;
        chi_one_ = 0.0;
      } else {
        form_ = Form::power;
        q_ = pw->p() / (pw->p() - 1.0);
        growth_ = q_;
        chi_one_ = 1.0 / q_;
      }
      return;
    }
    form_ = Form::numeric;
    double hi = 1.0;
    while (base_.derivative(hi) < opt.h_max && hi < 1e12) hi *= 2.0;
    grid_ = std::make_shared<Grid>();
    grid_->l = log_samples(1e-8, hi, opt.samples);
    grid_->slope.reserve(grid_->l.size());
    for (double l : grid_->l) grid_->slope.push_back(base_.derivative(l));
    chi_one_ = (*this)(1.0);
    double g = 1.0;
    for (double a : log_samples(1e-3, opt.h_max, 1024)) {
      const double v = (*this)(a);
      if (!std::isfinite(v)) {
        g = kInf;
        break;
      }
      if (v > 0.0) g = std::max(g, a * argmax(a) / v);
    }
    growth_ = std::isfinite(g) ? g * (1.0 + 1e-8) : g;
  }

  double operator()(double h) const {
    const double a = std::abs(h);
    switch (form_) {
      case Form::indicator:
        return a <= 1.0 ? 0.0 : kInf;
      case Form::power:
        return q_ == 2.0 ? 0.5 * a * a : std::pow(a, q_) / q_;
      case Form::numeric:
        break;
    }
    if (a == 0.0) return 0.0;
    const double l = argmax(a);
    if (!std::isfinite(l)) return kInf;
    return a * l - base_(l);
  }
  /// (χ*)'(h), the maximizing l in sup_l (l h − χ(l)).
  double derivative(double h) const {
    const double a = std::abs(h);
    double d = 0.0;
    switch (form_) {
      case Form::indicator:
        d = a < 1.0 ? 0.0 : kInf;
        break;
      case Form::power:
        d = std::pow(a, q_ - 1.0);
        break;
      case Form::numeric:
        d = a == 0.0 ? 0.0 : argmax(a);
        break;
    }
    return h < 0.0 ? -d : d;
  }
  double chi_one() const { return chi_one_; }
  double growth_exponent() const { return growth_; }
  bool indicator() const { return form_ == Form::indicator; }
  Form form() const { return form_; }
  /// The exponent q when χ* = χ_q in closed form.
  std::optional<double> closed_form() const {
    if (form_ == Form::power) return q_;
    return std::nullopt;
  }
  const YoungWeight& base() const { return base_; }

 private:
  struct Grid {
    std::vector<double> l, slope;
  };

  double argmax(double a) const {
    const auto& s = grid_->slope;
    const auto& ls = grid_->l;
    const auto it = std::lower_bound(s.begin(), s.end(), a);
    double lo = 0.0, hi = 0.0;
    if (it == s.end()) {
      lo = ls.back();
      hi = 2.0 * lo;
      while (base_.derivative(hi) < a) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) return kInf;
      }
    } else {
      const auto i = static_cast<std::size_t>(it - s.begin());
      hi = ls[i];
      lo = i == 0 ? 0.0 : ls[i - 1];
    }
    double l = 0.5 * (lo + hi);
    for (int it2 = 0; it2 < 200 && hi - lo > 4e-16 * hi; ++it2) {
      const double f = base_.derivative(l) - a;
      if (f == 0.0) return l;
      (f < 0.0 ? lo : hi) = l;
      const double c = base_.second_derivative(l);
      double next = (c > 0.0 && std::isfinite(c)) ? l - f / c : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - l) <= 1e-16 * l) return next;
      l = next;
    }
    return l;
  }

  YoungWeight base_;
  Form form_ = Form::numeric;
  double q_ = 0.0;
  double chi_one_ = 0.0;
  double growth_ = kInf;
  std::shared_ptr<Grid> grid_;
};

inline ConjugateWeight conjugate(const YoungWeight& w, ConjugateOptions opt = {}) { return ConjugateWeight(w, opt); }

/// Sampled grid on which weight invariants are checked: [−10,10] at step 1/64 plus log tails to 1e3.
inline std::vector<double> weight_check_grid() {
  std::vector<double> l;
  for (int i = -640; i <= 640; ++i) l.push_back(i / 64.0);
  for (double x : log_samples(1e-4, 1e3, 256)) {
    l.push_back(x);
    l.push_back(-x);
  }
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());
  return l;
}

struct WeightReport {
  double zero = 0.0;           // |χ(0)|
  double evenness = 0.0;       // max |χ(l) − χ(−l)|
  double convexity = 0.0;      // max violation of midpoint convexity
  double normalization = 0.0;  // distance of 1 from [χ'(1⁻), χ'(1⁺)]
  double growth = 0.0;         // max of l χ'(l) − p χ(l)
  bool ok(double tol = 1e-10) const {
    return zero <= tol && evenness <= tol && convexity <= tol && normalization <= tol && growth <= tol;
  }
};

inline WeightReport validate(const YoungWeight& w) {
  WeightReport r;
  const auto grid = weight_check_grid();
  r.zero = std::abs(w(0.0));
  const double p = w.growth_exponent();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = grid[i];
    const double v = w(l);
    r.evenness = std::max(r.evenness, std::abs(v - w(-l)));
    if (l > 0.0) r.growth = std::max(r.growth, (l * w.derivative(l) - p * v) / std::max(1.0, v));
    for (std::size_t j : {i + 1, i + 7, i + 64}) {
      if (j >= grid.size()) continue;
      const double b = grid[j];
      const double viol = w(0.5 * (l + b)) - 0.5 * (v + w(b));
      r.convexity = std::max(r.convexity, viol / std::max(1.0, std::abs(v)));
    }
  }
  const double right = w.derivative(1.0);
  const double left = w.derivative(std::nextafter(1.0, 0.0));
  const double lo = std::min(left, right), hi = std::max(left, right);
  r.normalization = std::max({0.0, lo - 1.0, 1.0 - hi});
  return r;
}

struct GrowthReport {
  double max_violation = 0.0;
  std::size_t violations = 0;
};

/// Checks ε^p χ(l) ≤ χ(εl) ≤ ε χ(l) on the given samples.
inline GrowthReport check_growth_sandwich(const YoungWeight& w, double eps, const std::vector<double>& samples,
                                          double tol = 1e-10) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("growth sandwich needs eps in (0,1)");
  GrowthReport r;
  const double ep = std::pow(eps, w.growth_exponent());
  for (double l : samples) {
    const double v = w(l), ve = w(eps * l);
    const double scale = std::max(1.0, v);
    const double viol = std::max(ep * v - ve, ve - eps * v) / scale;
    r.max_violation = std::max(r.max_violation, viol);
    if (viol > tol) ++r.violations;
  }
  return r;
}

}  // namespace okl
