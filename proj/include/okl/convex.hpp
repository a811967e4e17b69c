#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "okl/error.hpp"

namespace okl {

/// Indices of the lower convex hull of (x_i, f_i), x strictly increasing (monotone chain).
inline std::vector<std::size_t> lower_hull(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw DomainError("lower_hull: length mismatch");
  std::vector<std::size_t> h;
  h.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (h.size() >= 2) {
      const std::size_t a = h[h.size() - 2], b = h.back();
      // drop b when it lies on or above the chord a–i
      const double cross = (x[b] - x[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (x[i] - x[a]);
      if (cross <= 0.0) h.pop_back();
      else break;
    }
    h.push_back(i);
  }
  return h;
}

/// The lower convex envelope of the samples, evaluated back on the same nodes.
inline std::vector<double> convex_envelope(std::span<const double> x, std::span<const double> f) {
  const auto h = lower_hull(x, f);
  std::vector<double> out(x.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (j + 1 < h.size() && x[h[j + 1]] < x[i]) ++j;
    if (j + 1 >= h.size() || x[h[j]] == x[i]) {
      out[i] = f[h[j]];
      continue;
    }
    const std::size_t a = h[j], b = h[j + 1];
    const double t = (x[i] - x[a]) / (x[b] - x[a]);
    out[i] = (1.0 - t) * f[a] + t * f[b];
  }
  return out;
}

/// Largest midpoint-convexity violation of the samples (0 for convex data).
inline double convexity_defect(std::span<const double> x, std::span<const double> f) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double t = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
    const double chord = (1.0 - t) * f[i - 1] + t * f[i + 1];
    worst = std::max(worst, f[i] - chord);
  }
  return worst;
}

struct LegendreResult {
  std::vector<double> values;  // f*(y_j) = max_i (x_i y_j − f_i)
  std::vector<std::size_t> argmax;
  bool input_convex = true;
};

/// Discrete Legendre–Fenchel transform onto an increasing target grid. Non-convex input is
/// convexified implicitly (only hull vertices can be maximizers) and flagged.
inline LegendreResult legendre(std::span<const double> x, std::span<const double> f, std::span<const double> y,
                               double tol = 1e-9) {
  if (x.size() != f.size() || x.empty()) throw DomainError("legendre: bad input sizes");
  LegendreResult r;
  r.input_convex = convexity_defect(x, f) <= tol;
  const auto h = lower_hull(x, f);
  r.values.resize(y.size());
  r.argmax.resize(y.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j > 0 && y[j] < y[j - 1]) throw DomainError("legendre: target grid must be increasing");
    // the maximizing hull vertex moves right as y grows
    while (k + 1 < h.size() && x[h[k + 1]] * y[j] - f[h[k + 1]] >= x[h[k]] * y[j] - f[h[k]]) ++k;
    r.argmax[j] = h[k];
    r.values[j] = x[h[k]] * y[j] - f[h[k]];
  }
  return r;
}

}  // namespace okl
