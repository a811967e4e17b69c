#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "okl/measure.hpp"
#include "okl/toric.hpp"

namespace okl {

/// 64-bit generator seeded by (seed, stream) through splitmix64; one stream per trial.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) : eng_(mix(mix(seed) ^ (stream * 0x9E3779B97F4A7C15ULL + 1))) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t next() { return eng_(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::mt19937_64 eng_;
};

struct RoughnessParams {
  int bumps = 4;
  double amplitude = 0.5;  // |a_k| ≤ amplitude
  double min_width = 0.05;
  double max_width = 0.3;
  double offset = 1.0;  // constant term in [−offset, offset]
  bool even = false;    // symmetrize under y ↦ 1 − y
};

/// v(y) = c + Σ a_k w_k log(1 + e^{(y − c_k)/w_k}), defined for every y so it can be
/// sampled on any grid.
struct BumpField {
  double constant = 0.0;
  std::vector<double> a, c, w;
  bool even = false;

  double operator()(double y) const {
    auto raw = [&](double x) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * w[k] * softplus((x - c[k]) / w[k]);
      return s;
    };
    return constant + (even ? 0.5 * (raw(y) + raw(1.0 - y)) : raw(y));
  }

  /// The potential with dual g + v, convexified on the n-node grid.
  SymplecticPotential sample(std::size_t n) const {
    std::vector<double> U(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = grid_node(i, n);
      U[i] = g_ref(y) + (*this)(y);
    }
    return SymplecticPotential::from_dual(U);
  }
};

inline BumpField random_bumps(Rng& rng, const RoughnessParams& p = {}) {
  BumpField f;
  f.even = p.even;
  f.constant = rng.uniform(-p.offset, p.offset);
  for (int k = 0; k < p.bumps; ++k) {
    f.a.push_back(rng.uniform(-p.amplitude, p.amplitude));
    f.c.push_back(rng.uniform(0.0, 1.0));
    f.w.push_back(rng.uniform(p.min_width, p.max_width));
  }
  return f;
}

inline SymplecticPotential random_potential(std::uint64_t seed, const RoughnessParams& p = {},
                                            std::size_t n = SymplecticPotential::kDefaultGrid) {
  Rng rng(seed);
  return random_bumps(rng, p).sample(n);
}

/// n sorted nodes in (0,1) with random positive weights summing to one.
inline DiscreteMeasure random_measure(Rng& rng, std::size_t n) {
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (static_cast<double>(i) + rng.uniform(0.1, 0.9)) / static_cast<double>(n);
    w[i] = rng.uniform(0.05, 1.0);
  }
  return DiscreteMeasure::normalized_from(std::move(x), std::move(w));
}

/// Samples of scale·z·e^{g}, z uniform in [−1,1] and g uniform in [−3,3], so magnitudes span decades.
inline std::vector<double> random_samples(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> f(n);
  for (double& x : f) x = scale * rng.uniform(-1.0, 1.0) * std::exp(rng.uniform(-3.0, 3.0));
  return f;
}

}  // namespace okl
