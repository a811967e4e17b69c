#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "okl/error.hpp"

namespace okl {

/// Nonnegative atoms on sorted nodes. A probability measure has total mass 1 within 1e-12.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> nodes, std::vector<double> weights, bool probability = false)
      : nodes_(std::move(nodes)), weights_(std::move(weights)), probability_(probability) {
    if (nodes_.size() != weights_.size()) throw DomainError("measure: nodes/weights length mismatch");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) throw DomainError("measure: negative or non-finite weight");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw DomainError("measure: nodes must be strictly increasing");
      mass_ += weights_[i];
    }
    if (probability_ && std::abs(mass_ - 1.0) > 1e-12) throw DomainError("measure: probability measure must have unit mass");
  }

  /// Equal weights 1/n at the cell centers (i + 1/2)/n of [0,1]; the endpoints are never nodes.
  static DiscreteMeasure uniform_midpoint(std::size_t n) {
    if (n == 0) throw DomainError("measure: empty grid");
    std::vector<double> x(n), w(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return normalized_from(std::move(x), std::move(w));
  }

  /// Trapezoidal weights on n ≥ 2 equispaced nodes of [a,b], scaled to unit mass.
  static DiscreteMeasure trapezoid(double a, double b, std::size_t n) {
    if (n < 2 || !(b > a)) throw DomainError("measure: trapezoid needs n >= 2 and a < b");
    std::vector<double> x(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    w.front() = w.back() = 0.5;
    return normalized_from(std::move(x), std::move(w));
  }

  /// Rescales w to unit mass.
  static DiscreteMeasure normalized_from(std::vector<double> x, std::vector<double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    return DiscreteMeasure(std::move(x), std::move(w), true);
  }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double total_mass() const { return mass_; }
  bool probability() const { return probability_; }
  std::size_t size() const { return nodes_.size(); }

 private:

  std::vector<double> nodes_, weights_;
  double mass_ = 0.0;
  bool probability_ = false;
};

inline double integrate(std::span<const double> f, const DiscreteMeasure& mu) {
  if (f.size() != mu.size()) throw DomainError("integrate: length mismatch");
  const auto w = mu.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  return s;
}

/// Moves node i to T[i]; weights (hence mass) are untouched. T must be strictly monotone.
inline DiscreteMeasure pushforward(const DiscreteMeasure& mu, std::span<const double> T) {
  if (T.size() != mu.size()) throw DomainError("pushforward: length mismatch");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < T.size(); ++i) {
    inc = inc && T[i] > T[i - 1];
    dec = dec && T[i] < T[i - 1];
  }
  if (!inc && !dec) throw DomainError("pushforward: map is not strictly monotone");
  std::vector<double> x(T.begin(), T.end());
  std::vector<double> w(mu.weights().begin(), mu.weights().end());
  if (dec && T.size() > 1) {
    std::reverse(x.begin(), x.end());
    std::reverse(w.begin(), w.end());
  }
  return DiscreteMeasure(std::move(x), std::move(w), mu.probability());
}

}  // namespace okl
