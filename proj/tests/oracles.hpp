#pragma once

// Reference computations for the tests. Each is written directly from the
// definitions, sharing no code paths with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "massart/core.hpp"
#include "massart/rng.hpp"

namespace oracles {

using massart::FiniteDistribution;
using massart::Vector;

inline double leaky(double lambda, double z) { return z >= 0 ? (1 - lambda) * z : lambda * z; }

// E[LeakyRelu(-y<w,x>)] enumerating y in {+1, -1} at every support point.
inline double enumerated_loss(double lambda, const Vector& w, const FiniteDistribution& dist) {
  long double total = 0;
  for (const auto& p : dist.points()) {
    const double s = w.dot(p.x);
    const double f = p.law.flip_or_zero();
    for (int y : {+1, -1}) {
      const double prob = y == p.law.label ? 1 - f : f;
      total += static_cast<long double>(p.mass) * prob * leaky(lambda, -y * s);
    }
  }
  return static_cast<double>(total);
}

// Probability that sign(<w,x>) (sign(0) = +1) disagrees with the noisy label.
inline double enumerated_error(const Vector& w, const FiniteDistribution& dist) {
  long double total = 0;
  for (const auto& p : dist.points()) {
    const int pred = w.dot(p.x) >= 0 ? 1 : -1;
    const double f = p.law.flip_or_zero();
    total += static_cast<long double>(p.mass) * (pred == p.law.label ? f : 1 - f);
  }
  return static_cast<double>(total);
}

struct BruteThreshold {
  bool feasible = false;
  double threshold = 0;
  double error = 0;
  double mass = 0;
};

// Tries every T in {0} and {|s_i|}; minimizes (error, -T) lexicographically
// among regions with mass >= floor. A region equal to the whole sample is
// reported with T = 0.
inline BruteThreshold brute_force_threshold(const std::vector<double>& scores,
                                            const std::vector<int>& labels, double floor) {
  std::vector<double> candidates{0.0};
  for (double s : scores) candidates.push_back(std::abs(s));
  const double n = static_cast<double>(scores.size());
  BruteThreshold best;
  for (double t : candidates) {
    std::size_t inside = 0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (std::abs(scores[i]) < t) continue;
      ++inside;
      wrong += (scores[i] >= 0 ? 1 : -1) != labels[i];
    }
    if (static_cast<double>(inside) < floor * n) continue;
    const double err = static_cast<double>(wrong) / static_cast<double>(inside);
    const double reported = inside == scores.size() ? 0.0 : t;
    if (!best.feasible || err < best.error || (err == best.error && reported > best.threshold)) {
      best = {true, reported, err, static_cast<double>(inside) / n};
    }
  }
  return best;
}

struct GridMinimum {
  Vector w;
  double value = std::numeric_limits<double>::infinity();
};

// Polar grid over the unit disk: `angles` x `radii` plus the origin.
inline GridMinimum grid_minimum(const std::function<double(const Vector&)>& f, int angles = 10000,
                                int radii = 100) {
  GridMinimum best;
  best.w = Vector::Zero(2);
  best.value = f(best.w);
  for (int j = 1; j <= radii; ++j) {
    for (int k = 0; k < angles; ++k) {
      const double r = static_cast<double>(j) / radii;
      const double a = 2 * std::numbers::pi * k / angles;
      Vector w(2);
      w << r * std::cos(a), r * std::sin(a);
      const double v = f(w);
      if (v < best.value) best = {w, v};
    }
  }
  return best;
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// For u ~ N(s, c^2): E|u|.
inline double gaussian_abs_mean(double s, double c) {
  return 2 * c * normal_pdf(s / c) + s * (1 - 2 * normal_cdf(-s / c));
}

// For u ~ N(s, c^2): E[|u| 1{sign(u) != target}] with sign(0) = +1.
inline double gaussian_wrong_side(double s, double c, int target) {
  if (target > 0) return c * normal_pdf(s / c) - s * normal_cdf(-s / c);  // E[-u; u < 0]
  return c * normal_pdf(s / c) + s * normal_cdf(s / c);                   // E[u; u >= 0]
}

// A random point uniformly distributed in the unit ball.
inline Vector ball_point(int d, massart::Rng& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  v /= v.norm();
  return v * std::pow(rng.uniform(), 1.0 / d);
}

}  // namespace oracles
