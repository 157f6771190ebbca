#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "massart/core.hpp"
#include "massart/loss.hpp"

namespace massart {

// Raised when no threshold meets the mass floor.
class ThresholdInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the brute-force search finds no threshold satisfying both
// conditions of the structural lemma.
class StructuralLemmaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThresholdChoice {
  double threshold = 0.0;
  double region_mass = 0.0;
  double conditional_error = 0.0;
  std::size_t region_count = 0;
};

// Smallest m with 2 exp(-2 m eps^2) <= delta.
std::size_t dkw_sample_size(double cdf_accuracy, double delta);

// Among T in {0} and the observed |<w, x>|, the one minimizing the empirical
// error of sign(<w, x>) inside {|<w, x>| >= T} subject to region mass >= mass_floor.
// Ties go to the larger T. A region covering the whole sample is reported as T = 0.
ThresholdChoice find_threshold(const Vector& w, std::span<const LabeledExample> sample,
                               double mass_floor);

// Same search on precomputed signed scores <w, x_i> and labels y_i.
ThresholdChoice find_threshold_scored(std::span<const double> scores, std::span<const int> labels,
                                      double mass_floor);

struct StructuralWitness {
  double threshold = 0.0;
  double mass = 0.0;
  double conditional_error = 0.0;
  double loss = 0.0;
};

// Finds T with Pr[|<w, x>| >= T] >= |L(w)|/(2 lambda) and conditional expected
// error <= lambda - |L(w)|/2 under the exact label laws. Requires L(w) < 0.
StructuralWitness structural_oracle(const LeakyReluParams& params, const Vector& w,
                                    const FiniteDistribution& dist);

}  // namespace massart
