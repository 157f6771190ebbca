#pragma once

#include <span>

#include "massart/core.hpp"

namespace massart {

class LeakyReluParams {
 public:
  // Throws std::invalid_argument unless 0 <= lambda < 1/2.
  explicit LeakyReluParams(double lambda);

  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

// (1 - lambda) z for z >= 0, lambda z for z < 0.
inline double leaky_relu(const LeakyReluParams& params, double z) {
  return z >= 0.0 ? (1.0 - params.lambda()) * z : params.lambda() * z;
}

// Slope used by the subgradient: 1 - lambda for z > 0, lambda for z <= 0.
inline double leaky_relu_slope(const LeakyReluParams& params, double z) {
  return z > 0.0 ? 1.0 - params.lambda() : params.lambda();
}

// LeakyRelu(-y <w, x>) for one example.
double pointwise_loss(const LeakyReluParams& params, const Vector& w, const LabeledExample& example);

// Mean of LeakyRelu(-y <w, x>) over the sample. Requires ||w|| <= 1.
double empirical_loss(const LeakyReluParams& params, const Vector& w,
                      std::span<const LabeledExample> sample);

// sum_x mass(x) (err(w, x) - lambda) |<w, x>|, where err(w, x) is the
// probability that sign(<w, x>) disagrees with the noisy label at x.
// Every point needs a flip probability.
double closed_form_loss(const LeakyReluParams& params, const Vector& w,
                        const FiniteDistribution& dist);

// E[LeakyRelu(-y <w, x>)] by enumerating both labels at each point.
double expected_loss(const LeakyReluParams& params, const Vector& w, const FiniteDistribution& dist);

// Subgradient of LeakyRelu(-y <w, x>) in w: slope * (-y x). Throws when
// ||x|| > 1 + 1e-9.
Vector stochastic_subgradient(const LeakyReluParams& params, const Vector& w,
                              const LabeledExample& example);

// Same, writing into `out` and taking the raw point and label.
void accumulate_subgradient(const LeakyReluParams& params, const Vector& w, const Vector& x, int y,
                            double weight, Vector& out);

// OPT = sum_x mass(x) flip(x) for a distribution whose clean labels come from a halfspace.
double optimal_error(const FiniteDistribution& dist);

}  // namespace massart
