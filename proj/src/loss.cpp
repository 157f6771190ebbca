#include "massart/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace massart {

namespace {

constexpr double kNormSlack = 1e-9;

void require_in_unit_ball(const Vector& v, const char* what) {
  if (v.norm() > 1.0 + kNormSlack) {
    throw std::invalid_argument(std::string(what) + ": vector outside the unit ball");
  }
}

}  // namespace

LeakyReluParams::LeakyReluParams(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda < 0.5)) {
    throw std::invalid_argument("LeakyReluParams: lambda must lie in [0, 1/2)");
  }
}

double pointwise_loss(const LeakyReluParams& params, const Vector& w, const LabeledExample& example) {
  require_same_dimension(w.size(), example.x().size(), "pointwise_loss");
  return leaky_relu(params, -example.y() * w.dot(example.x()));
}

double empirical_loss(const LeakyReluParams& params, const Vector& w,
                      std::span<const LabeledExample> sample) {
  if (sample.empty()) throw EmptySampleError("empirical_loss: empty sample");
  require_in_unit_ball(w, "empirical_loss");
  const double total = pairwise_sum(sample.size(), [&](std::size_t i) {
    return pointwise_loss(params, w, sample[i]);
  });
  return total / static_cast<double>(sample.size());
}

double closed_form_loss(const LeakyReluParams& params, const Vector& w,
                        const FiniteDistribution& dist) {
  if (!dist.has_label_laws()) {
    throw std::invalid_argument("closed_form_loss: every point needs a flip probability");
  }
  require_same_dimension(dist.dimension(), w.size(), "closed_form_loss");
  const auto points = dist.points();
  return pairwise_sum(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    const double score = w.dot(p.x);
    const double err = p.law.error_of(sign_label(score));
    return p.mass * (err - params.lambda()) * std::abs(score);
  });
}

double expected_loss(const LeakyReluParams& params, const Vector& w, const FiniteDistribution& dist) {
  require_same_dimension(dist.dimension(), w.size(), "expected_loss");
  const auto points = dist.points();
  return pairwise_sum(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    const double score = w.dot(p.x);
    const double flip = p.law.flip_or_zero();
    const double y = p.law.label;
    return p.mass * ((1.0 - flip) * leaky_relu(params, -y * score) +
                     flip * leaky_relu(params, y * score));
  });
}

Vector stochastic_subgradient(const LeakyReluParams& params, const Vector& w,
                              const LabeledExample& example) {
  Vector out = Vector::Zero(w.size());
  accumulate_subgradient(params, w, example.x(), example.y(), 1.0, out);
  return out;
}

void accumulate_subgradient(const LeakyReluParams& params, const Vector& w, const Vector& x, int y,
                            double weight, Vector& out) {
  require_same_dimension(w.size(), x.size(), "stochastic_subgradient");
  if (x.squaredNorm() > (1.0 + kNormSlack) * (1.0 + kNormSlack)) {
    throw std::invalid_argument("stochastic_subgradient: ||x|| > 1");
  }
  const double slope = leaky_relu_slope(params, -y * w.dot(x));
  out.noalias() -= (weight * slope * y) * x;
}

double optimal_error(const FiniteDistribution& dist) {
  const auto points = dist.points();
  return pairwise_sum(points.size(),
                      [&](std::size_t i) { return points[i].mass * points[i].law.flip_or_zero(); });
}

}  // namespace massart
