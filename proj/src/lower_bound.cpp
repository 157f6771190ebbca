#include "massart/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace massart {

VerifyMode parse_verify_mode(const std::string& name) {
  if (name == "surrogate") return VerifyMode::Surrogate;
  if (name == "surrogate_plus_threshold" || name == "threshold") {
    return VerifyMode::SurrogatePlusThreshold;
  }
  throw std::invalid_argument("unknown verification mode: " + name);
}

std::string verify_mode_name(VerifyMode mode) {
  return mode == VerifyMode::Surrogate ? "surrogate" : "surrogate_plus_threshold";
}

double surrogate_objective(const SurrogateLoss& phi, const FiniteDistribution& dist, const Vector& w) {
  const auto points = dist.points();
  return pairwise_sum(points.size(), [&](std::size_t i) {
    const auto& p = points[i];
    const double margin = p.law.label * w.dot(p.x);
    const double flip = p.law.flip_or_zero();
    return p.mass * ((1.0 - flip) * phi.value(margin) + flip * phi.value(-margin));
  });
}

Vector surrogate_gradient(const SurrogateLoss& phi, const FiniteDistribution& dist, const Vector& w) {
  Vector grad = Vector::Zero(w.size());
  for (const auto& p : dist.points()) {
    const double margin = p.law.label * w.dot(p.x);
    const double flip = p.law.flip_or_zero();
    const double coeff = (1.0 - flip) * phi.derivative(margin) - flip * phi.derivative(-margin);
    grad += p.mass * coeff * p.law.label * p.x;
  }
  return grad;
}

namespace {

Vector polar(double radius, double angle) {
  Vector w(2);
  w << radius * std::cos(angle), radius * std::sin(angle);
  return w;
}

}  // namespace

SurrogateMinimum minimize_surrogate(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                    std::size_t angles, std::size_t radii) {
  require_same_dimension(2, dist.dimension(), "minimize_surrogate");
  SurrogateMinimum best{Vector::Zero(2), surrogate_objective(phi, dist, Vector::Zero(2))};
  for (std::size_t j = 1; j <= radii; ++j) {
    const double radius = static_cast<double>(j) / static_cast<double>(radii);
    for (std::size_t k = 0; k < angles; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
      Vector w = polar(radius, angle);
      if (j == radii && k == 0) w << 1.0, 0.0;  // keep e1 exact
      const double value = surrogate_objective(phi, dist, w);
      if (value < best.value) best = {std::move(w), value};
    }
  }

  // Pattern search in the disk.
  const std::vector<std::pair<double, double>> moves = {
      {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  double step = 0.5 / static_cast<double>(radii);
  while (step > 1e-10) {
    bool improved = false;
    for (const auto& [dx, dy] : moves) {
      Vector trial = best.w;
      trial[0] += step * dx;
      trial[1] += step * dy;
      const double norm = trial.norm();
      if (norm > 1.0) trial /= norm;
      const double value = surrogate_objective(phi, dist, trial);
      if (value < best.value - 1e-14 * std::max(1.0, std::abs(best.value))) {
        best = {std::move(trial), value};
        improved = true;
        break;
      }
    }
    if (!improved) step /= 2.0;
  }
  return best;
}

KktCheck certify_boundary_minimizer(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                    const Vector& v) {
  require_same_dimension(2, v.size(), "certify_boundary_minimizer");
  const Vector grad = surrogate_gradient(phi, dist, v);
  Vector perp(2);
  perp << -v[1], v[0];
  KktCheck check;
  check.tangential = grad.dot(perp);
  check.radial = grad.dot(v);
  check.certified = std::abs(check.tangential) <= 1e-9 && check.radial <= 1e-12;
  return check;
}

double min_tangential_derivative(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                 const Vector& w, double h) {
  const double base = surrogate_objective(phi, dist, w);
  double worst = std::numeric_limits<double>::infinity();
  for (double angle : {h, -h}) {
    Vector rotated(2);
    rotated << std::cos(angle) * w[0] - std::sin(angle) * w[1],
        std::sin(angle) * w[0] + std::cos(angle) * w[1];
    worst = std::min(worst, (surrogate_objective(phi, dist, rotated) - base) / h);
  }
  return worst;
}

double sign_error(const FiniteDistribution& dist, const Vector& w) {
  return dist.expected_error(FunctionPredictor{[&](const Vector& x) { return sign_label(w.dot(x)); }});
}

double best_threshold_error(const FiniteDistribution& dist, const Vector& w) {
  const auto points = dist.points();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& candidate : points) {
    const double t = std::abs(w.dot(candidate.x));
    double mass = 0.0;
    double wrong = 0.0;
    for (const auto& p : points) {
      const double score = w.dot(p.x);
      if (std::abs(score) < t) continue;
      mass += p.mass;
      wrong += p.mass * p.law.error_of(sign_label(score));
    }
    if (mass > 0.0) best = std::min(best, wrong / mass);
  }
  return best;
}

LowerBoundReport verify_lower_bound(const std::string& phi_id, double eta, double gamma,
                                    VerifyMode mode) {
  const SurrogateLoss phi = SurrogateLoss::from_id(phi_id);
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("verify_lower_bound: eta outside (0, 1/2)");
  const double gamma_cap =
      mode == VerifyMode::Surrogate ? (std::sqrt(3.0) - 1.0) / 4.0 : std::sqrt(3.0) / 8.0;
  if (!(gamma > 0.0 && gamma <= gamma_cap)) {
    throw std::invalid_argument("verify_lower_bound: gamma outside the construction's range");
  }

  const Vector e1 = Vector::Unit(2, 0);
  const bool predicate = case1_point(phi, eta).has_value();
  bool certified = false;
  std::optional<LowerBoundInstance> instance;
  if (mode == VerifyMode::Surrogate) {
    if (predicate) {
      LowerBoundInstance candidate = build_case1(phi, eta, gamma);
      certified = certify_boundary_minimizer(phi, candidate.distribution, e1).certified;
      if (certified) instance = std::move(candidate);
    }
    if (!instance) instance = build_case2(phi, eta, gamma);
  } else {
    instance = build_case2_modified(phi, eta, gamma);
  }

  const SurrogateMinimum minimum = minimize_surrogate(phi, instance->distribution);
  LowerBoundReport report{phi.id(), eta, gamma, mode, predicate, certified, *instance,
                          minimum.w, minimum.value};
  report.stationarity = min_tangential_derivative(phi, instance->distribution, minimum.w);
  report.sign_error = sign_error(instance->distribution, minimum.w);
  report.measured_error = mode == VerifyMode::Surrogate
                              ? report.sign_error
                              : best_threshold_error(instance->distribution, minimum.w);
  report.predicted_error_bound = instance->predicted_error_bound;
  report.theorem_bound = mode == VerifyMode::Surrogate
                             ? std::min(eta / (8.0 * gamma), 0.5)
                             : instance->predicted_error_bound;
  report.passed = report.measured_error >= report.predicted_error_bound - kLowerBoundTolerance &&
                  report.measured_error >= report.theorem_bound - kLowerBoundTolerance;
  return report;
}

}  // namespace massart
