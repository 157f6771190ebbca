#include "massart/region.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace massart {

std::size_t dkw_sample_size(double cdf_accuracy, double delta) {
  if (!(cdf_accuracy > 0.0 && cdf_accuracy < 1.0)) {
    throw std::invalid_argument("dkw_sample_size: accuracy must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("dkw_sample_size: delta must lie in (0, 1)");
  }
  const double m = std::log(2.0 / delta) / (2.0 * cdf_accuracy * cdf_accuracy);
  // Do not let log rounding push an exact integer up by one.
  const double nearest = std::round(m);
  if (std::abs(m - nearest) <= 1e-12 * std::max(1.0, m)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(m));
}

ThresholdChoice find_threshold(const Vector& w, std::span<const LabeledExample> sample,
                               double mass_floor) {
  if (sample.empty()) throw EmptySampleError("find_threshold: empty sample");
  std::vector<double> scores(sample.size());
  std::vector<int> labels(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    require_same_dimension(w.size(), sample[i].x().size(), "find_threshold");
    scores[i] = w.dot(sample[i].x());
    labels[i] = sample[i].y();
  }
  return find_threshold_scored(scores, labels, mass_floor);
}

ThresholdChoice find_threshold_scored(std::span<const double> scores, std::span<const int> labels,
                                      double mass_floor) {
  const std::size_t n = scores.size();
  if (n == 0) throw EmptySampleError("find_threshold: empty sample");
  if (labels.size() != n) throw DimensionError("find_threshold: scores and labels differ in length");
  if (!(mass_floor > 0.0 && mass_floor <= 1.0)) {
    throw std::invalid_argument("find_threshold: mass_floor must lie in (0, 1]");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(scores[a]) > std::abs(scores[b]);
  });

  const double needed = mass_floor * static_cast<double>(n);
  bool found = false;
  std::uint64_t best_inside = 0;
  std::uint64_t best_mistakes = 0;
  double best_threshold = 0.0;

  std::uint64_t inside = 0;
  std::uint64_t mistakes = 0;
  std::size_t i = 0;
  while (i < n) {
    const double t = std::abs(scores[order[i]]);
    while (i < n && std::abs(scores[order[i]]) == t) {
      const std::size_t k = order[i];
      mistakes += sign_label(scores[k]) != labels[k];
      ++inside;
      ++i;
    }
    if (static_cast<double>(inside) < needed) continue;
    // mistakes / inside < best_mistakes / best_inside, exactly.
    if (!found || mistakes * best_inside < best_mistakes * inside) {
      found = true;
      best_inside = inside;
      best_mistakes = mistakes;
      best_threshold = inside == n ? 0.0 : t;
    }
  }
  if (!found) throw ThresholdInfeasible("find_threshold: no threshold meets the mass floor");

  ThresholdChoice choice;
  choice.threshold = best_threshold;
  choice.region_count = best_inside;
  choice.region_mass = static_cast<double>(best_inside) / static_cast<double>(n);
  choice.conditional_error = static_cast<double>(best_mistakes) / static_cast<double>(best_inside);
  return choice;
}

StructuralWitness structural_oracle(const LeakyReluParams& params, const Vector& w,
                                    const FiniteDistribution& dist) {
  const double loss = closed_form_loss(params, w, dist);
  if (!(loss < 0.0)) {
    throw std::invalid_argument("structural_oracle: requires L(w) < 0");
  }
  const double lambda = params.lambda();
  const double mass_needed = -loss / (2.0 * lambda);
  const double error_allowed = lambda + loss / 2.0;
  constexpr double kSlack = 1e-12;

  const auto points = dist.points();
  std::vector<double> candidates;
  candidates.reserve(points.size());
  for (const auto& p : points) candidates.push_back(std::abs(w.dot(p.x)));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (double t : candidates) {
    double mass = 0.0;
    double wrong = 0.0;
    for (const auto& p : points) {
      const double score = w.dot(p.x);
      if (std::abs(score) < t) continue;
      mass += p.mass;
      wrong += p.mass * p.law.error_of(sign_label(score));
    }
    if (mass <= 0.0) continue;
    const double cond = wrong / mass;
    if (mass >= mass_needed - kSlack && cond <= error_allowed + kSlack) {
      return {t, mass, cond, loss};
    }
  }
  throw StructuralLemmaViolation("structural_oracle: no threshold satisfies both conditions");
}

}  // namespace massart
