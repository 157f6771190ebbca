#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "massart/core.hpp"
#include "massart/rng.hpp"

namespace massart {

struct SgdConfig {
  std::size_t iterations = 1;
  std::optional<double> step;  // defaults to 1 / sqrt(iterations)
  std::uint64_t seed = 0;
  std::size_t batch = 1;

  double step_size() const;
  void validate() const;
};

struct SgdResult {
  Vector averaged;   // (1/T) sum_{t<T} w(t), starting from w(0) = 0
  Vector direction;  // averaged / ||averaged||, or e1 when degenerate
  double value_estimate = 0.0;  // estimator(averaged), NaN without an estimator
  bool degenerate = false;
};

// Writes a stochastic subgradient at w into `out` (already sized). Must satisfy ||out|| <= 1.
using SubgradientOracle = std::function<void(const Vector& w, Rng& rng, Vector& out)>;
using ValueEstimator = std::function<double(const Vector& w)>;

inline constexpr double kDegenerateNorm = 1e-12;

// Projected subgradient descent on the unit ball with iterate averaging.
SgdResult projected_sgd(const SubgradientOracle& oracle, Eigen::Index dimension,
                        const SgdConfig& config, const ValueEstimator& estimator = {});

// ceil(log2(1/delta)), at least 1.
std::size_t replicates_for(double delta);

// Runs `replicates` independent copies (seeds split from config.seed) and
// keeps the one with the smallest estimator value; non-degenerate runs win
// over degenerate ones.
SgdResult amplified_sgd(const SubgradientOracle& oracle, Eigen::Index dimension,
                        const SgdConfig& config, std::size_t replicates,
                        const ValueEstimator& estimator);

// Euclidean projection onto {||w|| <= 1}, in place.
void project_to_unit_ball(Vector& w);

}  // namespace massart
