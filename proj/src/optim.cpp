#include "massart/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace massart {

double SgdConfig::step_size() const {
  return step.value_or(1.0 / std::sqrt(static_cast<double>(iterations)));
}

void SgdConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("SgdConfig: iterations must be >= 1");
  if (batch < 1) throw std::invalid_argument("SgdConfig: batch must be >= 1");
  const double rho = step_size();
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("SgdConfig: step must be positive");
  }
}

void project_to_unit_ball(Vector& w) {
  const double norm = w.norm();
  if (norm > 1.0) w /= norm;
}

SgdResult projected_sgd(const SubgradientOracle& oracle, Eigen::Index dimension,
                        const SgdConfig& config, const ValueEstimator& estimator) {
  config.validate();
  if (dimension < 1) throw DimensionError("projected_sgd: dimension must be positive");
  Rng rng(config.seed);
  const double rho = config.step_size();
  const double bound = (1.0 + 1e-9) * (1.0 + 1e-9);

  Vector w = Vector::Zero(dimension);
  Vector sum = Vector::Zero(dimension);
  Vector v(dimension);
  Vector g(dimension);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    sum += w;
    if (config.batch == 1) {
      v.setZero();
      oracle(w, rng, v);
      if (v.size() != dimension || v.squaredNorm() > bound) {
        throw std::invalid_argument("projected_sgd: subgradient outside the unit ball");
      }
    } else {
      g.setZero();
      for (std::size_t b = 0; b < config.batch; ++b) {
        v.setZero();
        oracle(w, rng, v);
        if (v.size() != dimension || v.squaredNorm() > bound) {
          throw std::invalid_argument("projected_sgd: subgradient outside the unit ball");
        }
        g += v;
      }
      v = g / static_cast<double>(config.batch);
    }
    w.noalias() -= rho * v;
    project_to_unit_ball(w);
  }

  SgdResult result;
  result.averaged = sum / static_cast<double>(config.iterations);
  const double norm = result.averaged.norm();
  if (norm < kDegenerateNorm) {
    result.direction = Vector::Unit(dimension, 0);
    result.degenerate = true;
  } else {
    result.direction = result.averaged / norm;
  }
  result.value_estimate =
      estimator ? estimator(result.averaged) : std::numeric_limits<double>::quiet_NaN();
  return result;
}

std::size_t replicates_for(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("replicates_for: delta must lie in (0, 1)");
  }
  const double r = std::ceil(std::log2(1.0 / delta) - 1e-12);
  return r < 1.0 ? 1 : static_cast<std::size_t>(r);
}

SgdResult amplified_sgd(const SubgradientOracle& oracle, Eigen::Index dimension,
                        const SgdConfig& config, std::size_t replicates,
                        const ValueEstimator& estimator) {
  if (replicates < 1) throw std::invalid_argument("amplified_sgd: need at least one replicate");
  if (!estimator) throw std::invalid_argument("amplified_sgd: estimator required");
  std::optional<SgdResult> best;
  for (std::size_t r = 0; r < replicates; ++r) {
    SgdConfig replica = config;
    replica.seed = Rng::derive_seed(config.seed, r);
    SgdResult run = projected_sgd(oracle, dimension, replica, estimator);
    const bool better =
        !best || (best->degenerate && !run.degenerate) ||
        (best->degenerate == run.degenerate && run.value_estimate < best->value_estimate);
    if (better) best = std::move(run);
  }
  return std::move(*best);
}

}  // namespace massart
