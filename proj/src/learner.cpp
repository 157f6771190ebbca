#include "massart/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "massart/loss.hpp"
#include "massart/optim.hpp"
#include "massart/region.hpp"

namespace massart {

namespace {

std::size_t ceil_count(double value) {
  if (!std::isfinite(value) || value > 1e15) throw std::invalid_argument("budget formula overflows");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(value)));
}

void validate_budget(const LearnerBudget& budget) {
  if (!(budget.round_constant > 0.0) || !(budget.sgd_constant > 0.0)) {
    throw std::invalid_argument("learner budget: constants must be positive");
  }
  if (!(budget.round_delta > 0.0 && budget.round_delta < 1.0)) {
    throw std::invalid_argument("learner budget: round_delta must lie in (0, 1)");
  }
  for (const auto& count : {budget.max_rounds, budget.round_sample, budget.sgd_iterations,
                            budget.replicates, budget.validation_sample, budget.unlabeled_sample,
                            budget.filter_sample}) {
    if (count && *count == 0) throw std::invalid_argument("learner budget: counts must be positive");
  }
}

void validate_noise(double eta, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("learner: epsilon must be positive");
  if (!(eta >= 0.0)) throw std::invalid_argument("learner: eta must be nonnegative");
  if (!(eta + epsilon < 0.5)) throw std::invalid_argument("learner: lambda = eta + epsilon must be < 1/2");
}

class RoundFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stage geometry stacked row-wise so membership in the unclassified region
// can be tested for many points with one product per block of stages.
class CarvedRegions {
 public:
  explicit CarvedRegions(Eigen::Index dimension) : rows_(0, dimension) {}

  void add(const Stage& stage) {
    Entry entry;
    entry.offset = rows_.rows();
    entry.threshold = stage.threshold();
    entry.direction = stage.direction();
    entry.bounded = stage.region().has_value();
    const Matrix block = stage.transform() ? *stage.transform() : Matrix(stage.direction().transpose());
    entry.count = block.rows();
    if (!stage.transform()) entry.direction = Vector::Ones(1);
    rows_.conservativeResize(rows_.rows() + block.rows(), Eigen::NoChange);
    rows_.bottomRows(block.rows()) = block;
    entries_.push_back(std::move(entry));
  }

  // Indices (from `active`) of columns of X that no stage owns.
  std::vector<std::size_t> unclaimed(const Matrix& X, std::vector<std::size_t> active) const {
    constexpr std::size_t kBlock = 64;
    for (std::size_t s0 = 0; s0 < entries_.size() && !active.empty(); s0 += kBlock) {
      const std::size_t s1 = std::min(entries_.size(), s0 + kBlock);
      const Eigen::Index r0 = entries_[s0].offset;
      const Eigen::Index r1 = entries_[s1 - 1].offset + entries_[s1 - 1].count;
      const std::vector<Eigen::Index> cols(active.begin(), active.end());
      const Matrix Z = rows_.middleRows(r0, r1 - r0) * X(Eigen::all, cols);
      std::vector<std::size_t> next;
      next.reserve(active.size());
      for (std::size_t j = 0; j < active.size(); ++j) {
        bool claimed = false;
        for (std::size_t s = s0; s < s1 && !claimed; ++s) {
          const Entry& e = entries_[s];
          const auto z = Z.col(static_cast<Eigen::Index>(j)).segment(e.offset - r0, e.count);
          if (e.bounded && z.norm() > 1.0) continue;
          claimed = std::abs(e.direction.dot(z)) >= e.threshold;
        }
        if (!claimed) next.push_back(active[j]);
      }
      active = std::move(next);
    }
    return active;
  }

 private:
  struct Entry {
    Eigen::Index offset = 0;
    Eigen::Index count = 0;
    Vector direction;
    double threshold = 0.0;
    bool bounded = false;
  };
  Matrix rows_;
  std::vector<Entry> entries_;
};

struct Batch {
  Matrix X;
  std::vector<int> y;
  std::uint64_t rejected = 0;
};

// Draws `count` points from D conditioned on the unclassified region (and on
// ||ellipsoid x|| <= 1 when given), by rejection.
Batch draw_conditioned(MassartOracle& oracle, const CarvedRegions& carved, const Matrix* ellipsoid,
                       std::size_t count, bool labeled, std::size_t cap) {
  const Eigen::Index d = oracle.dimension();
  Batch batch;
  batch.X.resize(d, static_cast<Eigen::Index>(count));
  if (labeled) batch.y.reserve(count);
  std::size_t filled = 0;
  while (filled < count) {
    const std::size_t chunk = std::clamp<std::size_t>(2 * (count - filled), 256, 8192);
    Matrix candidates(d, static_cast<Eigen::Index>(chunk));
    for (std::size_t j = 0; j < chunk; ++j) candidates.col(static_cast<Eigen::Index>(j)) = oracle.draw_point();
    std::vector<std::size_t> all(chunk);
    for (std::size_t j = 0; j < chunk; ++j) all[j] = j;
    std::vector<std::size_t> inside = carved.unclaimed(candidates, std::move(all));
    std::size_t accepted = 0;
    for (std::size_t j : inside) {
      if (filled == count) break;
      const Vector x = candidates.col(static_cast<Eigen::Index>(j));
      if (ellipsoid && (*ellipsoid * x).norm() > 1.0) continue;
      batch.X.col(static_cast<Eigen::Index>(filled)) = x;
      if (labeled) batch.y.push_back(oracle.label(x));
      ++filled;
      ++accepted;
    }
    batch.rejected += chunk - accepted;
    if (batch.rejected > cap) throw RoundFailure("rejection cap exceeded while sampling the unclassified region");
  }
  return batch;
}

double mean_leaky_loss(const LeakyReluParams& params, const Matrix& X, const std::vector<int>& y,
                       const Vector& w) {
  const Vector scores = X.transpose() * w;
  const double total = pairwise_sum(y.size(), [&](std::size_t i) {
    return leaky_relu(params, -y[i] * scores[static_cast<Eigen::Index>(i)]);
  });
  return total / static_cast<double>(y.size());
}

struct DirectionFit {
  SgdResult sgd;
  double loss = 0.0;
  std::size_t attempts = 0;
  std::uint64_t rejected = 0;
};

// Draws fresh SGD and validation samples via `draw`, maps them through
// `transform`, and runs amplified SGD. One retry on a degenerate average.
template <class Draw, class Transform>
DirectionFit fit_direction(const LeakyReluParams& params, Eigen::Index dim, std::size_t iterations,
                           std::size_t replicates, std::size_t validation, std::uint64_t seed,
                           const Draw& draw, const Transform& transform) {
  DirectionFit fit;
  for (std::size_t attempt = 0; attempt < 2; ++attempt) {
    ++fit.attempts;
    Batch pool = draw(replicates * iterations);
    Batch val = draw(validation);
    fit.rejected += pool.rejected + val.rejected;
    const Matrix P = transform(pool.X);
    const Matrix V = transform(val.X);

    std::size_t next = 0;
    SubgradientOracle oracle = [&](const Vector& w, Rng&, Vector& out) {
      const Eigen::Index j = static_cast<Eigen::Index>(next++ % pool.y.size());
      const int y = pool.y[static_cast<std::size_t>(j)];
      const double slope = leaky_relu_slope(params, -y * w.dot(P.col(j)));
      out.noalias() = (-slope * y) * P.col(j);
    };
    ValueEstimator estimator = [&](const Vector& w) { return mean_leaky_loss(params, V, val.y, w); };
    SgdConfig config;
    config.iterations = iterations;
    config.seed = Rng::derive_seed(seed, attempt);
    fit.sgd = amplified_sgd(oracle, dim, config, replicates, estimator);
    if (!fit.sgd.degenerate) {
      fit.loss = estimator(fit.sgd.direction);
      return fit;
    }
  }
  throw RoundFailure("SGD average degenerate twice in a row");
}

Matrix draw_unlabeled(MassartOracle& oracle, std::size_t n) {
  Matrix U(oracle.dimension(), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) U.col(static_cast<Eigen::Index>(j)) = oracle.draw_point();
  return U;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

void drop_owned(const Stage& stage, const Matrix& U, std::vector<std::size_t>& remaining) {
  std::erase_if(remaining, [&](std::size_t j) {
    return stage.owns(U.col(static_cast<Eigen::Index>(j)));
  });
}

}  // namespace

void MarginLearnerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("learner: gamma must lie in (0, 1)");
  validate_noise(eta, epsilon);
  validate_budget(budget);
}

std::size_t MarginLearnerConfig::max_rounds() const {
  return budget.max_rounds.value_or(
      ceil_count(budget.round_constant * std::log(1.0 / epsilon) / (gamma * epsilon)));
}

std::size_t MarginLearnerConfig::round_sample() const {
  return budget.round_sample.value_or(dkw_sample_size(gamma * epsilon * epsilon, budget.round_delta));
}

std::size_t MarginLearnerConfig::sgd_iterations() const {
  return budget.sgd_iterations.value_or(ceil_count(
      budget.sgd_constant * std::log(1.0 / budget.round_delta) / (gamma * gamma * epsilon * epsilon)));
}

std::size_t MarginLearnerConfig::replicates() const {
  return budget.replicates.value_or(replicates_for(budget.round_delta));
}

std::size_t MarginLearnerConfig::validation_sample() const {
  return budget.validation_sample.value_or(2000);
}

std::size_t MarginLearnerConfig::unlabeled_sample() const {
  return budget.unlabeled_sample.value_or(dkw_sample_size(epsilon / 4.0, budget.round_delta));
}

void GeneralLearnerConfig::validate() const {
  validate_noise(eta, epsilon);
  if (bits < 2) throw std::invalid_argument("learner: bits must be >= 2");
  if (beta && !(*beta > 1.0)) throw std::invalid_argument("learner: beta must exceed 1");
  validate_budget(budget);
}

double GeneralLearnerConfig::beta_for(Eigen::Index dimension) const {
  return beta.value_or(8.0 * bits * std::log(static_cast<double>(dimension) + 2.0));
}

std::size_t GeneralLearnerConfig::max_rounds(Eigen::Index dimension) const {
  const double worst_gamma = 1.0 / (beta_for(dimension) * static_cast<double>(dimension));
  return budget.max_rounds.value_or(
      ceil_count(budget.round_constant * std::log(1.0 / epsilon) / (worst_gamma * epsilon)));
}

std::size_t GeneralLearnerConfig::round_sample(double gamma_eff) const {
  return budget.round_sample.value_or(
      dkw_sample_size(gamma_eff * epsilon * epsilon, budget.round_delta));
}

std::size_t GeneralLearnerConfig::sgd_iterations(double gamma_eff) const {
  return budget.sgd_iterations.value_or(
      ceil_count(budget.sgd_constant * std::log(1.0 / budget.round_delta) /
                 (gamma_eff * gamma_eff * epsilon * epsilon)));
}

std::size_t GeneralLearnerConfig::replicates() const {
  return budget.replicates.value_or(replicates_for(budget.round_delta));
}

std::size_t GeneralLearnerConfig::validation_sample() const {
  return budget.validation_sample.value_or(2000);
}

std::size_t GeneralLearnerConfig::unlabeled_sample() const {
  return budget.unlabeled_sample.value_or(dkw_sample_size(epsilon / 4.0, budget.round_delta));
}

std::size_t GeneralLearnerConfig::filter_sample(Eigen::Index dimension) const {
  const auto d = static_cast<std::size_t>(dimension);
  return budget.filter_sample.value_or(std::max<std::size_t>(2000, 50 * d * d));
}

LearnerResult learn_margin(MassartOracle& oracle, const MarginLearnerConfig& config) {
  config.validate();
  const Eigen::Index d = oracle.dimension();
  const LeakyReluParams params(config.lambda());
  const double floor = config.gamma * config.epsilon;
  const std::size_t rounds = config.max_rounds();
  const std::size_t m = config.round_sample();
  const std::size_t cap = config.budget.rejection_cap;

  LearnerResult result;
  CarvedRegions carved(d);
  const Matrix U = draw_unlabeled(oracle, config.unlabeled_sample());
  std::vector<std::size_t> remaining = iota_indices(static_cast<std::size_t>(U.cols()));
  result.unclassified = 1.0;

  auto draw = [&](std::size_t n) { return draw_conditioned(oracle, carved, nullptr, n, true, cap); };
  auto identity = [](const Matrix& X) -> const Matrix& { return X; };

  for (std::size_t round = 0; round < rounds && result.unclassified >= config.epsilon; ++round) {
    RoundDiagnostics diag;
    diag.round = round;
    diag.mass_floor = floor;
    diag.unclassified_before = result.unclassified;
    try {
      const DirectionFit fit =
          fit_direction(params, d, config.sgd_iterations(), config.replicates(),
                        config.validation_sample(), Rng::derive_seed(config.seed, round), draw, identity);
      const Batch sample = draw(m);
      const Vector scores = sample.X.transpose() * fit.sgd.direction;
      const ThresholdChoice choice = find_threshold_scored(
          std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), sample.y,
          floor);
      Stage stage(fit.sgd.direction, choice.threshold);
      carved.add(stage);
      drop_owned(stage, U, remaining);
      result.list.append(std::move(stage));

      diag.sgd_loss = fit.loss;
      diag.sgd_attempts = fit.attempts;
      diag.rejected_draws = fit.rejected + sample.rejected;
      diag.threshold = choice.threshold;
      diag.region_mass = choice.region_mass;
      diag.conditional_error = choice.conditional_error;
    } catch (const RoundFailure& e) {
      result.aborted = true;
      result.reason = e.what();
      break;
    } catch (const ThresholdInfeasible& e) {
      result.aborted = true;
      result.reason = e.what();
      break;
    }
    result.unclassified = static_cast<double>(remaining.size()) / static_cast<double>(U.cols());
    diag.unclassified_after = result.unclassified;
    result.rounds.push_back(diag);
  }
  result.round_cap_reached = !result.aborted && result.unclassified >= config.epsilon;
  return result;
}

Matrix regularized_second_moment(const Matrix& points) {
  if (points.cols() == 0) throw EmptySampleError("second moment of an empty sample");
  const Eigen::Index d = points.rows();
  Matrix sigma = (points * points.transpose()) / static_cast<double>(points.cols());
  const double ridge = 1e-12 * sigma.trace() / static_cast<double>(d);
  sigma.diagonal().array() += ridge;
  return sigma;
}

Matrix inverse_sqrt(const Matrix& spd) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("inverse_sqrt: matrix is not positive definite");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

EllipsoidFilter remove_outliers(const Matrix& points, double beta) {
  const Eigen::Index d = points.rows();
  const auto n = static_cast<std::size_t>(points.cols());
  if (!(beta > 1.0)) throw std::invalid_argument("remove_outliers: beta must exceed 1");
  if (n < static_cast<std::size_t>(d) + 1) {
    throw std::invalid_argument("remove_outliers: need at least d + 1 points");
  }
  const double limit = beta * static_cast<double>(d);

  std::vector<std::size_t> kept = iota_indices(n);
  for (;;) {
    const std::vector<Eigen::Index> cols(kept.begin(), kept.end());
    const Matrix K = points(Eigen::all, cols);
    const Matrix sigma = regularized_second_moment(K);
    const Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw OutlierRemovalError("remove_outliers: singular second moment");
    const Matrix whitened = llt.matrixL().solve(K);
    const Vector leverage = whitened.colwise().squaredNorm().transpose();
    Eigen::Index worst = 0;
    const double top = leverage.maxCoeff(&worst);
    if (top <= limit) {
      EllipsoidFilter filter;
      filter.map = inverse_sqrt(sigma);
      filter.radius = std::sqrt(limit);
      filter.kept_fraction = static_cast<double>(kept.size()) / static_cast<double>(n);
      filter.kept = std::move(kept);
      filter.second_moment = sigma;
      return filter;
    }
    kept.erase(kept.begin() + worst);
    if (2 * kept.size() < n) {
      throw OutlierRemovalError("remove_outliers: fewer than half of the points survive");
    }
  }
}

Isotropy isotropize(const Matrix& points) {
  const Matrix root = inverse_sqrt(regularized_second_moment(points));
  const double largest = (root * points).colwise().norm().maxCoeff();
  if (!(largest > 0.0)) throw std::invalid_argument("isotropize: all points are zero");
  Isotropy iso;
  iso.scale = 1.0 / largest;
  iso.map = iso.scale * root;
  iso.gamma_eff = iso.scale * iso.scale;
  return iso;
}

LearnerResult learn_general(MassartOracle& oracle, const GeneralLearnerConfig& config) {
  config.validate();
  const Eigen::Index d = oracle.dimension();
  const LeakyReluParams params(config.lambda());
  const double beta = config.beta_for(d);
  const std::size_t rounds = config.max_rounds(d);
  const std::size_t cap = config.budget.rejection_cap;

  LearnerResult result;
  CarvedRegions carved(d);
  const Matrix U = draw_unlabeled(oracle, config.unlabeled_sample());
  std::vector<std::size_t> remaining = iota_indices(static_cast<std::size_t>(U.cols()));
  result.unclassified = 1.0;

  for (std::size_t round = 0; round < rounds && result.unclassified >= config.epsilon; ++round) {
    RoundDiagnostics diag;
    diag.round = round;
    diag.unclassified_before = result.unclassified;
    try {
      const Batch fitting = draw_conditioned(oracle, carved, nullptr, config.filter_sample(d), false, cap);
      EllipsoidFilter filter;
      try {
        filter = remove_outliers(fitting.X, beta);
      } catch (const OutlierRemovalError& e) {
        throw RoundFailure(e.what());
      }
      const std::vector<Eigen::Index> cols(filter.kept.begin(), filter.kept.end());
      const Isotropy iso = isotropize(fitting.X(Eigen::all, cols));
      const Matrix& A = iso.map;
      const double floor = std::min(1.0, iso.gamma_eff * config.epsilon);

      auto draw = [&](std::size_t n) { return draw_conditioned(oracle, carved, &A, n, true, cap); };
      auto to_isotropic = [&](const Matrix& X) -> Matrix { return A * X; };
      const DirectionFit fit = fit_direction(
          params, d, config.sgd_iterations(iso.gamma_eff), config.replicates(),
          config.validation_sample(), Rng::derive_seed(config.seed, round), draw, to_isotropic);
      const Batch sample = draw(config.round_sample(iso.gamma_eff));
      const Vector scores = (A * sample.X).transpose() * fit.sgd.direction;
      const ThresholdChoice choice = find_threshold_scored(
          std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), sample.y,
          floor);
      Stage stage(fit.sgd.direction, choice.threshold, A, Ellipsoid{A, 1.0});
      carved.add(stage);
      drop_owned(stage, U, remaining);
      result.list.append(std::move(stage));

      diag.mass_floor = floor;
      diag.kept_fraction = filter.kept_fraction;
      diag.gamma_eff = iso.gamma_eff;
      diag.sgd_loss = fit.loss;
      diag.sgd_attempts = fit.attempts;
      diag.rejected_draws = fitting.rejected + fit.rejected + sample.rejected;
      diag.threshold = choice.threshold;
      diag.region_mass = choice.region_mass;
      diag.conditional_error = choice.conditional_error;
    } catch (const RoundFailure& e) {
      result.aborted = true;
      result.reason = e.what();
      break;
    } catch (const ThresholdInfeasible& e) {
      result.aborted = true;
      result.reason = e.what();
      break;
    }
    result.unclassified = static_cast<double>(remaining.size()) / static_cast<double>(U.cols());
    diag.unclassified_after = result.unclassified;
    result.rounds.push_back(diag);
  }
  result.round_cap_reached = !result.aborted && result.unclassified >= config.epsilon;
  return result;
}

void RcnLearnerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("learn_rcn: gamma must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("learn_rcn: epsilon must lie in (0, 1)");
  if (!(eta >= 0.0)) throw std::invalid_argument("learn_rcn: eta must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("learn_rcn: delta must lie in (0, 1)");
  if (!(sgd_constant > 0.0)) throw std::invalid_argument("learn_rcn: sgd_constant must be positive");
  if (!(rcn_lambda(eta, gamma, epsilon) < 0.5)) {
    throw std::invalid_argument("learn_rcn: lambda must be < 1/2");
  }
}

std::size_t RcnLearnerConfig::iterations() const {
  return sgd_iterations.value_or(
      ceil_count(sgd_constant * std::log(1.0 / delta) / (gamma * gamma * epsilon * epsilon)));
}

double rcn_smoothing_scale(double gamma, double epsilon) {
  return gamma / std::sqrt(2.0 * std::log(2.0 / (gamma * epsilon)));
}

double rcn_lambda(double eta, double gamma, double epsilon) {
  return eta + rcn_smoothing_scale(gamma, epsilon) * epsilon / std::sqrt(2.0 * std::numbers::pi);
}

RcnResult learn_rcn(MassartOracle& oracle, const RcnLearnerConfig& config) {
  config.validate();
  if (!std::holds_alternative<ConstantNoise>(oracle.policy())) {
    throw std::invalid_argument("learn_rcn: oracle must use a constant noise rate");
  }
  const Eigen::Index d = oracle.dimension();
  const double c = rcn_smoothing_scale(config.gamma, config.epsilon);
  const LeakyReluParams params(rcn_lambda(config.eta, config.gamma, config.epsilon));
  // Perturbations longer than r_max are redrawn, so ||x + r|| <= bound.
  const double r_max = c * (std::sqrt(static_cast<double>(d)) + 8.0);
  const double bound = 1.0 + r_max;

  auto perturbation = [&](Rng& rng) {
    Vector r(d);
    do {
      for (Eigen::Index i = 0; i < d; ++i) r[i] = c * rng.normal();
    } while (r.norm() > r_max);
    return r;
  };

  const std::size_t iterations = config.iterations();
  const std::size_t replicates = config.replicates.value_or(replicates_for(config.delta));
  const std::size_t validation = config.validation_sample.value_or(2000);
  const std::vector<LabeledExample> pool = oracle.sample(iterations * replicates);
  const std::vector<LabeledExample> val = oracle.sample(validation);
  Rng val_rng(Rng::derive_seed(config.seed, 1));
  Matrix val_points(d, static_cast<Eigen::Index>(validation));
  std::vector<int> val_labels(validation);
  for (std::size_t j = 0; j < validation; ++j) {
    val_points.col(static_cast<Eigen::Index>(j)) = val[j].x() + perturbation(val_rng);
    val_labels[j] = val[j].y();
  }

  std::size_t next = 0;
  SubgradientOracle sub = [&](const Vector& w, Rng& rng, Vector& out) {
    const LabeledExample& ex = pool[next++ % pool.size()];
    const Vector shifted = ex.x() + perturbation(rng);
    const double slope = leaky_relu_slope(params, -ex.y() * w.dot(shifted));
    out.noalias() = (-slope * ex.y() / bound) * shifted;
  };
  ValueEstimator estimator = [&](const Vector& w) {
    return mean_leaky_loss(params, val_points, val_labels, w);
  };
  SgdConfig sgd;
  sgd.iterations = iterations;
  sgd.seed = Rng::derive_seed(config.seed, 0);
  const SgdResult fit = amplified_sgd(sub, d, sgd, replicates, estimator);
  return RcnResult{Halfspace(fit.direction), c, params.lambda(), fit.value_estimate, fit.degenerate};
}

}  // namespace massart
