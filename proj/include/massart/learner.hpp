#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "massart/core.hpp"
#include "massart/synth.hpp"

namespace massart {

// Budget knobs shared by the learners. Unset counts fall back to the
// formulas documented on each config.
struct LearnerBudget {
  double round_constant = 4.0;  // C in the round cap
  double sgd_constant = 4.0;    // C' in the SGD iteration count
  double round_delta = 0.1;     // failure probability per round
  std::optional<std::size_t> max_rounds;
  std::optional<std::size_t> round_sample;       // threshold-search sample
  std::optional<std::size_t> sgd_iterations;
  std::optional<std::size_t> replicates;         // default ceil(log2(1/round_delta))
  std::optional<std::size_t> validation_sample;  // default 2000
  std::optional<std::size_t> unlabeled_sample;   // default dkw(epsilon/4, round_delta)
  std::optional<std::size_t> filter_sample;      // general case; default max(2000, 50 d^2)
  std::size_t rejection_cap = 10'000'000;
};

struct MarginLearnerConfig {
  double gamma = 0.1;
  double eta = 0.0;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  LearnerBudget budget;

  double lambda() const { return eta + epsilon; }
  void validate() const;
  // ceil(C ln(1/eps) / (gamma eps))
  std::size_t max_rounds() const;
  // dkw_sample_size(gamma eps^2, round_delta)
  std::size_t round_sample() const;
  // ceil(C' ln(1/round_delta) / (gamma^2 eps^2))
  std::size_t sgd_iterations() const;
  std::size_t replicates() const;
  std::size_t validation_sample() const;
  std::size_t unlabeled_sample() const;
};

struct GeneralLearnerConfig {
  double eta = 0.0;
  double epsilon = 0.1;
  int bits = 8;
  std::optional<double> beta;  // default 8 b ln(d + 2)
  std::uint64_t seed = 0;
  LearnerBudget budget;

  double lambda() const { return eta + epsilon; }
  void validate() const;
  double beta_for(Eigen::Index dimension) const;
  // Same formulas as the margin case with gamma replaced by Gamma. The round
  // cap uses the worst case Gamma = 1/(beta d).
  std::size_t max_rounds(Eigen::Index dimension) const;
  std::size_t round_sample(double gamma_eff) const;
  std::size_t sgd_iterations(double gamma_eff) const;
  std::size_t replicates() const;
  std::size_t validation_sample() const;
  std::size_t unlabeled_sample() const;
  std::size_t filter_sample(Eigen::Index dimension) const;
};

struct RoundDiagnostics {
  std::size_t round = 0;
  double sgd_loss = 0.0;  // validation loss at the normalized direction
  double mass_floor = 0.0;
  double threshold = 0.0;
  double region_mass = 0.0;  // within the threshold sample
  double conditional_error = 0.0;
  double unclassified_before = 0.0;
  double unclassified_after = 0.0;
  std::size_t sgd_attempts = 1;
  std::uint64_t rejected_draws = 0;
  // General case only.
  std::optional<double> kept_fraction;
  std::optional<double> gamma_eff;
};

struct LearnerResult {
  DecisionList list;
  std::vector<RoundDiagnostics> rounds;
  double unclassified = 1.0;  // final estimate on the held-out unlabeled sample
  bool aborted = false;
  bool round_cap_reached = false;
  std::string reason;
};

// Large-margin learner: repeatedly minimizes the LeakyRelu loss on the still
// unclassified region, thresholds, and carves the thresholded band off.
LearnerResult learn_margin(MassartOracle& oracle, const MarginLearnerConfig& config);

// {x : ||map x|| <= radius}, with map = Sigma^{-1/2} of the kept points.
struct EllipsoidFilter {
  Matrix map;
  double radius = 0.0;
  double kept_fraction = 0.0;
  std::vector<std::size_t> kept;  // column indices of the kept points
  Matrix second_moment;           // of the kept points, with the ridge

  bool contains(const Vector& x) const { return (map * x).norm() <= radius; }
};

class OutlierRemovalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Second-moment matrix (1/n) X X^T plus a ridge of 1e-12 tr/d.
Matrix regularized_second_moment(const Matrix& points);
// Symmetric inverse square root.
Matrix inverse_sqrt(const Matrix& spd);

// Iteratively drops the point of largest leverage x^T Sigma^{-1} x while it
// exceeds beta d, recomputing Sigma on the survivors. Columns are points.
// Throws OutlierRemovalError if fewer than half the points survive.
EllipsoidFilter remove_outliers(const Matrix& points, double beta);

struct Isotropy {
  Matrix map;  // c Sigma^{-1/2}
  double scale = 0.0;
  double gamma_eff = 0.0;  // c^2
};

// Rescaled isotropic map for the given points (columns): the transformed
// second moment is c^2 I and the largest transformed norm is exactly 1.
Isotropy isotropize(const Matrix& points);

// Outlier removal + isotropic rescaling per round, stages carry their
// transform and ellipsoid.
LearnerResult learn_general(MassartOracle& oracle, const GeneralLearnerConfig& config);

struct RcnLearnerConfig {
  double gamma = 0.1;
  double eta = 0.0;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  double sgd_constant = 4.0;
  double delta = 0.1;
  std::optional<std::size_t> sgd_iterations;  // default ceil(C' ln(1/delta)/(gamma^2 eps^2))
  std::optional<std::size_t> replicates;      // default ceil(log2(1/delta))
  std::optional<std::size_t> validation_sample;

  void validate() const;
  std::size_t iterations() const;
};

// c = gamma / sqrt(2 ln(2/(gamma eps)))
double rcn_smoothing_scale(double gamma, double epsilon);
// lambda = eta + c eps / sqrt(2 pi)
double rcn_lambda(double eta, double gamma, double epsilon);

struct RcnResult {
  Halfspace halfspace;
  double smoothing = 0.0;
  double lambda = 0.0;
  double value_estimate = 0.0;
  bool degenerate = false;
};

// Proper learner for random classification noise: SGD on the Gaussian-smoothed
// LeakyRelu objective with a fresh perturbation per subgradient.
RcnResult learn_rcn(MassartOracle& oracle, const RcnLearnerConfig& config);

}  // namespace massart
