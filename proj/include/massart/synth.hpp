#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "massart/core.hpp"
#include "massart/rng.hpp"

namespace massart {

// ---------------------------------------------------------------------------
// Noise policies: x -> eta(x)

// eta(x) = eta everywhere (random classification noise).
struct ConstantNoise {
  double eta = 0.0;
};

// eta(x) = eta when |<w*, x>| < band, 0 otherwise.
struct MarginBandNoise {
  double eta = 0.0;
  double band = 0.0;
};

// Seeded hyperplanes cut space into cells; each cell gets its own rate in [0, eta].
struct RandomRegionNoise {
  double eta = 0.0;
  std::vector<Vector> normals;
  std::vector<double> cell_rates;  // indexed by the sign pattern of <normal_k, x>
};

using NoisePolicy = std::variant<ConstantNoise, MarginBandNoise, RandomRegionNoise>;

enum class PolicyKind { Constant, MarginBand, RandomRegion };

PolicyKind parse_policy_kind(const std::string& name);
std::string policy_kind_name(PolicyKind kind);

double noise_rate(const NoisePolicy& policy, const Halfspace& target, const Vector& x);

RandomRegionNoise make_random_region_noise(Eigen::Index dimension, double eta, std::size_t cuts,
                                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Oracles

using BaseSampler = std::function<Vector(Rng&)>;

class MassartOracle {
 public:
  MassartOracle(Halfspace target, BaseSampler sampler, NoisePolicy policy, double eta_bound,
                std::uint64_t seed);

  LabeledExample draw();
  std::vector<LabeledExample> sample(std::size_t n);
  // Unlabeled draw from D_x.
  Vector draw_point();
  // Noisy label for x: the target's label flipped with probability eta(x).
  int label(const Vector& x);
  // eta(x); throws std::logic_error if the policy exceeds eta_bound.
  double noise_rate(const Vector& x) const;
  // Largest eta(x) over `draws` fresh points from a copy of the point stream.
  double audit(std::size_t draws) const;

  const Halfspace& target() const { return target_; }
  const NoisePolicy& policy() const { return policy_; }
  double eta_bound() const { return eta_bound_; }
  Eigen::Index dimension() const { return target_.dimension(); }

 private:
  Halfspace target_;
  BaseSampler sampler_;
  NoisePolicy policy_;
  double eta_bound_;
  Rng point_rng_;
  Rng label_rng_;
};

Vector random_unit_vector(Eigen::Index dimension, Rng& rng);

// Pr[|<w*, x>| < t] for x uniform on the unit sphere in R^d.
double sphere_band_probability(Eigen::Index dimension, double t);

// Probability that a uniform point on the sphere has |<w*, x>| >= gamma.
double margin_acceptance_rate(Eigen::Index dimension, double gamma);

// Band half-width so that a `noisy_fraction` share of the margin-conditioned
// sphere distribution falls in gamma <= |<w*, x>| < band.
double calibrate_band(Eigen::Index dimension, double gamma, double noisy_fraction);

struct PolicyOptions {
  double band_noisy_fraction = 0.2;
  std::size_t region_cuts = 4;
};

// Uniform on the unit sphere, rejecting |<w*, x>| < gamma. w* is drawn from the seed.
MassartOracle gen_margin_massart(Eigen::Index dimension, double gamma, double eta_bound,
                                 PolicyKind kind, std::uint64_t seed,
                                 const PolicyOptions& options = {});

// Rounds each coordinate to the nearest multiple of 2^-(b-1), clamped to [-1, 1].
Vector snap_to_bits(const Vector& x, int bits);

// Anisotropic b-bit data: x = snap(A u) for u uniform in the unit ball and a
// seeded A with singular values spread over two orders of magnitude, scaled
// so that ||A u||_inf <= 1. No margin is imposed.
MassartOracle gen_bit_massart(Eigen::Index dimension, int bits, double eta_bound, PolicyKind kind,
                              std::uint64_t seed, const PolicyOptions& options = {});

// ---------------------------------------------------------------------------
// Surrogate losses for the lower-bound constructions

class SurrogateLoss {
 public:
  enum class Kind { Hinge, Logistic, Exponential, SquaredHinge };

  explicit SurrogateLoss(Kind kind) : kind_(kind) {}
  static SurrogateLoss from_id(const std::string& id);

  Kind kind() const { return kind_; }
  std::string id() const;
  double value(double t) const;
  // Right derivative.
  double derivative(double t) const;

 private:
  Kind kind_;
};

std::vector<SurrogateLoss> surrogate_battery();

// ---------------------------------------------------------------------------
// Lower-bound constructions

enum class LowerBoundCase { CaseI, CaseII, ModifiedCaseII };

std::string case_name(LowerBoundCase c);

class CaseInapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LowerBoundInstance {
  FiniteDistribution distribution;
  std::string phi_id;
  double predicted_error_bound = 0.0;
  LowerBoundCase case_tag = LowerBoundCase::CaseII;
  double gamma = 0.0;
  double eta = 0.0;
  Vector witness;  // unit margin witness w*
  double p = 0.0;
  std::optional<double> z;
  std::optional<double> alpha;
};

inline constexpr std::size_t kCaseOneGridSize = 10000;

// First grid z in [0, sqrt(3)/2] with |phi'(z)| < (1/2)(eta/(1-eta))|phi'(-z)|.
std::optional<double> case1_point(const SurrogateLoss& phi, double eta);

LowerBoundInstance build_case1(const SurrogateLoss& phi, double eta, double gamma);
LowerBoundInstance build_case2(const SurrogateLoss& phi, double eta, double gamma);
LowerBoundInstance build_case2_modified(const SurrogateLoss& phi, double eta, double gamma);

// Throws std::logic_error unless all support points lie in the unit disk and
// the witness has margin gamma and agrees with every clean label.
void check_instance(const LowerBoundInstance& instance);

}  // namespace massart
