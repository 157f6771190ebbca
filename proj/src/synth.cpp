#include "massart/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace massart {

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "constant") return PolicyKind::Constant;
  if (name == "band") return PolicyKind::MarginBand;
  if (name == "random_region") return PolicyKind::RandomRegion;
  throw std::invalid_argument("unknown noise policy: " + name);
}

std::string policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Constant:
      return "constant";
    case PolicyKind::MarginBand:
      return "band";
    case PolicyKind::RandomRegion:
      return "random_region";
  }
  return "constant";
}

double noise_rate(const NoisePolicy& policy, const Halfspace& target, const Vector& x) {
  struct Visitor {
    const Halfspace& target;
    const Vector& x;
    double operator()(const ConstantNoise& p) const { return p.eta; }
    double operator()(const MarginBandNoise& p) const {
      return std::abs(target.score(x)) < p.band ? p.eta : 0.0;
    }
    double operator()(const RandomRegionNoise& p) const {
      std::size_t cell = 0;
      for (std::size_t k = 0; k < p.normals.size(); ++k) {
        if (p.normals[k].dot(x) >= 0.0) cell |= std::size_t{1} << k;
      }
      return p.cell_rates.at(cell);
    }
  };
  return std::visit(Visitor{target, x}, policy);
}

RandomRegionNoise make_random_region_noise(Eigen::Index dimension, double eta, std::size_t cuts,
                                           std::uint64_t seed) {
  if (cuts > 16) throw std::invalid_argument("make_random_region_noise: at most 16 cuts");
  Rng rng(seed);
  RandomRegionNoise policy;
  policy.eta = eta;
  for (std::size_t k = 0; k < cuts; ++k) policy.normals.push_back(random_unit_vector(dimension, rng));
  policy.cell_rates.resize(std::size_t{1} << cuts);
  for (double& rate : policy.cell_rates) rate = eta * rng.uniform();
  return policy;
}

MassartOracle::MassartOracle(Halfspace target, BaseSampler sampler, NoisePolicy policy,
                             double eta_bound, std::uint64_t seed)
    : target_(std::move(target)),
      sampler_(std::move(sampler)),
      policy_(std::move(policy)),
      eta_bound_(eta_bound),
      point_rng_(Rng::derive_seed(seed, 0)),
      label_rng_(Rng::derive_seed(seed, 1)) {
  if (!(eta_bound >= 0.0 && eta_bound < 0.5)) {
    throw std::invalid_argument("MassartOracle: eta bound must lie in [0, 1/2)");
  }
  if (!sampler_) throw std::invalid_argument("MassartOracle: missing base sampler");
}

Vector MassartOracle::draw_point() {
  Vector x = sampler_(point_rng_);
  require_same_dimension(target_.dimension(), x.size(), "MassartOracle sampler");
  return x;
}

double MassartOracle::noise_rate(const Vector& x) const {
  const double rate = massart::noise_rate(policy_, target_, x);
  if (!(rate >= 0.0 && rate <= eta_bound_)) {
    throw std::logic_error("MassartOracle: noise policy exceeds the eta bound");
  }
  return rate;
}

int MassartOracle::label(const Vector& x) {
  const int clean = target_.predict(x);
  return label_rng_.bernoulli(noise_rate(x)) ? -clean : clean;
}

LabeledExample MassartOracle::draw() {
  Vector x = draw_point();
  const int y = label(x);
  return LabeledExample(std::move(x), y);
}

std::vector<LabeledExample> MassartOracle::sample(std::size_t n) {
  if (n < 1) throw std::invalid_argument("MassartOracle::sample: n must be >= 1");
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw());
  return out;
}

double MassartOracle::audit(std::size_t draws) const {
  Rng rng = point_rng_;
  double worst = 0.0;
  for (std::size_t i = 0; i < draws; ++i) worst = std::max(worst, noise_rate(sampler_(rng)));
  return worst;
}

Vector random_unit_vector(Eigen::Index dimension, Rng& rng) {
  Vector v(dimension);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dimension; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

namespace {

// Integral of cos^k over [0, upper] by composite Simpson.
double cos_power_integral(int k, double upper) {
  constexpr int kIntervals = 20000;
  const double h = upper / kIntervals;
  auto f = [k](double t) { return std::pow(std::cos(t), k); };
  double total = f(0.0) + f(upper);
  for (int i = 1; i < kIntervals; ++i) total += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  return total * h / 3.0;
}

}  // namespace

double sphere_band_probability(Eigen::Index dimension, double t) {
  if (dimension < 2) throw DimensionError("sphere_band_probability: dimension must be >= 2");
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const int k = static_cast<int>(dimension) - 2;
  return cos_power_integral(k, std::asin(t)) / cos_power_integral(k, std::numbers::pi / 2.0);
}

double margin_acceptance_rate(Eigen::Index dimension, double gamma) {
  return 1.0 - sphere_band_probability(dimension, gamma);
}

double calibrate_band(Eigen::Index dimension, double gamma, double noisy_fraction) {
  if (!(noisy_fraction > 0.0 && noisy_fraction < 1.0)) {
    throw std::invalid_argument("calibrate_band: fraction must lie in (0, 1)");
  }
  const double below_gamma = sphere_band_probability(dimension, gamma);
  const double target = below_gamma + noisy_fraction * (1.0 - below_gamma);
  double lo = gamma;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sphere_band_probability(dimension, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

NoisePolicy make_policy(PolicyKind kind, Eigen::Index dimension, double gamma, double eta,
                        std::uint64_t seed, const PolicyOptions& options) {
  switch (kind) {
    case PolicyKind::Constant:
      return ConstantNoise{eta};
    case PolicyKind::MarginBand:
      return MarginBandNoise{eta, calibrate_band(dimension, gamma, options.band_noisy_fraction)};
    case PolicyKind::RandomRegion:
      return make_random_region_noise(dimension, eta, options.region_cuts, seed);
  }
  return ConstantNoise{eta};
}

}  // namespace

MassartOracle gen_margin_massart(Eigen::Index dimension, double gamma, double eta_bound,
                                 PolicyKind kind, std::uint64_t seed,
                                 const PolicyOptions& options) {
  if (dimension < 2) throw DimensionError("gen_margin_massart: dimension must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gen_margin_massart: gamma must lie in (0, 1)");
  }
  Rng setup(Rng::derive_seed(seed, 2));
  Halfspace target(random_unit_vector(dimension, setup));
  NoisePolicy policy =
      make_policy(kind, dimension, gamma, eta_bound, Rng::derive_seed(seed, 3), options);
  Vector w = target.weights();
  BaseSampler sampler = [w, gamma, dimension](Rng& rng) {
    for (;;) {
      Vector x = random_unit_vector(dimension, rng);
      if (std::abs(w.dot(x)) >= gamma) return x;
    }
  };
  return MassartOracle(std::move(target), std::move(sampler), std::move(policy), eta_bound, seed);
}

Vector snap_to_bits(const Vector& x, int bits) {
  if (bits < 2 || bits > 52) throw std::invalid_argument("snap_to_bits: bits must lie in [2, 52]");
  const double scale = std::ldexp(1.0, bits - 1);
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double numerator = std::clamp(std::round(x[i] * scale), -scale, scale);
    out[i] = numerator / scale;
  }
  return out;
}

MassartOracle gen_bit_massart(Eigen::Index dimension, int bits, double eta_bound, PolicyKind kind,
                              std::uint64_t seed, const PolicyOptions& options) {
  if (dimension < 2) throw DimensionError("gen_bit_massart: dimension must be >= 2");
  if (bits < 2) throw std::invalid_argument("gen_bit_massart: bits must be >= 2");
  Rng setup(Rng::derive_seed(seed, 2));
  Halfspace target(random_unit_vector(dimension, setup));

  Matrix gaussian(dimension, dimension);
  for (Eigen::Index i = 0; i < gaussian.size(); ++i) gaussian.data()[i] = setup.normal();
  const Matrix left = Eigen::HouseholderQR<Matrix>(gaussian).householderQ();
  for (Eigen::Index i = 0; i < gaussian.size(); ++i) gaussian.data()[i] = setup.normal();
  const Matrix right = Eigen::HouseholderQR<Matrix>(gaussian).householderQ();
  Vector spread(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) {
    spread[i] = std::pow(10.0, -2.0 * static_cast<double>(i) / static_cast<double>(dimension - 1));
  }
  Matrix mixing = left * spread.asDiagonal() * right.transpose();
  mixing /= mixing.rowwise().norm().maxCoeff();

  // The margin-band policy is calibrated as if the data were spherical; it
  // only needs to be a valid eta(x) <= eta here.
  NoisePolicy policy = make_policy(kind, dimension, 1e-6, eta_bound, Rng::derive_seed(seed, 3),
                                   options);
  BaseSampler sampler = [mixing, bits, dimension](Rng& rng) {
    const Vector direction = random_unit_vector(dimension, rng);
    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(dimension));
    return snap_to_bits(mixing * (radius * direction), bits);
  };
  return MassartOracle(std::move(target), std::move(sampler), std::move(policy), eta_bound, seed);
}

SurrogateLoss SurrogateLoss::from_id(const std::string& id) {
  if (id == "hinge") return SurrogateLoss(Kind::Hinge);
  if (id == "logistic") return SurrogateLoss(Kind::Logistic);
  if (id == "exponential") return SurrogateLoss(Kind::Exponential);
  if (id == "squared_hinge") return SurrogateLoss(Kind::SquaredHinge);
  throw std::invalid_argument("unknown surrogate loss: " + id);
}

std::string SurrogateLoss::id() const {
  switch (kind_) {
    case Kind::Hinge:
      return "hinge";
    case Kind::Logistic:
      return "logistic";
    case Kind::Exponential:
      return "exponential";
    case Kind::SquaredHinge:
      return "squared_hinge";
  }
  return "hinge";
}

double SurrogateLoss::value(double t) const {
  switch (kind_) {
    case Kind::Hinge:
      return std::max(0.0, 1.0 - t);
    case Kind::Logistic:
      return t > -30.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    case Kind::Exponential:
      return std::exp(-t);
    case Kind::SquaredHinge:
      return t < 1.0 ? (1.0 - t) * (1.0 - t) : 0.0;
  }
  return 0.0;
}

double SurrogateLoss::derivative(double t) const {
  switch (kind_) {
    case Kind::Hinge:
      return t < 1.0 ? -1.0 : 0.0;
    case Kind::Logistic:
      return -1.0 / (1.0 + std::exp(t));
    case Kind::Exponential:
      return -std::exp(-t);
    case Kind::SquaredHinge:
      return t < 1.0 ? -2.0 * (1.0 - t) : 0.0;
  }
  return 0.0;
}

std::vector<SurrogateLoss> surrogate_battery() {
  return {SurrogateLoss(SurrogateLoss::Kind::Hinge), SurrogateLoss(SurrogateLoss::Kind::Logistic),
          SurrogateLoss(SurrogateLoss::Kind::Exponential),
          SurrogateLoss(SurrogateLoss::Kind::SquaredHinge)};
}

std::string case_name(LowerBoundCase c) {
  switch (c) {
    case LowerBoundCase::CaseI:
      return "CaseI";
    case LowerBoundCase::CaseII:
      return "CaseII";
    case LowerBoundCase::ModifiedCaseII:
      return "ModifiedCaseII";
  }
  return "CaseII";
}

namespace {

const double kSqrt3 = std::sqrt(3.0);

void require_eta(double eta) {
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 1/2)");
}

WeightedPoint support_point(double x1, double x2, double mass, int label, double flip) {
  Vector x(2);
  x << x1, x2;
  return WeightedPoint{std::move(x), mass, LabelLaw{label, flip}};
}

Vector unit2(double a, double b) {
  Vector w(2);
  w << a, b;
  return w;
}

}  // namespace

std::optional<double> case1_point(const SurrogateLoss& phi, double eta) {
  require_eta(eta);
  const double factor = 0.5 * eta / (1.0 - eta);
  const double upper = kSqrt3 / 2.0;
  for (std::size_t k = 0; k < kCaseOneGridSize; ++k) {
    const double z = upper * static_cast<double>(k) / static_cast<double>(kCaseOneGridSize - 1);
    if (std::abs(phi.derivative(z)) < factor * std::abs(phi.derivative(-z))) return z;
  }
  return std::nullopt;
}

LowerBoundInstance build_case1(const SurrogateLoss& phi, double eta, double gamma) {
  require_eta(eta);
  if (!(gamma > 0.0 && gamma <= (kSqrt3 - 1.0) / 4.0)) {
    throw std::invalid_argument("build_case1: gamma must lie in (0, (sqrt(3)-1)/4]");
  }
  const auto z = case1_point(phi, eta);
  if (!z) throw CaseInapplicable("build_case1: Case I predicate fails on the whole grid");

  const double ratio = std::abs(phi.derivative(*z)) / std::abs(phi.derivative(-*z));
  const double alpha = 1.0 - ratio * (1.0 - eta) / eta;
  const double height = std::sqrt(1.0 - *z * *z);
  const double delta = alpha * height;
  const double p = eta * delta / (gamma + eta * delta);

  std::vector<WeightedPoint> points;
  points.push_back(support_point(*z, -gamma, p, -1, 0.0));
  points.push_back(support_point(*z, height, 1.0 - p, +1, eta));
  LowerBoundInstance instance{FiniteDistribution(std::move(points)),
                              phi.id(),
                              std::min(eta / (8.0 * gamma), 0.5),
                              LowerBoundCase::CaseI,
                              gamma,
                              eta,
                              unit2(0.0, 1.0),
                              p,
                              z,
                              alpha};
  check_instance(instance);
  return instance;
}

LowerBoundInstance build_case2(const SurrogateLoss& phi, double eta, double gamma) {
  require_eta(eta);
  if (!(gamma > 0.0 && gamma <= (kSqrt3 - 1.0) / 4.0)) {
    throw std::invalid_argument("build_case2: gamma must lie in (0, (sqrt(3)-1)/4]");
  }
  const double r = 0.5;
  const double slope_half = std::abs(phi.derivative(0.5));
  const double slope_zero = std::abs(phi.derivative(0.0));
  const double p = slope_half * r / (slope_half * r + 2.0 * gamma * slope_zero);

  std::vector<WeightedPoint> points;
  points.push_back(support_point(0.0, -2.0 * gamma, p, -1, 0.0));
  points.push_back(support_point(0.5, -r, 1.0 - p, +1, 0.0));
  LowerBoundInstance instance{FiniteDistribution(std::move(points)),
                              phi.id(),
                              p,
                              LowerBoundCase::CaseII,
                              gamma,
                              eta,
                              unit2(kSqrt3 / 2.0, 0.5),
                              p,
                              std::nullopt,
                              std::nullopt};
  check_instance(instance);
  return instance;
}

LowerBoundInstance build_case2_modified(const SurrogateLoss& phi, double eta, double gamma) {
  require_eta(eta);
  if (!(gamma > 0.0 && gamma <= kSqrt3 / 8.0)) {
    throw std::invalid_argument("build_case2_modified: gamma must lie in (0, sqrt(3)/8]");
  }
  const double far = kSqrt3 / 4.0 + 2.0 * gamma;
  const double near = kSqrt3 / 4.0 - 2.0 * gamma;
  const double slope_plus = std::abs(phi.derivative(0.25));
  const double slope_minus = std::abs(phi.derivative(-0.25));
  const double p = slope_plus * near / (slope_plus * near + slope_minus * far);
  if (!(p > 0.0 && p < 1.0)) {
    throw CaseInapplicable("build_case2_modified: stationarity gives p outside (0, 1)");
  }

  std::vector<WeightedPoint> points;
  points.push_back(support_point(0.25, -far, p, -1, 0.0));
  points.push_back(support_point(0.25, -near, 1.0 - p, +1, 0.0));
  LowerBoundInstance instance{FiniteDistribution(std::move(points)),
                              phi.id(),
                              (1.0 - 8.0 * gamma * kSqrt3 / 3.0) * eta / (4.0 * (1.0 - eta)),
                              LowerBoundCase::ModifiedCaseII,
                              gamma,
                              eta,
                              unit2(kSqrt3 / 2.0, 0.5),
                              p,
                              std::nullopt,
                              std::nullopt};
  check_instance(instance);
  return instance;
}

void check_instance(const LowerBoundInstance& instance) {
  constexpr double kSlack = 1e-12;
  if (std::abs(instance.witness.norm() - 1.0) > 1e-9) {
    throw std::logic_error("lower-bound instance: witness is not a unit vector");
  }
  for (const auto& point : instance.distribution.points()) {
    if (point.x.norm() > 1.0 + kSlack) {
      throw std::logic_error("lower-bound instance: support point outside the unit disk");
    }
    if (point.law.label * instance.witness.dot(point.x) < instance.gamma - kSlack) {
      throw std::logic_error("lower-bound instance: witness margin below gamma");
    }
  }
}

}  // namespace massart
