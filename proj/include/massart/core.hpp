#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace massart {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptySampleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// sign(0) = +1.
inline int sign_label(double score) { return score >= 0.0 ? 1 : -1; }

void require_same_dimension(Eigen::Index expected, Eigen::Index actual, const char* what);

// Deterministic pairwise (cascade) summation of term(0) + ... + term(n-1).
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  constexpr std::size_t kBlock = 32;
  if (end - begin <= kBlock) {
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += term(i);
    return total;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

template <class Term>
double pairwise_sum(std::size_t n, const Term& term) {
  return pairwise_sum(std::size_t{0}, n, term);
}

class LabeledExample {
 public:
  // Throws std::invalid_argument unless y is exactly +1 or -1 and x is finite.
  LabeledExample(Vector x, int y);

  const Vector& x() const { return x_; }
  int y() const { return y_; }

 private:
  Vector x_;
  int y_;
};

// Origin-centered halfspace x -> sign(<w, x>), with w stored at unit norm.
class Halfspace {
 public:
  explicit Halfspace(Vector direction);

  const Vector& weights() const { return w_; }
  Eigen::Index dimension() const { return w_.size(); }
  double score(const Vector& x) const;
  int predict(const Vector& x) const { return sign_label(score(x)); }

 private:
  Vector w_;
};

// {x : ||shape * x||_2 <= radius}
struct Ellipsoid {
  Matrix shape;
  double radius = 0.0;

  bool contains(const Vector& x) const { return (shape * x).norm() <= radius; }
};

// One rule of a decision list. The band test |<direction, A x>| >= threshold is
// evaluated in the stage's own coordinates, where A is the optional linear
// transform (identity when absent). An optional ellipsoid, tested in the
// original coordinates, further restricts the region the stage owns.
class Stage {
 public:
  Stage(Vector direction, double threshold, std::optional<Matrix> transform = std::nullopt,
        std::optional<Ellipsoid> region = std::nullopt);

  const Vector& direction() const { return direction_; }
  double threshold() const { return threshold_; }
  const std::optional<Matrix>& transform() const { return transform_; }
  const std::optional<Ellipsoid>& region() const { return region_; }
  Eigen::Index input_dimension() const;

  Vector to_stage_coordinates(const Vector& x) const;
  bool owns(const Vector& x) const;
  // sign(<direction, A x>) when the stage owns x.
  std::optional<int> decide(const Vector& x) const;
  // A^T * direction, so that <reverted, x> == <direction, A x>. Not unit norm.
  Vector reverted_direction() const;

 private:
  Vector direction_;
  double threshold_;
  std::optional<Matrix> transform_;
  std::optional<Ellipsoid> region_;
};

class DecisionList {
 public:
  struct Decision {
    int label;
    std::optional<std::size_t> stage;  // empty when the default label fired
  };

  explicit DecisionList(int default_label = +1);

  void append(Stage stage);
  Decision classify(const Vector& x) const;
  int predict(const Vector& x) const { return classify(x).label; }

  std::span<const Stage> stages() const { return stages_; }
  std::size_t size() const { return stages_.size(); }
  int default_label() const { return default_label_; }

 private:
  std::vector<Stage> stages_;
  int default_label_;
};

// How the label of a support point is generated. With a flip probability the
// label is `label` (the clean label) flipped with that probability; without
// one the label is deterministic and no noise model is attached.
struct LabelLaw {
  int label = +1;
  std::optional<double> flip_probability;

  double flip_or_zero() const { return flip_probability.value_or(0.0); }
  // Probability that predicting `prediction` is wrong.
  double error_of(int prediction) const {
    const double flip = flip_or_zero();
    return prediction == label ? flip : 1.0 - flip;
  }
};

struct WeightedPoint {
  Vector x;
  double mass = 0.0;
  LabelLaw law;
};

class FiniteDistribution {
 public:
  static constexpr double kMassTolerance = 1e-12;

  explicit FiniteDistribution(std::vector<WeightedPoint> points);

  std::span<const WeightedPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  Eigen::Index dimension() const { return points_.front().x.size(); }
  bool has_label_laws() const;

  // Exact Pr[h(x) != y] under the label laws.
  template <class H>
  double expected_error(const H& h) const {
    return pairwise_sum(points_.size(), [&](std::size_t i) {
      const auto& p = points_[i];
      return p.mass * p.law.error_of(h.predict(p.x));
    });
  }

 private:
  std::vector<WeightedPoint> points_;
};

// Adapts any callable int(const Vector&) to the predict() interface.
template <class F>
struct FunctionPredictor {
  F f;
  int predict(const Vector& x) const { return f(x); }
};
template <class F>
FunctionPredictor(F) -> FunctionPredictor<F>;

struct ConditionalError {
  double error = 0.0;
  double region_mass = 0.0;
};

template <class H>
double empirical_error(const H& hypothesis, std::span<const LabeledExample> sample) {
  if (sample.empty()) throw EmptySampleError("empirical_error: empty sample");
  std::size_t mistakes = 0;
  for (const auto& ex : sample) mistakes += hypothesis.predict(ex.x()) != ex.y();
  return static_cast<double>(mistakes) / static_cast<double>(sample.size());
}

// Error among examples inside `region`, and the fraction of the sample inside
// it. The error is 0 by convention when the region is empty.
template <class H, class Region>
ConditionalError conditional_error(const H& hypothesis, std::span<const LabeledExample> sample,
                                   const Region& region) {
  if (sample.empty()) throw EmptySampleError("conditional_error: empty sample");
  std::size_t inside = 0;
  std::size_t mistakes = 0;
  for (const auto& ex : sample) {
    if (!region(ex.x())) continue;
    ++inside;
    mistakes += hypothesis.predict(ex.x()) != ex.y();
  }
  ConditionalError out;
  out.region_mass = static_cast<double>(inside) / static_cast<double>(sample.size());
  out.error = inside == 0 ? 0.0 : static_cast<double>(mistakes) / static_cast<double>(inside);
  return out;
}

}  // namespace massart
