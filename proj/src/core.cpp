#include "massart/core.hpp"

#include <cmath>
#include <string>

namespace massart {

void require_same_dimension(Eigen::Index expected, Eigen::Index actual, const char* what) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

LabeledExample::LabeledExample(Vector x, int y) : x_(std::move(x)), y_(y) {
  if (y_ != 1 && y_ != -1) throw std::invalid_argument("LabeledExample: label must be +1 or -1");
  if (!x_.allFinite()) throw std::invalid_argument("LabeledExample: non-finite coordinate");
}

Halfspace::Halfspace(Vector direction) : w_(std::move(direction)) {
  if (w_.size() == 0) throw std::invalid_argument("Halfspace: empty weight vector");
  if (!w_.allFinite()) throw std::invalid_argument("Halfspace: non-finite weight");
  const double norm = w_.norm();
  if (norm == 0.0) throw std::invalid_argument("Halfspace: zero weight vector");
  w_ /= norm;
}

double Halfspace::score(const Vector& x) const {
  require_same_dimension(w_.size(), x.size(), "Halfspace::score");
  return w_.dot(x);
}

Stage::Stage(Vector direction, double threshold, std::optional<Matrix> transform,
             std::optional<Ellipsoid> region)
    : direction_(std::move(direction)),
      threshold_(threshold),
      transform_(std::move(transform)),
      region_(std::move(region)) {
  if (!(threshold_ >= 0.0) || !std::isfinite(threshold_)) {
    throw std::invalid_argument("Stage: threshold must be finite and nonnegative");
  }
  const double norm = direction_.norm();
  if (!(norm > 0.0) || !direction_.allFinite()) {
    throw std::invalid_argument("Stage: direction must be finite and nonzero");
  }
  direction_ /= norm;
  if (transform_) {
    require_same_dimension(direction_.size(), transform_->rows(), "Stage transform rows");
  }
  if (region_) {
    require_same_dimension(input_dimension(), region_->shape.cols(), "Stage ellipsoid");
  }
}

Eigen::Index Stage::input_dimension() const {
  return transform_ ? transform_->cols() : direction_.size();
}

Vector Stage::to_stage_coordinates(const Vector& x) const {
  require_same_dimension(input_dimension(), x.size(), "Stage");
  if (transform_) return *transform_ * x;
  return x;
}

bool Stage::owns(const Vector& x) const {
  require_same_dimension(input_dimension(), x.size(), "Stage");
  if (region_ && !region_->contains(x)) return false;
  const double score = transform_ ? direction_.dot(*transform_ * x) : direction_.dot(x);
  return std::abs(score) >= threshold_;
}

std::optional<int> Stage::decide(const Vector& x) const {
  require_same_dimension(input_dimension(), x.size(), "Stage");
  if (region_ && !region_->contains(x)) return std::nullopt;
  const double score = transform_ ? direction_.dot(*transform_ * x) : direction_.dot(x);
  if (std::abs(score) >= threshold_) return sign_label(score);
  return std::nullopt;
}

Vector Stage::reverted_direction() const {
  if (transform_) return transform_->transpose() * direction_;
  return direction_;
}

DecisionList::DecisionList(int default_label) : default_label_(default_label) {
  if (default_label != 1 && default_label != -1) {
    throw std::invalid_argument("DecisionList: default label must be +1 or -1");
  }
}

void DecisionList::append(Stage stage) {
  if (!stages_.empty()) {
    require_same_dimension(stages_.front().input_dimension(), stage.input_dimension(),
                           "DecisionList::append");
  }
  stages_.push_back(std::move(stage));
}

DecisionList::Decision DecisionList::classify(const Vector& x) const {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (auto label = stages_[i].decide(x)) return {*label, i};
  }
  return {default_label_, std::nullopt};
}

FiniteDistribution::FiniteDistribution(std::vector<WeightedPoint> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw EmptySampleError("FiniteDistribution: no support points");
  const Eigen::Index dim = points_.front().x.size();
  for (const auto& p : points_) {
    require_same_dimension(dim, p.x.size(), "FiniteDistribution");
    if (!p.x.allFinite()) throw std::invalid_argument("FiniteDistribution: non-finite point");
    if (!(p.mass >= 0.0)) throw std::invalid_argument("FiniteDistribution: negative mass");
    if (p.law.label != 1 && p.law.label != -1) {
      throw std::invalid_argument("FiniteDistribution: label must be +1 or -1");
    }
    if (p.law.flip_probability) {
      const double f = *p.law.flip_probability;
      if (!(f >= 0.0 && f < 0.5)) {
        throw std::invalid_argument("FiniteDistribution: flip probability outside [0, 1/2)");
      }
    }
  }
  const double total =
      pairwise_sum(points_.size(), [&](std::size_t i) { return points_[i].mass; });
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("FiniteDistribution: masses must sum to 1");
  }
}

bool FiniteDistribution::has_label_laws() const {
  for (const auto& p : points_) {
    if (!p.law.flip_probability) return false;
  }
  return true;
}

}  // namespace massart
