#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "massart/learner.hpp"
#include "massart/loss.hpp"
#include "oracles.hpp"

using namespace massart;

namespace {

template <class Classifier>
double fresh_error(MassartOracle& oracle, const Classifier& h, std::size_t n) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ex = oracle.draw();
    wrong += h.predict(ex.x()) != ex.y();
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

Matrix sphere_cloud(int d, int n, Rng& rng) {
  Matrix X(d, n);
  for (int j = 0; j < n; ++j) X.col(j) = random_unit_vector(d, rng);
  return X;
}

}  // namespace

TEST(RemoveOutliers, IsotropicCloudKeepsEverything) {
  Rng rng(1);
  const Matrix X = sphere_cloud(5, 1000, rng);
  const auto f = remove_outliers(X, 4.0);
  EXPECT_EQ(f.kept.size(), 1000u);
  EXPECT_DOUBLE_EQ(f.kept_fraction, 1.0);
  for (int j = 0; j < X.cols(); ++j) EXPECT_TRUE(f.contains(X.col(j)));
}

TEST(RemoveOutliers, DropsTheFarPoint) {
  Rng rng(2);
  Matrix X = sphere_cloud(5, 1001, rng);
  X.col(1000) = 1000.0 * Vector::Unit(5, 0);
  const auto f = remove_outliers(X, 4.0);
  ASSERT_EQ(f.kept.size(), 1000u);
  for (std::size_t k = 0; k < f.kept.size(); ++k) EXPECT_NE(f.kept[k], 1000u);
  EXPECT_FALSE(f.contains(X.col(1000)));
}

TEST(RemoveOutliers, LeverageBelowThresholdAfterFiltering) {
  Rng rng(3);
  Matrix X(4, 600);
  for (int j = 0; j < X.cols(); ++j) {
    X.col(j) = oracles::ball_point(4, rng);
    if (j % 50 == 0) X.col(j) *= 40.0;
  }
  const double beta = 2.0;
  const auto f = remove_outliers(X, beta);
  const Matrix inv = f.second_moment.inverse();
  for (auto j : f.kept) {
    EXPECT_LE(X.col(static_cast<Eigen::Index>(j)).dot(inv * X.col(static_cast<Eigen::Index>(j))),
              beta * 4 * (1 + 1e-9));
  }
}

TEST(RemoveOutliers, FailsWhenMostPointsAreRemoved) {
  Matrix X = Matrix::Zero(3, 10);
  for (int j = 0; j < 10; ++j) X(j % 3, j) = std::pow(10.0, j);
  // Each axis is dominated by its largest point, whose leverage is about n.
  EXPECT_THROW(remove_outliers(X, 1.5), OutlierRemovalError);
  EXPECT_THROW(remove_outliers(X, 1.0), std::invalid_argument);
}

TEST(Isotropize, AlreadyIsotropic) {
  const int d = 4;
  Matrix X(d, 2 * d);
  for (int i = 0; i < d; ++i) {
    X.col(2 * i) = Vector::Unit(d, i);
    X.col(2 * i + 1) = -Vector::Unit(d, i);
  }
  const auto iso = isotropize(X);
  EXPECT_LE((iso.map - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-9);
  Rng rng(4);
  const Vector w = random_unit_vector(d, rng);
  const double moment = (w.transpose() * X).squaredNorm() / X.cols();
  EXPECT_NEAR(iso.gamma_eff, moment, 1e-9);
}

TEST(Isotropize, AxisAlignedEllipse) {
  const int n = 720;
  Matrix X(2, n);
  for (int k = 0; k < n; ++k) {
    const double t = 2 * std::numbers::pi * k / n;
    X(0, k) = std::cos(t);
    X(1, k) = 0.1 * std::sin(t);
  }
  const auto iso = isotropize(X);
  const Matrix Y = iso.map * X;
  const Matrix moment = Y * Y.transpose() / n;
  EXPECT_LE((moment - iso.gamma_eff * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(Y.colwise().norm().maxCoeff(), 1.0, 1e-12);
}

TEST(Rcn, SmoothingScaleAndLambda) {
  const double c = rcn_smoothing_scale(0.1, 0.1);
  EXPECT_NEAR(c, 0.1 / std::sqrt(2 * std::log(200.0)), 1e-15);
  EXPECT_NEAR(c, 0.03072, 1e-5);
  EXPECT_NEAR(rcn_lambda(0.2, 0.1, 0.1) - 0.2, 0.001225, 1e-6);
}

TEST(Rcn, RejectsLambdaAtOneHalf) {
  auto oracle = gen_margin_massart(3, 0.1, 0.498, PolicyKind::Constant, 1);
  RcnLearnerConfig cfg;
  cfg.eta = 0.498;
  cfg.epsilon = 0.9;
  EXPECT_GE(rcn_lambda(cfg.eta, cfg.gamma, cfg.epsilon), 0.5);
  EXPECT_THROW(learn_rcn(oracle, cfg), std::invalid_argument);
}

// G(w, x) = (eta - lambda) E|u| + (1 - 2 eta) E[|u| 1{sign(u) != y*}] with
// u = <w, x + r>, checked by simulating the noisy label and perturbation.
TEST(Rcn, SmoothedLossDecomposition) {
  Rng rng(5);
  const double eta = 0.2, c = 0.08;
  const LeakyReluParams p(0.23);
  const Vector w = Vector::Unit(3, 0);
  for (double s : {-0.3, -0.05, 0.0, 0.02, 0.4}) {
    Vector x = Vector::Zero(3);
    x[0] = s;
    x[1] = 0.5;
    const int clean = sign_label(s);
    const int n = 400000;
    double total = 0;
    for (int i = 0; i < n; ++i) {
      Vector r(3);
      for (int k = 0; k < 3; ++k) r[k] = c * rng.normal();
      const int y = rng.bernoulli(eta) ? -clean : clean;
      total += leaky_relu(p, -y * w.dot(x + r));
    }
    const double exact = (eta - p.lambda()) * oracles::gaussian_abs_mean(s, c) +
                         (1 - 2 * eta) * oracles::gaussian_wrong_side(s, c, clean);
    EXPECT_NEAR(total / n, exact, 4e-4) << "s = " << s;
  }
}

TEST(LearnMargin, NoiselessRun) {
  auto oracle = gen_margin_massart(5, 0.2, 0.0, PolicyKind::Constant, 7);
  MarginLearnerConfig cfg;
  cfg.gamma = 0.2;
  cfg.epsilon = 0.05;
  cfg.seed = 11;
  cfg.budget.sgd_iterations = 4000;
  cfg.budget.replicates = 2;
  cfg.budget.round_sample = 4000;
  const auto res = learn_margin(oracle, cfg);
  EXPECT_FALSE(res.aborted) << res.reason;
  EXPECT_LE(fresh_error(oracle, res.list, 100000), 0.05);
  for (const auto& r : res.rounds) EXPECT_LE(r.unclassified_after, r.unclassified_before);
}

TEST(LearnMargin, DeterministicForFixedSeeds) {
  auto run = [] {
    auto oracle = gen_margin_massart(4, 0.2, 0.1, PolicyKind::Constant, 3);
    MarginLearnerConfig cfg;
    cfg.gamma = 0.2;
    cfg.eta = 0.1;
    cfg.epsilon = 0.1;
    cfg.seed = 5;
    cfg.budget.sgd_iterations = 2000;
    cfg.budget.replicates = 2;
    cfg.budget.round_sample = 3000;
    return learn_margin(oracle, cfg);
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.list.size(), b.list.size());
  for (std::size_t i = 0; i < a.list.size(); ++i) {
    EXPECT_EQ(a.list.stages()[i].direction(), b.list.stages()[i].direction());
    EXPECT_EQ(a.list.stages()[i].threshold(), b.list.stages()[i].threshold());
  }
}

TEST(LearnGeneral, NoiselessRun) {
  auto oracle = gen_bit_massart(5, 8, 0.0, PolicyKind::Constant, 4);
  GeneralLearnerConfig cfg;
  cfg.epsilon = 0.1;
  cfg.seed = 2;
  cfg.budget.sgd_iterations = 4000;
  cfg.budget.replicates = 2;
  cfg.budget.round_sample = 4000;
  const auto res = learn_general(oracle, cfg);
  EXPECT_FALSE(res.aborted) << res.reason;
  EXPECT_LE(fresh_error(oracle, res.list, 100000), 0.1);
  for (const auto& r : res.rounds) {
    ASSERT_TRUE(r.kept_fraction.has_value());
    EXPECT_GE(*r.kept_fraction, 0.5);
  }
}

TEST(LearnRcn, NoiselessRun) {
  auto oracle = gen_margin_massart(5, 0.1, 0.0, PolicyKind::Constant, 6);
  RcnLearnerConfig cfg;
  cfg.gamma = 0.1;
  cfg.epsilon = 0.1;
  cfg.seed = 3;
  const auto res = learn_rcn(oracle, cfg);
  EXPECT_LE(fresh_error(oracle, res.halfspace, 100000), 0.1);
}

TEST(LearnRcn, RequiresConstantNoise) {
  auto oracle = gen_margin_massart(5, 0.1, 0.1, PolicyKind::MarginBand, 6);
  RcnLearnerConfig cfg;
  cfg.eta = 0.1;
  EXPECT_THROW(learn_rcn(oracle, cfg), std::invalid_argument);
}
