#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "massart/loss.hpp"
#include "massart/optim.hpp"
#include "massart/synth.hpp"
#include "oracles.hpp"

using namespace massart;

TEST(ProjectedSgd, LinearObjective) {
  SgdConfig cfg{10000, std::nullopt, 1, 1};
  const auto res = projected_sgd(
      [](const Vector&, Rng&, Vector& out) { out.setZero(); out[0] = -1; }, 2, cfg);
  EXPECT_LE(-res.averaged[0], -1 + 0.03);
  EXPECT_FALSE(res.degenerate);
  EXPECT_NEAR(res.direction.norm(), 1.0, 1e-12);
}

TEST(ProjectedSgd, QuadraticObjective) {
  SgdConfig cfg{10000, std::nullopt, 1, 1};
  // Half the gradient of ||w||^2 keeps the norm bound.
  const auto res = projected_sgd([](const Vector& w, Rng&, Vector& out) { out = w; }, 3, cfg);
  EXPECT_LE(res.averaged.squaredNorm(), 0.03);
  EXPECT_TRUE(res.degenerate);  // w stays at 0
  EXPECT_DOUBLE_EQ(res.direction[0], 1.0);
}

TEST(ProjectedSgd, RejectsLargeSubgradients) {
  SgdConfig cfg{10, std::nullopt, 1, 1};
  EXPECT_THROW(projected_sgd([](const Vector&, Rng&, Vector& out) { out.setConstant(1.0); }, 2, cfg),
               std::invalid_argument);
}

TEST(ProjectedSgd, Deterministic) {
  SgdConfig cfg{2000, std::nullopt, 99, 1};
  auto oracle = [](const Vector& w, Rng& rng, Vector& out) {
    out = 0.5 * w;
    out[0] -= 0.4 * rng.uniform();
    out[1] += 0.4 * (rng.uniform() - 0.5);
  };
  const auto a = projected_sgd(oracle, 2, cfg);
  const auto b = projected_sgd(oracle, 2, cfg);
  EXPECT_EQ(a.averaged, b.averaged);
}

TEST(ProjectUnitBall, Projection) {
  Vector w(2);
  w << 3, 4;
  project_to_unit_ball(w);
  EXPECT_NEAR(w.norm(), 1.0, 1e-15);
  EXPECT_NEAR(w[0], 0.6, 1e-15);
  w << 0.1, 0.2;
  project_to_unit_ball(w);
  EXPECT_DOUBLE_EQ(w[1], 0.2);
}

// Regret bound on max of affine pieces, compared against a polar grid.
TEST(ProjectedSgd, RegretOnPiecewiseLinear) {
  Rng rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Vector> a;
    std::vector<double> b;
    for (int k = 0; k < 5; ++k) {
      a.push_back(oracles::ball_point(2, rng));
      b.push_back(rng.uniform(-0.5, 0.5));
    }
    auto f = [&](const Vector& w) {
      double best = -1e300;
      for (std::size_t k = 0; k < a.size(); ++k) best = std::max(best, a[k].dot(w) + b[k]);
      return best;
    };
    auto oracle = [&](const Vector& w, Rng&, Vector& out) {
      std::size_t arg = 0;
      for (std::size_t k = 1; k < a.size(); ++k) {
        if (a[k].dot(w) + b[k] > a[arg].dot(w) + b[arg]) arg = k;
      }
      out = a[arg];
    };
    const auto res = projected_sgd(oracle, 2, {10000, std::nullopt, 1, 1});
    const auto grid = oracles::grid_minimum(f, 720, 50);
    EXPECT_LE(f(res.averaged) - grid.value, 2.0 / std::sqrt(10000.0));
  }
}

TEST(ProjectedSgd, LeakyReluOnMarginSample) {
  auto oracle = gen_margin_massart(2, 0.2, 0.0, PolicyKind::Constant, 5);
  const auto sample = oracle.sample(4000);
  const LeakyReluParams p(0.1);
  const std::size_t iters = static_cast<std::size_t>(std::ceil(1.0 / (0.04 * 0.0025)));
  auto sub = [&](const Vector& w, Rng& rng, Vector& out) {
    const auto& ex = sample[rng.below(sample.size())];
    out.setZero();
    accumulate_subgradient(p, w, ex.x(), ex.y(), 1.0, out);
  };
  const auto res = projected_sgd(sub, 2, {iters, std::nullopt, 3, 1});
  const double value = empirical_loss(p, res.averaged, std::span(sample));
  EXPECT_LE(value, -0.2 * 0.1 / 2);
  const auto grid = oracles::grid_minimum(
      [&](const Vector& w) { return empirical_loss(p, w, std::span(sample)); }, 360, 10);
  EXPECT_LE(grid.value, -0.2 * 0.1);
}

TEST(AmplifiedSgd, PicksSmallestEstimate) {
  auto oracle = [](const Vector&, Rng& rng, Vector& out) {
    out.setZero();
    out[0] = rng.uniform(-0.8, 0.8);
    out[1] = -0.5;
  };
  auto estimator = [](const Vector& w) { return -w[1] + 0.1 * w[0]; };
  const auto best = amplified_sgd(oracle, 2, {500, std::nullopt, 8, 1}, 4, estimator);
  for (std::uint64_t r = 0; r < 4; ++r) {
    SgdConfig cfg{500, std::nullopt, Rng::derive_seed(8, r), 1};
    EXPECT_LE(best.value_estimate, estimator(projected_sgd(oracle, 2, cfg).averaged) + 1e-15);
  }
  EXPECT_EQ(replicates_for(0.1), 4u);
  EXPECT_EQ(replicates_for(0.5), 1u);
}
