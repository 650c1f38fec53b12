#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "autobid/training.hpp"

using namespace autobid;

namespace {

// States with known curves: beta(B) = sqrt(B / 50), V(B) = 40 * (1 - exp(-B / 30)),
// on a 10-step horizon; steps_left feature drives the horizon fraction.
std::vector<SupervisedState> ground_truth_states(std::size_t trajs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SupervisedState> out;
  for (std::size_t k = 0; k < trajs; ++k) {
    SupervisedState s;
    s.traj_id = k;
    s.step = 1;
    s.features[feature::kStepsLeft] = 1.0;
    s.features[feature::kCurrentMean] = u(rng);
    for (int a = 0; a < 8; ++a) {
      const double b = 2.0 + 98.0 * u(rng);
      s.anchors.push_back({b, std::sqrt(b / 50.0), 40.0 * (1.0 - std::exp(-b / 30.0))});
    }
    std::sort(s.anchors.begin(), s.anchors.end(), [](auto& x, auto& y) { return x.budget < y.budget; });
    out.push_back(s);
  }
  return out;
}

TrainConfig small_config() {
  TrainConfig tc;
  tc.epochs = 60;
  tc.hidden = 16;
  tc.batch_size = 16;
  tc.spline = {3, 8};
  return tc;
}

}  // namespace

TEST(Normalization, FitsScales) {
  std::vector<SupervisedState> st(1);
  st[0].features[feature::kStepsLeft] = 0.5;
  st[0].anchors = {{10, 0.5, 4}, {20, 1.0, 8}};
  const auto n = fit_normalization(st);
  EXPECT_DOUBLE_EQ(n.b_scale, 40.0);
  EXPECT_GT(n.beta_scale, 0.0);
  EXPECT_GT(n.v_scale, 0.0);
  EXPECT_DOUBLE_EQ(steps_left_fraction(st[0].features), 0.5);
}

TEST(Train, RecoversKnownCurves) {
  const auto states = ground_truth_states(120, 1);
  const auto res = train(states, small_config());
  ASSERT_GE(res.log.size(), 2u);
  EXPECT_LT(res.log.back().train_loss, res.log.front().train_loss);
  const auto held = ground_truth_states(20, 2);
  double se_b = 0, se_v = 0;
  std::size_t n = 0;
  for (const auto& s : held) {
    const auto c = curves_for(res.checkpoint, s.features);
    for (const auto& a : s.anchors) {
      se_b += std::pow(c.beta_at(a.budget) - a.beta, 2);
      se_v += std::pow(c.value_at(a.budget) - a.value, 2);
      ++n;
    }
  }
  // target ranges: beta in [0.2, 1.41], value in [2.6, 38.5]
  EXPECT_LE(std::sqrt(se_b / n), 0.05 * 1.21);
  EXPECT_LE(std::sqrt(se_v / n), 0.05 * 35.9);
}

TEST(Train, Deterministic) {
  const auto states = ground_truth_states(30, 3);
  auto tc = small_config();
  tc.epochs = 5;
  const auto a = train(states, tc);
  const auto b = train(states, tc);
  EXPECT_EQ(a.log.back().train_loss, b.log.back().train_loss);
  EXPECT_EQ(a.checkpoint.model.flatten(), b.checkpoint.model.flatten());
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const auto states = ground_truth_states(10, 4);
  auto tc = small_config();
  tc.epochs = 3;
  tc.learning_rate = 0.0;
  const auto res = train(states, tc);
  tc.epochs = 0;
  const auto init = train(states, tc);
  EXPECT_EQ(res.checkpoint.model.flatten(), init.checkpoint.model.flatten());
  // shuffling reorders the sum
  for (const auto& e : res.log) EXPECT_NEAR(e.train_loss, res.log.front().train_loss, 1e-12);
}

TEST(Train, RejectsBadConfig) {
  TrainConfig tc;
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  EXPECT_THROW(train({}, TrainConfig{}), std::invalid_argument);
}

TEST(Adam, MovesAgainstGradient) {
  Adam opt(2, 0.1);
  Eigen::VectorXd p(2);
  p << 1.0, -1.0;
  Eigen::VectorXd g(2);
  g << 1.0, -1.0;
  opt.step(p, g);
  EXPECT_NEAR(p(0), 0.9, 1e-6);
  EXPECT_NEAR(p(1), -0.9, 1e-6);
}
