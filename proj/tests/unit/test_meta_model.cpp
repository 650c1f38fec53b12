#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "autobid/meta_model.hpp"

using namespace autobid;

namespace {

const SplineConfig kTiny{3, 4};  // 6 control points per head, 12 outputs

std::vector<LossExample> random_batch(std::uint64_t seed, std::size_t states, std::size_t dim,
                                      const SplineConfig& sc) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-0.2, 1.3);
  std::vector<LossExample> batch(states);
  for (auto& ex : batch) {
    ex.features.resize(dim);
    for (auto& f : ex.features) f = g(rng);
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) ex.anchors.push_back({u(rng), g(rng), g(rng), {}});
  }
  attach_basis(sc.basis(), batch);
  return batch;
}

// Loops only: hidden units, outputs, spline values, squared errors.
double straight_line_loss(const MetaModel& m, const std::vector<LossExample>& batch, const SplineConfig& sc) {
  const std::size_t M = sc.num_control();
  double total = 0;
  for (const auto& ex : batch) {
    std::vector<double> h(m.hidden_dim());
    for (std::size_t i = 0; i < h.size(); ++i) {
      double z = m.b1(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < ex.features.size(); ++j)
        z += m.w1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * ex.features[j];
      h[i] = std::tanh(z);
    }
    std::vector<double> out(2 * M);
    for (std::size_t o = 0; o < out.size(); ++o) {
      double z = m.b2(static_cast<Eigen::Index>(o));
      for (std::size_t i = 0; i < h.size(); ++i) z += m.w2(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) * h[i];
      out[o] = z;
    }
    const SplineCurve theta(sc.basis(), {out.begin(), out.begin() + static_cast<long>(M)});
    const SplineCurve phi(sc.basis(), {out.begin() + static_cast<long>(M), out.end()});
    double s = 0;
    for (const auto& a : ex.anchors) {
      const double eb = theta.eval(a.x) - a.beta_target;
      const double ev = phi.eval(a.x) - a.value_target;
      s += eb * eb + ev * ev;
    }
    total += s / static_cast<double>(ex.anchors.size());
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

TEST(MetaModel, ZeroNetworkGivesZeroSplines) {
  const auto m = MetaModel::zeros(39, 16, 18);
  std::vector<double> s(39, 0.7);
  const auto out = forward(m, s);
  for (double v : out.theta) EXPECT_EQ(v, 0.0);
  for (double v : out.phi) EXPECT_EQ(v, 0.0);
}

TEST(MetaModel, SeededInitIsBitStable) {
  const auto a = MetaModel::random(39, 32, 18, 5);
  const auto b = MetaModel::random(39, 32, 18, 5);
  EXPECT_EQ(a.flatten(), b.flatten());
  std::vector<double> s(39, 0.3);
  EXPECT_EQ(forward(a, s).theta, forward(b, s).theta);
}

TEST(MetaModel, BatchEqualsSingles) {
  const auto m = MetaModel::random(39, 16, 6, 1);
  const auto batch = random_batch(2, 7, 39, kTiny);
  std::vector<std::vector<double>> feats;
  for (const auto& ex : batch) feats.push_back(ex.features);
  const auto out = forward_batch(m, feats);
  ASSERT_EQ(out.size(), 7u);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto one = forward(m, feats[i]);
    EXPECT_EQ(out[i].theta, one.theta);
    EXPECT_EQ(out[i].phi, one.phi);
  }
}

TEST(MetaModel, FlattenRoundTrip) {
  auto m = MetaModel::random(5, 3, 4, 9);
  const auto flat = m.flatten();
  EXPECT_EQ(static_cast<std::size_t>(flat.size()), m.num_parameters());
  auto z = MetaModel::zeros(5, 3, 4);
  z.unflatten(flat);
  EXPECT_EQ(z.flatten(), flat);
  EXPECT_THROW(forward(m, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST(Loss, OffByDeltaInBetaOnly) {
  auto m = MetaModel::zeros(3, 2, kTiny.num_control());
  std::vector<LossExample> batch{{{0, 0, 0}, {{0.4, 0.25, 0.0, {}}}}};
  attach_basis(kTiny.basis(), batch);
  const auto l = loss(m, batch);
  EXPECT_DOUBLE_EQ(l.total, 0.0625);
  EXPECT_DOUBLE_EQ(l.value_term, 0.0);
}

TEST(Loss, ExactInterpolationIsZero) {
  // Biases carry constant splines; zero weights make the features irrelevant.
  auto m = MetaModel::zeros(3, 2, kTiny.num_control());
  for (std::size_t i = 0; i < 6; ++i) {
    m.b2(static_cast<Eigen::Index>(i)) = 0.5;
    m.b2(static_cast<Eigen::Index>(6 + i)) = 2.0;
  }
  std::vector<LossExample> batch{{{1, 2, 3}, {{0.1, 0.5, 2.0, {}}, {0.9, 0.5, 2.0, {}}}}};
  attach_basis(kTiny.basis(), batch);
  EXPECT_NEAR(loss(m, batch).total, 0.0, 1e-24);
  const auto g = backward(m, batch);
  EXPECT_NEAR(g.grad.flatten().lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(Loss, MatchesStraightLineRecomputation) {
  const auto m = MetaModel::random(39, 8, 6, 3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto batch = random_batch(100 + s, 6, 39, kTiny);
    EXPECT_NEAR(loss(m, batch).total, straight_line_loss(m, batch, kTiny), 1e-12);
  }
}

TEST(Backward, FiniteDifferences) {
  const auto m = MetaModel::random(39, 8, 6, 4);
  const auto batch = random_batch(7, 4, 39, kTiny);
  const auto g = backward(m, batch).grad.flatten();
  auto p = m.flatten();
  auto probe = m;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double keep = p(i);
    p(i) = keep + h;
    probe.unflatten(p);
    const double up = loss(probe, batch).total;
    p(i) = keep - h;
    probe.unflatten(p);
    const double down = loss(probe, batch).total;
    p(i) = keep;
    const double fd = (up - down) / (2 * h);
    EXPECT_LE(std::abs(fd - g(i)), 1e-4 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(Backward, BatchGradientIsMeanOfStates) {
  const auto m = MetaModel::random(39, 8, 6, 5);
  const auto batch = random_batch(8, 2, 39, kTiny);
  const auto both = backward(m, batch).grad.flatten();
  const auto a = backward(m, std::span(batch).subspan(0, 1)).grad.flatten();
  const auto b = backward(m, std::span(batch).subspan(1, 1)).grad.flatten();
  EXPECT_LE((both - 0.5 * (a + b)).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(BudgetCurves, UnitConversion) {
  SplineCurve line(1, 2, {0.0, 1.0});
  BudgetCurves c{line, line, 10.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(c.beta_at(5.0), 1.0);
  EXPECT_DOUBLE_EQ(c.value_at(5.0), 2.5);
  EXPECT_DOUBLE_EQ(c.value_slope_at(5.0), 0.5);
  EXPECT_DOUBLE_EQ(c.beta_slope_at(3.0), 0.2);
}
