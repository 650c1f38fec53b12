#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "autobid/controller.hpp"

using namespace autobid;

namespace {

// Control points on g at the Greville abscissae: a concave g gives a concave spline.
template <typename G>
SplineCurve sample_curve(const SplineBasis& b, G g) {
  const auto& t = b.knots();
  const int p = b.degree();
  std::vector<double> c(b.num_basis());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0;
    for (int k = 1; k <= p; ++k) s += t[i + static_cast<std::size_t>(k)];
    c[i] = g(s / p);
  }
  return SplineCurve(b, c);
}

struct ConcaveCase {
  BudgetCurves curves;
  EpisodeState state;
  double r = 0.0;
};

ConcaveCase random_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SplineBasis basis(3, 16);
  const double amp = 1.0 + 9.0 * u(rng);
  const double k = 0.5 + 4.0 * u(rng);
  const double unit = 50.0 + 150.0 * u(rng);
  ConcaveCase c{{sample_curve(basis, [](double x) { return 0.2 + x; }),
                 sample_curve(basis, [&](double x) { return amp * (1 - std::exp(-k * x)); }), unit, 1.0,
                 10.0},
                {},
                0.0};
  EpisodeState& s = c.state;
  s.num_steps = 48;
  s.step = 10;
  s.remaining_budget = unit * (0.3 + 0.7 * u(rng));
  s.hist_cost = unit * u(rng);
  const double tail_roi = c.curves.value_at(s.remaining_budget) / s.remaining_budget;
  s.hist_value = s.hist_cost * tail_roi * (1.2 + 2.0 * u(rng));
  const double hi = s.hist_value / s.hist_cost;
  const double lo = (s.hist_value + c.curves.value_at(s.remaining_budget)) / (s.hist_cost + s.remaining_budget);
  c.r = lo + (hi - lo) * (0.05 + 0.9 * u(rng));
  return c;
}

double bisect_root(const ConcaveCase& c) {
  double a = 0.0, b = c.state.remaining_budget;  // slack(a) > 0 > slack(b)
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    (roi_slack(c.curves, c.state, c.r, m) >= 0 ? a : b) = m;
  }
  return a;
}

std::shared_ptr<const Checkpoint> constant_checkpoint(double beta, double value_per_budget) {
  auto ck = std::make_shared<Checkpoint>();
  ck->spline = {1, 2};
  ck->model = MetaModel::zeros(kFeatureDim, 2, 2);
  ck->model.b2 << beta, beta, 0.0, value_per_budget;
  return ck;
}

}  // namespace

TEST(Controller, BudgetOnlyPassesThrough) {
  const SplineBasis b(3, 16);
  BudgetCurves c{sample_curve(b, [](double x) { return 0.1 + x; }), sample_curve(b, [](double x) { return x; }),
                 100.0, 1.0, 1.0};
  EpisodeState s;
  s.remaining_budget = 40.0;
  s.hist_cost = 500;
  const auto d = decide_on_curves(c, s, std::nullopt);
  EXPECT_NEAR(d.beta_opt, 0.5, 1e-12);
  EXPECT_EQ(d.decision_case, DecisionCase::kBcbPassthrough);
  EXPECT_EQ(d.alpha, 1.0);
}

TEST(Controller, ZeroSlackBoundaryPassesThrough) {
  SplineCurve line(1, 2, {0.0, 2.0});
  BudgetCurves c{line, line, 1.0, 1.0, 1.0};
  EpisodeState s;
  s.remaining_budget = 0.5;
  ControllerConfig cfg;
  cfg.roi_tolerance = 0.0;
  const auto d = decide_on_curves(c, s, 2.0, cfg);
  EXPECT_EQ(d.delta_roi, 0.0);
  EXPECT_EQ(d.decision_case, DecisionCase::kBcbPassthrough);
  EXPECT_EQ(d.alpha, 1.0);
  EXPECT_DOUBLE_EQ(d.beta_opt, 1.0);
}

TEST(Controller, ConcaveCasesMatchBisection) {
  std::mt19937_64 rng(21);
  int agree = 0;
  for (int i = 0; i < 500; ++i) {
    const auto c = random_case(rng);
    const auto d = decide_on_curves(c.curves, c.state, c.r);
    const double tol = 1e-6 * (c.state.hist_cost + c.state.remaining_budget);
    const double root = bisect_root(c);
    EXPECT_LE(d.iterations_used, 50u);
    EXPECT_EQ(d.decision_case, DecisionCase::kRoiCorrected);
    EXPECT_LE(d.alpha, 1.0);
    if (std::abs(roi_slack(c.curves, c.state, c.r, d.c_target_final)) <= tol &&
        std::abs(roi_slack(c.curves, c.state, c.r, root)) <= tol)
      ++agree;
  }
  EXPECT_GE(agree, 495);
}

TEST(Controller, InfeasibleTakesLargestSlack) {
  const SplineBasis b(3, 16);
  BudgetCurves c{sample_curve(b, [](double x) { return 0.1 + x; }),
                 sample_curve(b, [](double x) { return std::sqrt(x + 0.01) - 0.1; }), 100.0, 1.0, 100.0};
  EpisodeState s;
  s.remaining_budget = 80.0;
  s.hist_cost = 1000.0;
  s.hist_value = 0.0;
  const auto d = decide_on_curves(c, s, 1.0);
  EXPECT_EQ(d.decision_case, DecisionCase::kRoiInfeasible);
  for (int k = 1; k <= 80; ++k) EXPECT_GE(d.delta_roi, roi_slack(c, s, 1.0, k) - 1e-6);
  EXPECT_LE(d.alpha, 1.0);
}

TEST(Controller, MarginPlansAgainstHigherTarget) {
  std::mt19937_64 rng(5);
  const auto c = random_case(rng);
  ControllerConfig m;
  m.target_margin = 0.05;
  EXPECT_LE(decide_on_curves(c.curves, c.state, c.r, m).c_target_final,
            decide_on_curves(c.curves, c.state, c.r).c_target_final);
}

TEST(Controller, ConfigValidation) {
  ControllerConfig c;
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Controller, NonFiniteCurveThrows) {
  SplineCurve bad(1, 2, {0.0, std::nan("")});
  SplineCurve ok(1, 2, {0.0, 1.0});
  EpisodeState s;
  s.remaining_budget = 1.0;
  EXPECT_THROW(decide_on_curves({bad, ok, 1.0, 1.0, 1.0}, s, std::nullopt), ControllerError);
}

TEST(ControllerPolicy, BudgetOnlyCampaignHasUnitAlpha) {
  ImpressionStream s({{{1, 0.5}, {2, 0.5}}, {{1, 0.9}}, {{3, 1.0}}});
  const auto pol = make_controller_policy(constant_checkpoint(0.8, 1.0), 0, {});
  const auto c = run_campaign(s, {10.0, std::nullopt}, pol);
  for (const auto& rec : c.log) EXPECT_EQ(rec.bid.alpha.value_or(1.0), 1.0);
  const auto t = alpha_trace(c, std::nullopt);
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.roi_ratio, 0.0);
}

TEST(ControllerPolicy, LooseTargetPassesThrough) {
  ImpressionStream s({{{1, 0.5}, {2, 0.5}}, {{1, 0.9}}, {{3, 1.0}}});
  const auto pol = make_controller_policy(constant_checkpoint(0.8, 1.0), 0, {});
  const auto c = run_campaign(s, {10.0, 1e-9}, pol);
  for (const auto& rec : c.log) EXPECT_EQ(rec.bid.alpha.value_or(1.0), 1.0);
  EXPECT_THROW(make_controller_policy(nullptr, 0, {}), std::invalid_argument);
}
