#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "autobid/baselines.hpp"

using namespace autobid;

namespace {

EpisodeState at(std::size_t step, double budget, double spent) {
  EpisodeState s;
  s.step = step;
  s.num_steps = 10;
  s.initial_budget = budget;
  s.remaining_budget = budget - spent;
  s.hist_cost = spent;
  return s;
}

}  // namespace

TEST(Pid, ZeroErrorKeepsBeta) {
  PidConfig cfg;
  cfg.beta0 = 0.7;
  PidState st;
  // step 1: nothing planned, nothing spent
  EXPECT_DOUBLE_EQ(pid_decide(at(1, 100, 0), std::nullopt, st, cfg), 0.7);
  // step 6 exactly on plan
  EXPECT_DOUBLE_EQ(pid_decide(at(6, 100, 50), std::nullopt, st, cfg), 0.7);
}

TEST(Pid, UnderspendRaisesBeta) {
  PidConfig cfg;
  PidState st;
  double prev = pid_decide(at(1, 100, 0), std::nullopt, st, cfg);
  for (std::size_t t = 2; t <= 10; ++t) {
    const double b = pid_decide(at(t, 100, 0), std::nullopt, st, cfg);
    EXPECT_GT(b, prev) << t;
    prev = b;
  }
}

TEST(Pid, ZeroGainsConstant) {
  PidConfig cfg;
  cfg.kp = cfg.ki = cfg.kd = 0.0;
  cfg.beta0 = 1.3;
  PidState st;
  for (std::size_t t = 1; t <= 10; ++t)
    EXPECT_DOUBLE_EQ(pid_decide(at(t, 100, 90.0 * t / 10), std::nullopt, st, cfg), 1.3);
}

TEST(Pid, ClampAndRoiMode) {
  PidConfig cfg;
  cfg.beta_max = 1.5;
  PidState st;
  for (std::size_t t = 1; t <= 10; ++t) EXPECT_LE(pid_decide(at(t, 100, 0), std::nullopt, st, cfg), 1.5);
  cfg.mode = PidMode::kRoiError;
  auto s = at(3, 100, 10);
  s.hist_value = 30;
  EXPECT_NEAR(pid_error(s, 2.0, cfg), 0.5, 1e-12);
  EXPECT_EQ(pid_error(at(1, 100, 0), 2.0, cfg), 0.0);
  cfg.beta_min = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(LpReplan, PriorAndEmptyBudget) {
  LpReplanConfig cfg;
  cfg.prior_beta = 0.42;
  EXPECT_EQ(lp_replan_decide(at(1, 100, 0), {}, std::nullopt, cfg), 0.42);
  std::vector<StepObservation> h{{{1.0}, {0.5}, {true}}};
  EXPECT_EQ(lp_replan_decide(at(2, 100, 100), h, std::nullopt, cfg), 0.0);
}

TEST(LpReplan, ConvergesToHindsightExhaust) {
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> val(0.0, 0.5), eps(-0.5, 0.4);
  std::vector<std::vector<Impression>> b(200);
  double total = 0;
  for (auto& s : b)
    for (int i = 0; i < 40; ++i) {
      const double v = val(rng);
      s.push_back({v, eps(rng) * v});
      total += s.back().price;
    }
  ImpressionStream stream(b);
  const double budget = 0.3 * total;
  const double truth = exhaust_beta(stream, 1, budget).beta;
  const auto c = run_campaign(stream, {budget, std::nullopt}, make_lp_replan_policy({truth * 2, GreedyMode::kStopAtFirstViolation}));
  const double late = c.log[150].bid.beta;
  EXPECT_NEAR(late / truth, 1.0, 0.1);
}

TEST(Factories, FreshState) {
  ImpressionStream s({{{1, 0.5}}, {{1, 0.5}}, {{1, 0.5}}});
  const auto fixed = make_fixed_policy(0.0);
  EXPECT_EQ(run_campaign(s, {10, std::nullopt}, fixed).total_cost(), 0.0);
  PidConfig cfg;
  const auto a = run_campaign(s, {1.0, std::nullopt}, make_pid_policy(cfg));
  const auto b = run_campaign(s, {1.0, std::nullopt}, make_pid_policy(cfg));
  for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].bid.beta, b.log[i].bid.beta);
}
