#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "autobid/oracle.hpp"

using namespace autobid;

namespace {

SelectionInstance appendix() { return {{{4, 3}, {3, 2}, {2, 1}}, 4.0, 1.0}; }

double enumerate(const SelectionInstance& in) {
  const std::size_t n = in.items.size();
  double best = 0.0;
  for (std::uint64_t m = 0; m < (1ull << n); ++m) {
    double v = 0, c = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1) {
        v += in.items[i].value;
        c += in.items[i].cost;
      }
    if (c > in.budget) continue;
    if (in.roi_target && v - *in.roi_target * c < 0) continue;
    best = std::max(best, v);
  }
  return best;
}

SelectionInstance random_instance(std::mt19937_64& rng, std::size_t n, bool roi) {
  std::uniform_real_distribution<double> u(0.1, 5.0);
  SelectionInstance in;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    in.items.push_back({u(rng), u(rng)});
    total += in.items.back().cost;
  }
  in.budget = std::uniform_real_distribution<double>(0.1, 0.8)(rng) * total;
  if (roi) in.roi_target = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  return in;
}

}  // namespace

TEST(Milp, ThreeItemRoiExample) {
  const auto r = milp_oracle(appendix());
  EXPECT_DOUBLE_EQ(r.total_value, 6.0);
  EXPECT_EQ(r.chosen, (std::vector<bool>{true, false, true}));
}

TEST(Milp, ZeroBudget) {
  auto in = appendix();
  in.budget = 0.0;
  const auto r = milp_oracle(in);
  EXPECT_EQ(r.total_value, 0.0);
  EXPECT_EQ(std::count(r.chosen.begin(), r.chosen.end(), true), 0);
}

TEST(Milp, MatchesEnumeration) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 200; ++rep) {
    const auto in = random_instance(rng, 12, rep % 2);
    EXPECT_NEAR(milp_oracle(in).total_value, enumerate(in), 1e-9) << rep;
  }
}

TEST(Milp, SizeLimit) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(milp_oracle(random_instance(rng, 30, false)), SizeLimitError);
}

TEST(Greedy, ThreeItemRoiExample) {
  const auto r = greedy_fcs(appendix());
  EXPECT_DOUBLE_EQ(r.total_value, 5.0);
  EXPECT_EQ(r.chosen, (std::vector<bool>{false, true, true}));
  ASSERT_TRUE(r.beta_star);
  // last prefix item is B = (3, 2)
  EXPECT_DOUBLE_EQ(*r.beta_star, 2.0 / 3.0);
}

TEST(Greedy, SingleItem) {
  const SelectionInstance in{{{3, 2}}, 5.0, 1.0};
  const auto r = greedy_fcs(in);
  EXPECT_TRUE(r.chosen[0]);
  EXPECT_DOUBLE_EQ(*r.beta_star, 2.0 / 3.0);
}

TEST(Greedy, BoundAgainstExactOptimum) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rep % 20;
    const auto in = random_instance(rng, n, rep % 2);
    double vmax = 0;
    for (const auto& it : in.items) vmax = std::max(vmax, it.value);
    const double g = greedy_fcs(in, GreedyMode::kStopAtFirstViolation).total_value;
    EXPECT_GT(g, milp_oracle(in).total_value - vmax) << rep;
  }
}

TEST(Fractional, AppendixBudgetOnly) {
  auto in = appendix();
  in.roi_target.reset();
  EXPECT_NEAR(fractional_relaxation(in), 5.0 + 4.0 / 3.0, 1e-12);
}

TEST(Fractional, EverythingFits) {
  auto in = appendix();
  in.budget = 100.0;
  in.roi_target.reset();
  EXPECT_DOUBLE_EQ(fractional_relaxation(in), 9.0);
}

TEST(Fractional, ProofChain) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 300; ++rep) {
    const auto in = random_instance(rng, 1 + rep % 15, rep % 2);
    double vmax = 0;
    for (const auto& it : in.items) vmax = std::max(vmax, it.value);
    const double frac = fractional_relaxation(in);
    EXPECT_LE(milp_oracle(in).total_value, frac + 1e-9);
    EXPECT_LT(frac - greedy_fcs(in, GreedyMode::kStopAtFirstViolation).total_value, vmax);
  }
}

TEST(ExhaustBeta, AppendixInstance) {
  const auto e = exhaust_beta(appendix(), 4.0);
  EXPECT_DOUBLE_EQ(e.beta, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(e.cost, 3.0);
}

TEST(ExhaustBeta, LargeBudgetFullSpend) {
  ImpressionStream s({{{4, 3}, {3, 2}, {2, 1}}});
  const auto e = exhaust_beta(s, 1, 100.0);
  EXPECT_DOUBLE_EQ(e.beta, 0.75);
  EXPECT_DOUBLE_EQ(e.beta, full_spend_beta(s));
  EXPECT_DOUBLE_EQ(e.cost, 6.0);
}

TEST(ExhaustBeta, NextBreakpointOvershoots) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<Impression>> b(4);
    std::vector<double> bps;
    double total = 0;
    for (auto& s : b)
      for (int i = 0; i < 10; ++i) {
        s.push_back({u(rng), u(rng)});
        bps.push_back(breakpoint(s.back()));
        total += s.back().price;
      }
    ImpressionStream s(b);
    const double budget = 0.4 * total;
    const auto e = exhaust_beta(s, 1, budget);
    EXPECT_LE(run_fixed(s, 1, e.beta).cost, budget);
    std::sort(bps.begin(), bps.end());
    const auto next = std::upper_bound(bps.begin(), bps.end(), e.beta);
    ASSERT_NE(next, bps.end());
    EXPECT_GT(run_fixed(s, 1, *next).cost, budget);
  }
}

TEST(Selection, Validates) {
  SelectionInstance in{{{1, -1}}, 1.0, std::nullopt};
  EXPECT_THROW(in.validate(), std::invalid_argument);
}
