#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "autobid/csv_io.hpp"
#include "autobid/evaluation.hpp"

using namespace autobid;
namespace fs = std::filesystem;

namespace {

GeneratorConfig small() {
  GeneratorConfig g;
  g.num_steps = 12;
  g.num_days = 3;
  g.train_days = 2;
  g.num_advertisers = 2;
  g.impressions_per_step = 20;
  return g;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("autobid_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

}  // namespace

TEST(Generator, SeededFilesIdentical) {
  const auto a = scratch("gen_a"), b = scratch("gen_b");
  write_suite(generate(small()), a);
  write_suite(generate(small()), b);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
  }
}

TEST(Generator, ZeroSigmaValuesAtLocation) {
  auto g = small();
  g.value_sigma = 0.0;
  const auto s = generate(g);
  for (const auto& e : s.episodes) {
    const double want = g.value_location * s.advertisers[e.advertiser.id].value_scale;
    for (const auto& b : e.stream.buckets())
      for (const auto& imp : b) EXPECT_DOUBLE_EQ(imp.value, want);
  }
}

TEST(Generator, EmpiricalMeanWithinThreeStandardErrors) {
  auto g = small();
  g.num_advertisers = 1;
  g.num_days = 10;
  g.num_steps = 48;
  const auto s = generate(g);
  std::vector<double> v;
  for (const auto& e : s.episodes)
    for (const auto& b : e.stream.buckets())
      for (const auto& imp : b) v.push_back(imp.value);
  ASSERT_GE(v.size(), 8000u);
  double m = 0, sq = 0;
  for (double x : v) m += x;
  m /= v.size();
  for (double x : v) sq += (x - m) * (x - m);
  const double se = std::sqrt(sq / (v.size() - 1) / v.size());
  EXPECT_NEAR(m, expected_value_mean(g, s.advertisers[0].value_scale), 3 * se);
}

TEST(Generator, SplitByDay) {
  const auto s = generate(small());
  EXPECT_EQ(s.train_episodes().size(), 4u);
  EXPECT_EQ(s.test_episodes().size(), 2u);
  for (const auto* e : s.test_episodes()) EXPECT_GE(e->day, 2u);
  auto bad = small();
  bad.value_sigma = -1;
  EXPECT_THROW(generate(bad), std::invalid_argument);
}

TEST(Evaluate, ZeroPolicy) {
  const auto s = generate(small());
  const auto eps = s.test_episodes();
  const std::vector<NamedPolicy> p{fixed_policy(0.0)};
  for (const auto& r : evaluate(p, s, eps, {})) {
    EXPECT_EQ(r.conv, 0.0);
    EXPECT_EQ(r.cost_over_budget, 0.0);
  }
}

TEST(Evaluate, UnlimitedBetaExhaustsBudget) {
  const auto s = generate(small());
  const auto eps = s.test_episodes();
  const std::vector<NamedPolicy> p{fixed_policy(1e9)};
  for (const auto& r : evaluate(p, s, eps, {})) {
    EXPECT_LE(r.cost_over_budget, 1.0);
    for (const auto& e : r.episodes) {
      double max_price = 0;
      for (const auto& b : s.episodes[e.day * 2 + e.advertiser].stream.buckets())
        for (const auto& imp : b) max_price = std::max(max_price, imp.price);
      EXPECT_GT(e.cost, e.budget - max_price);
    }
  }
}

TEST(Evaluate, GridShapeAndDeterminism) {
  const auto s = generate(small());
  const auto eps = s.test_episodes();
  const std::vector<NamedPolicy> p{fixed_policy(0.5), pid_policy({}), lp_replan_policy({})};
  EvalOptions two;
  two.threads = 2;
  const auto a = evaluate(p, s, eps, {});
  const auto b = evaluate(p, s, eps, {}, two);
  ASSERT_EQ(a.size(), 15u);
  ASSERT_EQ(b.size(), 15u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].policy, b[i].policy);
    EXPECT_EQ(a[i].conv, b[i].conv);
    EXPECT_EQ(a[i].mean_beta, b[i].mean_beta);
  }
  EXPECT_EQ(a[0].policy, "fixed");
  EXPECT_EQ(a[14].policy, "lp_replan");
}

TEST(Evaluate, ViolatorsCountAsZero) {
  const auto s = generate(small());
  const auto eps = s.test_episodes();
  const std::vector<NamedPolicy> p{fixed_policy(5.0)};
  EvalGrid g{{1.0}, {1.5}};
  const auto r = evaluate(p, s, eps, g).at(0);
  double sum = 0;
  std::size_t ok = 0;
  for (const auto& e : r.episodes) {
    EXPECT_EQ(e.compliant, e.value >= *e.roi_target * e.cost);
    if (e.compliant) {
      sum += e.value;
      ++ok;
    }
  }
  EXPECT_DOUBLE_EQ(r.conv, sum / r.episodes.size());
  EXPECT_DOUBLE_EQ(r.compliance_rate, static_cast<double>(ok) / r.episodes.size());
}

TEST(Evaluate, MissingCheckpoint) { EXPECT_THROW(learned_policy(nullptr), std::invalid_argument); }

TEST(Report, EmptyInput) {
  const auto dir = scratch("report_empty");
  EXPECT_NO_THROW(write_report({}, dir));
  EXPECT_TRUE(fs::exists(dir / "report.md"));
  EXPECT_EQ(lines(dir / "summary.csv"), 1u);
}

TEST(Report, SurfaceHas25Rows) {
  const auto s = generate(small());
  const auto eps = s.test_episodes();
  const std::vector<NamedPolicy> p{pid_policy({})};
  EvalGrid g;
  g.roi_scales = {0.8, 0.9, 1.0, 1.1, 1.2};
  const auto reports = evaluate(p, s, eps, g);
  const auto cells = surface(reports, "pid");
  ASSERT_EQ(cells.size(), 25u);
  const auto dir = scratch("report_grid");
  write_report(reports, dir);
  EXPECT_EQ(lines(dir / "surface_pid.csv"), 26u);
  EXPECT_NE(report_markdown(reports).find("pid"), std::string::npos);
}

TEST(Collect, SuiteTrajectoryIds) {
  const auto s = generate(small());
  const auto tr = s.train_episodes();
  CollectPlan plan;
  const auto ds = collect_suite(s, tr, plan);
  EXPECT_EQ(ds.tuples.size(), tr.size() * 3 * 12 * 10);
  std::size_t max_id = 0;
  for (const auto& t : ds.tuples) max_id = std::max(max_id, t.traj_id);
  EXPECT_EQ(max_id, tr.size() * 3 - 1);
  EXPECT_GT(median_exhaust_beta(s, tr), 0.0);
}
