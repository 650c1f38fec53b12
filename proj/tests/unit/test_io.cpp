#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "autobid/csv_io.hpp"

namespace autobid {
inline bool operator==(const Impression& a, const Impression& b) { return a.value == b.value && a.price == b.price; }
}  // namespace autobid

using namespace autobid;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("autobid_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GeneratorConfig small() {
  GeneratorConfig g;
  g.num_steps = 6;
  g.num_days = 2;
  g.train_days = 1;
  g.num_advertisers = 2;
  g.impressions_per_step = 5;
  return g;
}

}  // namespace

TEST(ImpressionsCsv, RoundTripWithEmptySteps) {
  ImpressionStream s({{{1.5, 0.25}}, {}, {{2.0, 1.0}, {0.1, 0.3}}, {}});
  std::stringstream buf;
  write_impressions_csv(s, buf);
  EXPECT_EQ(buf.str().substr(0, 17), "step,value,price\n");
  const auto back = read_impressions_csv(buf, 4);
  ASSERT_EQ(back.num_steps(), 4u);
  EXPECT_EQ(back.buckets(), s.buckets());
}

TEST(ImpressionsCsv, Malformed) {
  std::stringstream bad("step,value,price\n1,abc,2\n");
  EXPECT_THROW(read_impressions_csv(bad), FormatError);
  std::stringstream neg("step,value,price\n0,1,1\n");
  EXPECT_THROW(read_impressions_csv(neg), FormatError);
}

TEST(DatasetCsv, RoundTrip) {
  HindsightDataset ds;
  ds.samples_per_step = 2;
  FeatureVector f{};
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.1 * i + 1.0 / 3.0;
  ds.tuples.push_back({3, 1, f, 0.123456789012345, 10.5, 20.25});
  ds.tuples.push_back({3, 1, f, 0.7, 11.0, 21.0});
  const auto p = scratch("ds") / "d.csv";
  write_dataset_csv(ds, p);
  const auto back = read_dataset_csv(p);
  ASSERT_EQ(back.tuples.size(), 2u);
  EXPECT_EQ(back.samples_per_step, 2u);
  EXPECT_EQ(back.tuples[0].beta_hat, ds.tuples[0].beta_hat);
  EXPECT_EQ(back.tuples[0].features, f);
  EXPECT_EQ(back.tuples[1].realized_value, 21.0);
}

TEST(Suite, RoundTrip) {
  const auto s = generate(small());
  const auto dir = scratch("suite");
  write_suite(s, dir);
  const auto back = read_suite(dir);
  ASSERT_EQ(back.episodes.size(), s.episodes.size());
  EXPECT_EQ(back.base_budget, s.base_budget);
  EXPECT_EQ(back.reference_roi, s.reference_roi);
  for (std::size_t i = 0; i < s.episodes.size(); ++i) {
    EXPECT_EQ(back.episodes[i].stream.buckets(), s.episodes[i].stream.buckets());
    EXPECT_EQ(back.episodes[i].day_of_week, s.episodes[i].day_of_week);
  }
  EXPECT_THROW(read_suite(scratch("nothing")), std::exception);
}

TEST(GeneratorJson, PartialKeepsDefaults) {
  const auto g = generator_config_from_json(R"({"num_steps": 7, "seed": 3})");
  EXPECT_EQ(g.num_steps, 7u);
  EXPECT_EQ(g.seed, 3u);
  EXPECT_EQ(g.num_days, GeneratorConfig{}.num_days);
  const auto back = generator_config_from_json(generator_config_to_json(g));
  EXPECT_EQ(back.num_steps, 7u);
  EXPECT_THROW(generator_config_from_json("{\"bogus\": 1}"), FormatError);
}

TEST(Checkpoint, JsonRoundTrip) {
  Checkpoint c;
  c.spline = {3, 5};
  c.model = MetaModel::random(kFeatureDim, 4, c.spline.num_control(), 1);
  c.norm = {12.5, 0.8, 40.0, 1.3};
  c.features.count_scale = 50;
  const auto p = scratch("ckpt") / "m.json";
  save_checkpoint(c, p);
  const auto back = load_checkpoint(p);
  EXPECT_EQ(back.model.flatten(), c.model.flatten());
  EXPECT_EQ(back.norm.b_scale, 12.5);
  EXPECT_EQ(back.norm.x_support, 1.3);
  EXPECT_EQ(back.spline.num_grid, 5u);
  EXPECT_EQ(back.features.count_scale, 50.0);
  EXPECT_THROW(checkpoint_from_json("{}"), std::exception);
}

TEST(ReportsJson, RoundTrip) {
  MetricsReport r;
  r.policy = "bspline";
  r.budget_scale = 0.75;
  r.roi_scale = 1.1;
  r.conv = 12.5;
  EpisodeMetrics e;
  e.policy = "bspline";
  e.roi_target = 1.7;
  e.trace = {{1, 0.9, -0.5}, {2, 1.0, 0.0}};
  r.episodes.push_back(e);
  MetricsReport bcb;
  bcb.policy = "pid";
  const auto p = scratch("rep") / "r.json";
  write_reports_json(std::vector<MetricsReport>{r, bcb}, p);
  const auto back = read_reports_json(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].roi_scale, 1.1);
  EXPECT_FALSE(back[1].roi_scale);
  ASSERT_EQ(back[0].episodes.size(), 1u);
  EXPECT_EQ(back[0].episodes[0].trace.size(), 2u);
  EXPECT_EQ(back[0].episodes[0].trace[0].alpha, 0.9);
  EXPECT_EQ(back[0].episodes[0].roi_target, 1.7);
}

TEST(CampaignCsv, EmptyAnnotations) {
  ImpressionStream s({{{1, 0.5}}});
  const auto c = run_campaign(s, {1, std::nullopt}, [](const DecisionContext&) { return Bid(1.0); });
  std::stringstream out;
  write_campaign_csv(c, out);
  std::string header, row;
  std::getline(out, header);
  std::getline(out, row);
  EXPECT_EQ(header, "step,beta,alpha,cost,value,remaining_budget,delta_roi");
  EXPECT_EQ(row.back(), ',');
}

TEST(ItemsCsv, Reads) {
  const auto p = scratch("items") / "i.csv";
  std::ofstream(p) << "value,cost\n4,3\n3,2\n2,1\n";
  const auto items = read_items_csv(p);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].value, 4.0);
  EXPECT_EQ(items[2].cost, 1.0);
}
