#include "autobid/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace autobid {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

std::size_t to_size(const std::string& s, std::size_t line_no) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw FormatError("line " + std::to_string(line_no) + ": not a count: '" + s + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void expect_header(std::istream& in, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty file, expected header '" + expected + "'");
  strip_cr(line);
  if (line != expected) throw FormatError("bad header '" + line + "', expected '" + expected + "'");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string dataset_header() {
  std::string h = "traj_id,step,beta_hat,realized_cost,realized_value";
  for (std::size_t i = 0; i < kFeatureDim; ++i) h += ",f" + std::to_string(i);
  return h;
}

}  // namespace

void write_impressions_csv(const ImpressionStream& stream, std::ostream& out) {
  out << std::setprecision(17) << "step,value,price\n";
  for (std::size_t t = 1; t <= stream.num_steps(); ++t)
    for (const auto& imp : stream.step(t)) out << t << ',' << imp.value << ',' << imp.price << '\n';
}

void write_impressions_csv(const ImpressionStream& stream, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_impressions_csv(stream, out);
}

ImpressionStream read_impressions_csv(std::istream& in, std::optional<std::size_t> num_steps) {
  expect_header(in, "step,value,price");
  std::vector<std::vector<Impression>> steps;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 3) throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields");
    const std::size_t t = to_size(cells[0], line_no);
    if (t == 0) throw FormatError("line " + std::to_string(line_no) + ": steps are 1-based");
    if (num_steps && t > *num_steps)
      throw FormatError("line " + std::to_string(line_no) + ": step beyond T=" + std::to_string(*num_steps));
    if (steps.size() < t) steps.resize(t);
    steps[t - 1].push_back({to_double(cells[1], line_no), to_double(cells[2], line_no)});
  }
  if (num_steps) steps.resize(*num_steps);
  return ImpressionStream(std::move(steps));
}

ImpressionStream read_impressions_csv(const std::filesystem::path& path,
                                      std::optional<std::size_t> num_steps) {
  auto in = open_in(path);
  return read_impressions_csv(in, num_steps);
}

std::vector<SelectionItem> read_items_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "value,cost");
  std::vector<SelectionItem> items;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw FormatError("line " + std::to_string(line_no) + ": expected 2 fields");
    items.push_back({to_double(cells[0], line_no), to_double(cells[1], line_no)});
  }
  return items;
}

void write_dataset_csv(const HindsightDataset& dataset, const std::filesystem::path& path) {
  {
    auto out = open_out(path);
    out << std::setprecision(17) << dataset_header() << '\n';
    for (const auto& t : dataset.tuples) {
      out << t.traj_id << ',' << t.step << ',' << t.beta_hat << ',' << t.realized_cost << ','
          << t.realized_value;
      for (double f : t.features) out << ',' << f;
      out << '\n';
    }
  }
  json manifest{{"samples_per_step", dataset.samples_per_step},
                {"num_tuples", dataset.tuples.size()},
                {"feature_dim", kFeatureDim}};
  auto m = open_out(path.string() + ".json");
  m << manifest.dump(2) << '\n';
}

HindsightDataset read_dataset_csv(const std::filesystem::path& path) {
  HindsightDataset ds;
  {
    auto m = open_in(path.string() + ".json");
    const json manifest = json::parse(m);
    ds.samples_per_step = manifest.at("samples_per_step").get<std::size_t>();
    if (manifest.value("feature_dim", kFeatureDim) != kFeatureDim)
      throw FormatError("dataset: feature dimension mismatch");
  }
  auto in = open_in(path);
  expect_header(in, dataset_header());
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5 + kFeatureDim)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(5 + kFeatureDim) +
                        " fields");
    HindsightTuple t;
    t.traj_id = to_size(cells[0], line_no);
    t.step = to_size(cells[1], line_no);
    t.beta_hat = to_double(cells[2], line_no);
    t.realized_cost = to_double(cells[3], line_no);
    t.realized_value = to_double(cells[4], line_no);
    for (std::size_t i = 0; i < kFeatureDim; ++i) t.features[i] = to_double(cells[5 + i], line_no);
    ds.tuples.push_back(t);
  }
  return ds;
}

void write_campaign_csv(const CampaignResult& campaign, std::ostream& out) {
  out << std::setprecision(17) << "step,beta,alpha,cost,value,remaining_budget,delta_roi\n";
  for (const auto& r : campaign.log) {
    out << r.step << ',' << r.bid.beta << ',';
    if (r.bid.alpha) out << *r.bid.alpha;
    out << ',' << r.outcome.cost << ',' << r.outcome.value << ',' << r.remaining_budget << ',';
    if (r.bid.delta_roi) out << *r.bid.delta_roi;
    out << '\n';
  }
}

void write_campaign_csv(const CampaignResult& campaign, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_campaign_csv(campaign, out);
}

namespace {

json config_to_json(const GeneratorConfig& c) {
  return {{"num_steps", c.num_steps},
          {"num_days", c.num_days},
          {"train_days", c.train_days},
          {"num_advertisers", c.num_advertisers},
          {"num_categories", c.num_categories},
          {"impressions_per_step", c.impressions_per_step},
          {"volume_amplitude", c.volume_amplitude},
          {"value_location", c.value_location},
          {"value_sigma", c.value_sigma},
          {"advertiser_scale_lo", c.advertiser_scale_lo},
          {"advertiser_scale_hi", c.advertiser_scale_hi},
          {"price_gamma", c.price_gamma},
          {"price_location", c.price_location},
          {"price_sigma", c.price_sigma},
          {"competition_amplitude", c.competition_amplitude},
          {"day_jitter", c.day_jitter},
          {"budget_fraction", c.budget_fraction},
          {"seed", c.seed}};
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig c;
  c.num_steps = j.value("num_steps", c.num_steps);
  c.num_days = j.value("num_days", c.num_days);
  c.train_days = j.value("train_days", c.train_days);
  c.num_advertisers = j.value("num_advertisers", c.num_advertisers);
  c.num_categories = j.value("num_categories", c.num_categories);
  c.impressions_per_step = j.value("impressions_per_step", c.impressions_per_step);
  c.volume_amplitude = j.value("volume_amplitude", c.volume_amplitude);
  c.value_location = j.value("value_location", c.value_location);
  c.value_sigma = j.value("value_sigma", c.value_sigma);
  c.advertiser_scale_lo = j.value("advertiser_scale_lo", c.advertiser_scale_lo);
  c.advertiser_scale_hi = j.value("advertiser_scale_hi", c.advertiser_scale_hi);
  c.price_gamma = j.value("price_gamma", c.price_gamma);
  c.price_location = j.value("price_location", c.price_location);
  c.price_sigma = j.value("price_sigma", c.price_sigma);
  c.competition_amplitude = j.value("competition_amplitude", c.competition_amplitude);
  c.day_jitter = j.value("day_jitter", c.day_jitter);
  c.budget_fraction = j.value("budget_fraction", c.budget_fraction);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::string stream_file(const Episode& e) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "streams/day%02zu_adv%02zu.csv", e.day, e.advertiser.id);
  return buf;
}

}  // namespace

void write_suite(const SyntheticSuite& suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "streams");
  json m;
  m["generator"] = config_to_json(suite.config);
  m["advertisers"] = json::array();
  for (const auto& a : suite.advertisers) {
    m["advertisers"].push_back({{"id", a.info.id},
                                {"category", a.info.category},
                                {"value_scale", a.value_scale},
                                {"volume_phase", a.volume_phase},
                                {"price_phase", a.price_phase}});
  }
  m["base_budget"] = suite.base_budget;
  m["reference_roi"] = suite.reference_roi;
  m["episodes"] = json::array();
  for (const auto& e : suite.episodes) {
    const std::string file = stream_file(e);
    write_impressions_csv(e.stream, dir / file);
    m["episodes"].push_back({{"day", e.day},
                             {"day_of_week", e.day_of_week},
                             {"advertiser", e.advertiser.id},
                             {"split", suite.is_train(e) ? "train" : "test"},
                             {"file", file}});
  }
  auto out = open_out(dir / "manifest.json");
  out << std::setprecision(17) << m.dump(2) << '\n';
}

SyntheticSuite read_suite(const std::filesystem::path& dir) {
  auto in = open_in(dir / "manifest.json");
  const json m = json::parse(in);
  SyntheticSuite s;
  s.config = config_from_json(m.at("generator"));
  s.config.validate();
  for (const auto& a : m.at("advertisers")) {
    AdvertiserProfile p;
    p.info = {a.at("id").get<std::size_t>(), s.config.num_advertisers, a.at("category").get<std::size_t>(),
              s.config.num_categories};
    p.value_scale = a.value("value_scale", 1.0);
    p.volume_phase = a.value("volume_phase", 0.0);
    p.price_phase = a.value("price_phase", 0.0);
    s.advertisers.push_back(p);
  }
  for (const auto& e : m.at("episodes")) {
    Episode ep;
    ep.day = e.at("day").get<std::size_t>();
    ep.day_of_week = e.at("day_of_week").get<int>();
    const auto id = e.at("advertiser").get<std::size_t>();
    if (id >= s.advertisers.size()) throw FormatError("manifest: unknown advertiser " + std::to_string(id));
    ep.advertiser = s.advertisers[id].info;
    ep.stream = read_impressions_csv(dir / e.at("file").get<std::string>(), s.config.num_steps);
    s.episodes.push_back(std::move(ep));
  }
  if (m.contains("base_budget") && m.contains("reference_roi")) {
    s.base_budget = m.at("base_budget").get<std::vector<double>>();
    s.reference_roi = m.at("reference_roi").get<std::vector<double>>();
  } else {
    calibrate(s);
  }
  return s;
}

std::string generator_config_to_json(const GeneratorConfig& config) {
  return config_to_json(config).dump(2);
}

GeneratorConfig generator_config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw FormatError("generator config: expected an object");
    const json known = config_to_json(GeneratorConfig{});
    for (const auto& [key, _] : j.items())
      if (!known.contains(key)) throw FormatError("generator config: unknown key '" + key + "'");
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw FormatError(std::string("generator config: ") + e.what());
  }
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void write_reports_json(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  json out = json::array();
  for (const auto& r : reports) {
    json eps = json::array();
    for (const auto& e : r.episodes) {
      json trace = json::array();
      for (const auto& row : e.trace) trace.push_back({row.step, row.alpha, row.delta_roi});
      eps.push_back({{"day", e.day},
                     {"advertiser", e.advertiser},
                     {"budget", e.budget},
                     {"roi_target", optional_json(e.roi_target)},
                     {"cost", e.cost},
                     {"value", e.value},
                     {"compliant", e.compliant},
                     {"mean_beta", e.mean_beta},
                     {"corrected_steps", e.corrected_steps},
                     {"max_alpha_corrected", e.max_alpha_corrected},
                     {"trace", trace}});
    }
    out.push_back({{"policy", r.policy},
                   {"budget_scale", r.budget_scale},
                   {"roi_scale", optional_json(r.roi_scale)},
                   {"conv", r.conv},
                   {"compliance_rate", r.compliance_rate},
                   {"cost_over_budget", r.cost_over_budget},
                   {"mean_beta", r.mean_beta},
                   {"episodes", eps}});
  }
  auto f = open_out(path);
  f << out.dump() << '\n';
}

std::vector<MetricsReport> read_reports_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<MetricsReport> reports;
  try {
    for (const auto& j : json::parse(in)) {
      MetricsReport r;
      r.policy = j.at("policy").get<std::string>();
      r.budget_scale = j.at("budget_scale").get<double>();
      r.roi_scale = optional_from(j, "roi_scale");
      r.conv = j.at("conv").get<double>();
      r.compliance_rate = j.at("compliance_rate").get<double>();
      r.cost_over_budget = j.at("cost_over_budget").get<double>();
      r.mean_beta = j.at("mean_beta").get<double>();
      for (const auto& e : j.value("episodes", json::array())) {
        EpisodeMetrics m;
        m.policy = r.policy;
        m.budget_scale = r.budget_scale;
        m.roi_scale = r.roi_scale;
        m.day = e.at("day").get<std::size_t>();
        m.advertiser = e.at("advertiser").get<std::size_t>();
        m.budget = e.at("budget").get<double>();
        m.roi_target = optional_from(e, "roi_target");
        m.cost = e.at("cost").get<double>();
        m.value = e.at("value").get<double>();
        m.compliant = e.at("compliant").get<bool>();
        m.mean_beta = e.at("mean_beta").get<double>();
        m.corrected_steps = e.value("corrected_steps", std::size_t{0});
        m.max_alpha_corrected = e.value("max_alpha_corrected", 0.0);
        for (const auto& row : e.value("trace", json::array()))
          m.trace.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>(), row.at(2).get<double>()});
        r.episodes.push_back(std::move(m));
      }
      reports.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return reports;
}

}  // namespace autobid
