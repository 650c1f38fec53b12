#include "autobid/generator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "autobid/oracle.hpp"
#include "autobid/stats.hpp"

namespace autobid {

void GeneratorConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("GeneratorConfig: ") + what);
  };
  need(num_steps >= 1, "num_steps must be >= 1");
  need(num_days >= 1, "num_days must be >= 1");
  need(train_days <= num_days, "train_days must be <= num_days");
  need(num_advertisers >= 1, "num_advertisers must be >= 1");
  need(num_categories >= 1, "num_categories must be >= 1");
  need(impressions_per_step >= 0.0, "impressions_per_step must be >= 0");
  need(volume_amplitude >= 0.0 && volume_amplitude < 1.0, "volume_amplitude must be in [0, 1)");
  need(value_location > 0.0, "value_location must be > 0");
  need(value_sigma >= 0.0, "value_sigma must be >= 0");
  need(advertiser_scale_lo > 0.0 && advertiser_scale_hi >= advertiser_scale_lo,
       "need 0 < advertiser_scale_lo <= advertiser_scale_hi");
  need(std::isfinite(price_gamma), "price_gamma must be finite");
  need(price_location > 0.0, "price_location must be > 0");
  need(price_sigma >= 0.0, "price_sigma must be >= 0");
  need(competition_amplitude >= 0.0 && competition_amplitude < 1.0,
       "competition_amplitude must be in [0, 1)");
  need(day_jitter >= 0.0 && day_jitter < 1.0, "day_jitter must be in [0, 1)");
  need(budget_fraction > 0.0, "budget_fraction must be > 0");
}

std::vector<const Episode*> SyntheticSuite::train_episodes() const {
  std::vector<const Episode*> out;
  for (const auto& e : episodes)
    if (is_train(e)) out.push_back(&e);
  return out;
}

std::vector<const Episode*> SyntheticSuite::test_episodes() const {
  std::vector<const Episode*> out;
  for (const auto& e : episodes)
    if (!is_train(e)) out.push_back(&e);
  return out;
}

double expected_value_mean(const GeneratorConfig& config, double advertiser_scale) {
  return config.value_location * advertiser_scale * std::exp(0.5 * config.value_sigma * config.value_sigma);
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

ImpressionStream make_day(const GeneratorConfig& c, const AdvertiserProfile& adv, double day_level,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::vector<Impression>> steps(c.num_steps);
  for (std::size_t t = 0; t < c.num_steps; ++t) {
    const double phase = two_pi * static_cast<double>(t) / static_cast<double>(c.num_steps);
    const double rate =
        c.impressions_per_step * (1.0 + c.volume_amplitude * std::sin(phase + adv.volume_phase));
    const double level = c.price_location * day_level *
                         (1.0 + c.competition_amplitude * std::sin(phase + adv.price_phase));
    std::poisson_distribution<int> count(rate);
    const int n = rate > 0.0 ? count(rng) : 0;
    steps[t].reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double v = c.value_location * adv.value_scale * std::exp(c.value_sigma * z(rng));
      const double eps = level * std::exp(c.price_sigma * z(rng));
      steps[t].push_back({v, eps * std::pow(v, c.price_gamma)});
    }
  }
  return ImpressionStream(std::move(steps));
}

}  // namespace

SyntheticSuite generate(const GeneratorConfig& config) {
  config.validate();
  SyntheticSuite suite;
  suite.config = config;

  auto prof_rng = make_rng(config.seed, 0xad, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t a = 0; a < config.num_advertisers; ++a) {
    AdvertiserProfile p;
    p.info = {a, config.num_advertisers, a % config.num_categories, config.num_categories};
    const double log_lo = std::log(config.advertiser_scale_lo);
    const double log_hi = std::log(config.advertiser_scale_hi);
    p.value_scale = std::exp(log_lo + (log_hi - log_lo) * unit(prof_rng));
    p.volume_phase = two_pi * unit(prof_rng);
    p.price_phase = two_pi * unit(prof_rng);
    suite.advertisers.push_back(p);
  }

  for (std::size_t d = 0; d < config.num_days; ++d) {
    auto day_rng = make_rng(config.seed, 0xda, d);
    const double day_level = 1.0 + config.day_jitter * (2.0 * unit(day_rng) - 1.0);
    for (std::size_t a = 0; a < config.num_advertisers; ++a) {
      auto rng = make_rng(config.seed, d + 1, a + 1);
      Episode e;
      e.day = d;
      e.day_of_week = static_cast<int>(d % 7);
      e.advertiser = suite.advertisers[a].info;
      e.stream = make_day(config, suite.advertisers[a], day_level, rng);
      suite.episodes.push_back(std::move(e));
    }
  }
  calibrate(suite);
  return suite;
}

void calibrate(SyntheticSuite& suite) {
  const std::size_t n_adv = suite.config.num_advertisers;
  std::vector<std::vector<const Episode*>> by_adv(n_adv);
  for (const auto& e : suite.episodes) {
    if (e.advertiser.id >= n_adv) throw std::invalid_argument("calibrate: advertiser id out of range");
    // Fall back to every day when there is no training split.
    if (suite.is_train(e) || suite.config.train_days == 0) by_adv[e.advertiser.id].push_back(&e);
  }
  suite.base_budget.assign(n_adv, 0.0);
  suite.reference_roi.assign(n_adv, 0.0);
  for (std::size_t a = 0; a < n_adv; ++a) {
    if (by_adv[a].empty()) continue;
    double total = 0.0;
    for (const Episode* e : by_adv[a])
      for (const auto& bucket : e->stream.buckets())
        for (const auto& imp : bucket) total += imp.price;
    const double budget = suite.config.budget_fraction * total / static_cast<double>(by_adv[a].size());
    suite.base_budget[a] = budget;
    std::vector<double> rois;
    for (const Episode* e : by_adv[a]) {
      const ExhaustResult x = exhaust_beta(e->stream, 1, budget);
      if (x.cost > 0.0) rois.push_back(x.value / x.cost);
    }
    suite.reference_roi[a] = stats::percentile(rois, 50.0);
  }
}

}  // namespace autobid
