#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "autobid/auction.hpp"
#include "autobid/hindsight.hpp"

namespace autobid {

/// Synthetic auction days. Per step the number of opportunities is Poisson
/// with an intraday sinusoidal rate; pValues are log-normal around
/// value_location times an advertiser scale; competing prices are
/// eps * value^price_gamma with eps log-normal around a price level that
/// also swings through the day and shifts per day.
struct GeneratorConfig {
  std::size_t num_steps = 48;
  std::size_t num_days = 21;
  std::size_t train_days = 14;
  std::size_t num_advertisers = 6;
  std::size_t num_categories = 3;
  double impressions_per_step = 60.0;
  double volume_amplitude = 0.5;  // in [0, 1)
  double value_location = 1.0;    // median pValue before the advertiser scale
  double value_sigma = 0.5;
  double advertiser_scale_lo = 0.5;
  double advertiser_scale_hi = 2.0;
  double price_gamma = 0.8;
  double price_location = 0.6;
  double price_sigma = 0.4;
  double competition_amplitude = 0.4;  // in [0, 1)
  double day_jitter = 0.1;             // price level multiplier in [1 - j, 1 + j]
  double budget_fraction = 0.35;       // base budget / mean daily total price
  std::uint64_t seed = 42;

  void validate() const;
};

struct AdvertiserProfile {
  AdvertiserInfo info;
  double value_scale = 1.0;
  double volume_phase = 0.0;
  double price_phase = 0.0;
};

struct Episode {
  std::size_t day = 0;
  int day_of_week = 0;
  AdvertiserInfo advertiser;
  ImpressionStream stream;
};

struct SyntheticSuite {
  GeneratorConfig config;
  std::vector<AdvertiserProfile> advertisers;
  std::vector<Episode> episodes;      // day-major, then advertiser
  std::vector<double> base_budget;    // per advertiser
  std::vector<double> reference_roi;  // per advertiser, hindsight ROI at the base budget

  bool is_train(const Episode& e) const { return e.day < config.train_days; }
  std::vector<const Episode*> train_episodes() const;
  std::vector<const Episode*> test_episodes() const;
};

/// Deterministic for a given config (including its seed).
SyntheticSuite generate(const GeneratorConfig& config);

/// Mean pValue of an advertiser under the log-normal model.
double expected_value_mean(const GeneratorConfig& config, double advertiser_scale);

/// Base budgets and reference ROIs from the training days of `suite`:
/// budget_fraction times the mean daily total price, and the median ROI of
/// spending that budget with the exhaust coefficient.
void calibrate(SyntheticSuite& suite);

}  // namespace autobid
