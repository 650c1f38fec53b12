#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "autobid/auction.hpp"

namespace autobid {

inline constexpr std::size_t kFeatureDim = 39;
using FeatureVector = std::array<double, kFeatureDim>;

// Layout of the state feature vector.
namespace feature {
inline constexpr std::size_t kDayOfWeek = 0;
inline constexpr std::size_t kStepsLeft = 1;
inline constexpr std::size_t kAdvertiserId = 2;
inline constexpr std::size_t kCategory = 3;
inline constexpr std::size_t kCurrentMean = 4;
inline constexpr std::size_t kCurrentPercentiles = 5;  // 10, 25, 40, 55, 70, 85
inline constexpr std::size_t kCurrentCount = 11;
inline constexpr std::size_t kValueHistory = 12;  // block of 12, see HistoryBlock
inline constexpr std::size_t kWinCostHistory = 24;
inline constexpr std::size_t kVolumeTotal = 36;
inline constexpr std::size_t kVolumeLast1 = 37;
inline constexpr std::size_t kVolumeLast3 = 38;

// Offsets inside a 12-wide history block.
inline constexpr std::size_t kHistMean = 0;
inline constexpr std::size_t kLast1Mean = 1;  // then p10, p50, p90
inline constexpr std::size_t kLast3Mean = 5;  // then p10, p50, p90
inline constexpr std::size_t kAllTimeP10 = 9;  // then p50, p90

inline constexpr std::array<double, 6> kCurrentPercentileLevels{10, 25, 40, 55, 70, 85};
}  // namespace feature

struct CalendarInfo {
  int day_of_week = 0;  // 0..6
  std::size_t step = 1;
  std::size_t num_steps = 1;
};

struct AdvertiserInfo {
  std::size_t id = 0;
  std::size_t num_advertisers = 1;
  std::size_t category = 0;
  std::size_t num_categories = 1;
};

struct FeatureOptions {
  double count_scale = 100.0;  // divisor for count/volume entries
};

/// `raw` keeps the unscaled statistics for audit. `normalized` divides
/// value/price statistics by `scale` (mean price of impressions won so far,
/// 1.0 before the first win) and counts by FeatureOptions::count_scale.
struct StateFeatures {
  FeatureVector normalized{};
  FeatureVector raw{};
  double scale = 1.0;
};

StateFeatures compute_features(std::span<const StepObservation> history,
                               std::span<const double> current_values,
                               const CalendarInfo& calendar, const AdvertiserInfo& advertiser,
                               const FeatureOptions& options = {});

struct HindsightTuple {
  std::size_t traj_id = 0;
  std::size_t step = 0;
  FeatureVector features{};
  double beta_hat = 0.0;
  double realized_cost = 0.0;
  double realized_value = 0.0;
};

/// Tuples in (trajectory, step, draw) order: each (trajectory, step) group is
/// a contiguous block of `samples_per_step` tuples sharing one feature vector.
struct HindsightDataset {
  std::vector<HindsightTuple> tuples;
  std::size_t samples_per_step = 0;

  void append(const HindsightDataset& other);
};

enum class BetaSampling { kUniform, kLogUniform };

struct CollectConfig {
  std::size_t samples_per_step = 10;  // L
  double beta_lo = 0.0;
  double beta_hi = 1.0;
  BetaSampling sampling = BetaSampling::kUniform;
  std::uint64_t seed = 0;
  FeatureOptions features;

  void validate() const;
};

/// Who is bidding on a recorded stream. Features at step tau are computed
/// from the history produced by bidding `behavior_beta` on steps 1..tau-1.
struct TrajectoryContext {
  std::size_t traj_id = 0;
  int day_of_week = 0;
  AdvertiserInfo advertiser;
  double behavior_beta = 1.0;
};

/// [0, 2 * beta_full], where beta_full wins every impression of the stream.
std::pair<double, double> default_beta_range(const ImpressionStream& stream);

/// Hindsight experience collection: for every step tau and each of L draws
/// beta ~ U, an uncapped fixed-coefficient rollout over [tau, T] is recorded
/// as (features, beta, realized cost, realized value). Every rollout is kept.
HindsightDataset collect(const ImpressionStream& stream, const TrajectoryContext& context,
                         const CollectConfig& config);

struct Anchor {
  double budget = 0.0;  // realized cost, reused as the budget label
  double beta = 0.0;
  double value = 0.0;
};

struct SupervisedState {
  std::size_t traj_id = 0;
  std::size_t step = 0;
  FeatureVector features{};
  std::vector<Anchor> anchors;  // ascending budget, no duplicate budgets
};

/// Groups tuples per (trajectory, step) and turns them into budget anchors.
/// Equal realized costs collapse onto the smallest coefficient.
std::vector<SupervisedState> relabel_as_supervision(const HindsightDataset& dataset);

}  // namespace autobid
