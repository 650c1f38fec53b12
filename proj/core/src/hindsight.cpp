#include "autobid/hindsight.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "autobid/oracle.hpp"
#include "autobid/stats.hpp"

namespace autobid {

namespace {

// mean, p10, p50, p90 of a population, written at out[0..3].
void summary4(std::span<const double> xs, double* out) {
  const auto s = stats::sorted_copy(xs);
  out[0] = stats::mean(s);
  out[1] = stats::percentile_sorted(s, 10);
  out[2] = stats::percentile_sorted(s, 50);
  out[3] = stats::percentile_sorted(s, 90);
}

// 12-wide block: historical mean; last-1 mean/p10/p50/p90; last-3
// mean/p10/p50/p90; all-time p10/p50/p90.
void history_block(const std::vector<std::vector<double>>& per_step, double* out) {
  std::vector<double> all;
  for (const auto& v : per_step) all.insert(all.end(), v.begin(), v.end());
  std::vector<double> last1;
  std::vector<double> last3;
  const std::size_t n = per_step.size();
  if (n >= 1) last1 = per_step[n - 1];
  for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i)
    last3.insert(last3.end(), per_step[i].begin(), per_step[i].end());

  const auto all_sorted = stats::sorted_copy(all);
  out[feature::kHistMean] = stats::mean(all_sorted);
  summary4(last1, out + feature::kLast1Mean);
  summary4(last3, out + feature::kLast3Mean);
  out[feature::kAllTimeP10] = stats::percentile_sorted(all_sorted, 10);
  out[feature::kAllTimeP10 + 1] = stats::percentile_sorted(all_sorted, 50);
  out[feature::kAllTimeP10 + 2] = stats::percentile_sorted(all_sorted, 90);
}

bool is_count_entry(std::size_t i) {
  return i == feature::kCurrentCount || i >= feature::kVolumeTotal;
}

bool is_money_entry(std::size_t i) {
  return (i >= feature::kCurrentMean && i < feature::kCurrentCount) ||
         (i >= feature::kValueHistory && i < feature::kVolumeTotal);
}

}  // namespace

StateFeatures compute_features(std::span<const StepObservation> history,
                               std::span<const double> current_values,
                               const CalendarInfo& calendar, const AdvertiserInfo& advertiser,
                               const FeatureOptions& options) {
  if (calendar.num_steps == 0 || calendar.step < 1 || calendar.step > calendar.num_steps)
    throw std::invalid_argument("compute_features: step out of range");

  StateFeatures f;
  FeatureVector& raw = f.raw;
  raw.fill(0.0);

  raw[feature::kDayOfWeek] = calendar.day_of_week;
  raw[feature::kStepsLeft] = static_cast<double>(calendar.num_steps - calendar.step + 1);
  raw[feature::kAdvertiserId] = static_cast<double>(advertiser.id);
  raw[feature::kCategory] = static_cast<double>(advertiser.category);

  const auto cur = stats::sorted_copy(current_values);
  raw[feature::kCurrentMean] = stats::mean(cur);
  for (std::size_t i = 0; i < feature::kCurrentPercentileLevels.size(); ++i)
    raw[feature::kCurrentPercentiles + i] =
        stats::percentile_sorted(cur, feature::kCurrentPercentileLevels[i]);
  raw[feature::kCurrentCount] = static_cast<double>(cur.size());

  std::vector<std::vector<double>> values_per_step;
  std::vector<std::vector<double>> won_per_step;
  values_per_step.reserve(history.size());
  won_per_step.reserve(history.size());
  double won_sum = 0.0;
  std::size_t won_count = 0;
  for (const auto& obs : history) {
    values_per_step.push_back(obs.values);
    won_per_step.push_back(obs.won_prices());
    for (double p : won_per_step.back()) won_sum += p;
    won_count += won_per_step.back().size();
  }
  if (!history.empty()) {
    history_block(values_per_step, raw.data() + feature::kValueHistory);
    history_block(won_per_step, raw.data() + feature::kWinCostHistory);
  }

  std::size_t total = 0;
  for (const auto& v : values_per_step) total += v.size();
  const std::size_t n = values_per_step.size();
  raw[feature::kVolumeTotal] = static_cast<double>(total);
  raw[feature::kVolumeLast1] = n >= 1 ? static_cast<double>(values_per_step[n - 1].size()) : 0.0;
  double last3 = 0.0;
  for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i)
    last3 += static_cast<double>(values_per_step[i].size());
  raw[feature::kVolumeLast3] = last3;

  f.scale = won_count > 0 ? won_sum / static_cast<double>(won_count) : 1.0;
  if (!(f.scale > 0.0)) f.scale = 1.0;

  FeatureVector& out = f.normalized;
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    if (is_money_entry(i)) {
      out[i] = raw[i] / f.scale;
    } else if (is_count_entry(i)) {
      out[i] = raw[i] / options.count_scale;
    } else {
      out[i] = raw[i];
    }
  }
  out[feature::kDayOfWeek] = raw[feature::kDayOfWeek] / 7.0;
  out[feature::kStepsLeft] = raw[feature::kStepsLeft] / static_cast<double>(calendar.num_steps);
  out[feature::kAdvertiserId] =
      raw[feature::kAdvertiserId] / static_cast<double>(std::max<std::size_t>(1, advertiser.num_advertisers));
  out[feature::kCategory] =
      raw[feature::kCategory] / static_cast<double>(std::max<std::size_t>(1, advertiser.num_categories));
  return f;
}

void HindsightDataset::append(const HindsightDataset& other) {
  if (tuples.empty()) samples_per_step = other.samples_per_step;
  if (other.samples_per_step != samples_per_step)
    throw std::invalid_argument("HindsightDataset::append: mismatched samples_per_step");
  tuples.insert(tuples.end(), other.tuples.begin(), other.tuples.end());
}

void CollectConfig::validate() const {
  if (samples_per_step < 1) throw std::invalid_argument("collect: L must be >= 1");
  if (!(beta_lo >= 0.0) || !(beta_hi > 0.0) || beta_lo > beta_hi)
    throw std::invalid_argument("collect: beta range must satisfy 0 <= lo <= hi, hi > 0");
  if (sampling == BetaSampling::kLogUniform && !(beta_lo > 0.0))
    throw std::invalid_argument("collect: log-uniform sampling needs lo > 0");
}

std::pair<double, double> default_beta_range(const ImpressionStream& stream) {
  return {0.0, 2.0 * full_spend_beta(stream)};
}

HindsightDataset collect(const ImpressionStream& stream, const TrajectoryContext& context,
                         const CollectConfig& config) {
  config.validate();
  const std::size_t T = stream.num_steps();
  const std::size_t L = config.samples_per_step;

  // Recorded history of the behavior bidder, then one feature vector per step.
  std::vector<StepObservation> history;
  history.reserve(T);
  std::vector<FeatureVector> features(T);
  std::vector<double> current;
  for (std::size_t t = 1; t <= T; ++t) {
    const auto bucket = stream.step(t);
    current.clear();
    for (const auto& imp : bucket) current.push_back(imp.value);
    const CalendarInfo cal{context.day_of_week, t, T};
    features[t - 1] =
        compute_features(history, current, cal, context.advertiser, config.features).normalized;

    StepObservation obs;
    run_step(bucket, context.behavior_beta, std::nullopt, &obs.won);
    obs.values = current;
    for (const auto& imp : bucket) obs.prices.push_back(imp.price);
    history.push_back(std::move(obs));
  }

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(context.traj_id)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = config.beta_lo;
  const double hi = config.beta_hi;
  auto draw = [&]() {
    const double u = unit(rng);
    if (lo == hi) return lo;
    if (config.sampling == BetaSampling::kLogUniform)
      return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
    return lo + u * (hi - lo);
  };

  HindsightDataset ds;
  ds.samples_per_step = L;
  ds.tuples.resize(T * L);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t tau = 1; tau <= T; ++tau) {
      const double beta = draw();
      const FixedRollout r = run_fixed(stream, tau, beta);
      HindsightTuple& h = ds.tuples[(tau - 1) * L + l];
      h.traj_id = context.traj_id;
      h.step = tau;
      h.features = features[tau - 1];
      h.beta_hat = beta;
      h.realized_cost = r.cost;
      h.realized_value = r.value;
    }
  }
  return ds;
}

std::vector<SupervisedState> relabel_as_supervision(const HindsightDataset& dataset) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const HindsightTuple*>> groups;
  for (const auto& t : dataset.tuples) groups[{t.traj_id, t.step}].push_back(&t);

  std::vector<SupervisedState> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](const HindsightTuple* a, const HindsightTuple* b) {
      if (a->realized_cost != b->realized_cost) return a->realized_cost < b->realized_cost;
      return a->beta_hat < b->beta_hat;
    });
    SupervisedState s;
    s.traj_id = key.first;
    s.step = key.second;
    s.features = members.front()->features;
    for (const HindsightTuple* m : members) {
      if (!s.anchors.empty() && s.anchors.back().budget == m->realized_cost) continue;
      s.anchors.push_back({m->realized_cost, m->beta_hat, m->realized_value});
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace autobid
