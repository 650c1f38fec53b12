#include "autobid/auction.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace autobid {

ImpressionStream::ImpressionStream(std::vector<std::vector<Impression>> steps)
    : steps_(std::move(steps)) {
  if (steps_.empty()) throw std::invalid_argument("ImpressionStream: T must be >= 1");
  for (const auto& bucket : steps_) {
    for (const auto& imp : bucket) {
      if (!(imp.value > 0.0) || !(imp.price > 0.0) || !std::isfinite(imp.value) ||
          !std::isfinite(imp.price)) {
        throw std::invalid_argument("ImpressionStream: value and price must be positive");
      }
    }
  }
}

std::size_t ImpressionStream::num_impressions() const {
  std::size_t n = 0;
  for (const auto& bucket : steps_) n += bucket.size();
  return n;
}

std::span<const Impression> ImpressionStream::step(std::size_t t) const {
  if (t < 1 || t > steps_.size()) throw std::out_of_range("ImpressionStream::step: out of range");
  return steps_[t - 1];
}

void ConstraintConfig::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw std::invalid_argument("ConstraintConfig: budget must be positive");
  if (roi_target && !(*roi_target > 0.0))
    throw std::invalid_argument("ConstraintConfig: roi_target must be positive when present");
}

StepOutcome run_step(std::span<const Impression> bucket, double beta,
                     std::optional<double> budget_cap, std::vector<bool>* won_mask) {
  if (!(beta >= 0.0)) throw std::invalid_argument("run_step: beta must be nonnegative");
  if (won_mask) won_mask->assign(bucket.size(), false);

  StepOutcome out;
  double cap_left = budget_cap.value_or(0.0);
  for (std::size_t i = 0; i < bucket.size(); ++i) {
    const Impression& imp = bucket[i];
    if (beta < breakpoint(imp)) continue;
    if (budget_cap) {
      if (imp.price > cap_left) continue;
      cap_left -= imp.price;
    }
    out.cost += imp.price;
    out.value += imp.value;
    ++out.wins;
    if (won_mask) (*won_mask)[i] = true;
  }
  return out;
}

FixedRollout run_fixed(const ImpressionStream& stream, std::size_t from_step, double beta,
                       std::optional<double> budget_cap) {
  if (from_step < 1 || from_step > stream.num_steps())
    throw std::invalid_argument("run_fixed: from_step out of range");
  FixedRollout total;
  std::optional<double> cap = budget_cap;
  for (std::size_t t = from_step; t <= stream.num_steps(); ++t) {
    const StepOutcome o = run_step(stream.step(t), beta, cap);
    total.cost += o.cost;
    total.value += o.value;
    if (cap) *cap = std::max(0.0, *cap - o.cost);
  }
  return total;
}

std::vector<double> StepObservation::won_prices() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < prices.size(); ++i)
    if (won[i]) out.push_back(prices[i]);
  return out;
}

double CampaignResult::realized_roi() const {
  return final_state.hist_cost > 0.0 ? final_state.hist_value / final_state.hist_cost : 0.0;
}

CampaignResult run_campaign(const ImpressionStream& stream, const ConstraintConfig& config,
                            const DecideFn& decide) {
  config.validate();
  CampaignResult result;
  EpisodeState& state = result.final_state;
  state.num_steps = stream.num_steps();
  state.initial_budget = config.budget;
  state.remaining_budget = config.budget;
  result.log.reserve(stream.num_steps());
  result.observations.reserve(stream.num_steps());

  std::vector<double> current_values;
  for (std::size_t t = 1; t <= stream.num_steps(); ++t) {
    state.step = t;
    const auto bucket = stream.step(t);
    current_values.clear();
    for (const auto& imp : bucket) current_values.push_back(imp.value);

    const DecisionContext ctx{state, result.observations, current_values, config};
    Bid bid;
    try {
      bid = decide(ctx);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "run_campaign: policy failed at step " << t << " (remaining budget "
          << state.remaining_budget << "): " << e.what();
      throw CampaignError(msg.str());
    }
    if (!(bid.beta >= 0.0) || !std::isfinite(bid.beta)) {
      std::ostringstream msg;
      msg << "run_campaign: policy returned invalid coefficient " << bid.beta << " at step " << t;
      throw CampaignError(msg.str());
    }

    StepObservation obs;
    const StepOutcome outcome = run_step(bucket, bid.beta, state.remaining_budget, &obs.won);
    obs.values = current_values;
    obs.prices.reserve(bucket.size());
    for (const auto& imp : bucket) obs.prices.push_back(imp.price);

    state.hist_cost += outcome.cost;
    state.hist_value += outcome.value;
    state.remaining_budget = std::max(0.0, state.remaining_budget - outcome.cost);

    result.log.push_back(StepRecord{t, bid, outcome, state.remaining_budget});
    result.observations.push_back(std::move(obs));
  }
  state.step = stream.num_steps();
  return result;
}

}  // namespace autobid
