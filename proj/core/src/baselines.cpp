#include "autobid/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace autobid {

double uniform_pacing(std::size_t step, std::size_t num_steps) {
  if (num_steps == 0) return 0.0;
  return static_cast<double>(step - 1) / static_cast<double>(num_steps);
}

void PidConfig::validate() const {
  if (!(beta0 >= 0.0)) throw std::invalid_argument("PidConfig: beta0 must be >= 0");
  if (!(beta_min >= 0.0) || !(beta_max >= beta_min))
    throw std::invalid_argument("PidConfig: need 0 <= beta_min <= beta_max");
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw std::invalid_argument("PidConfig: gains must be finite");
}

double pid_error(const EpisodeState& state, std::optional<double> roi_target, const PidConfig& config,
                 const PacingPlan& plan) {
  switch (config.mode) {
    case PidMode::kSpendPacing: {
      if (!(state.initial_budget > 0.0)) return 0.0;
      return plan(state.step, state.num_steps) - state.hist_cost / state.initial_budget;
    }
    case PidMode::kRoiError: {
      if (!roi_target || !(*roi_target > 0.0) || !(state.hist_cost > 0.0)) return 0.0;
      return (state.hist_value / state.hist_cost - *roi_target) / *roi_target;
    }
  }
  return 0.0;
}

double pid_decide(const EpisodeState& state, std::optional<double> roi_target, PidState& pid,
                  const PidConfig& config, const PacingPlan& plan) {
  const double e = pid_error(state, roi_target, config, plan);
  pid.integral += e;
  const double de = pid.has_prev ? e - pid.prev_error : 0.0;
  pid.prev_error = e;
  pid.has_prev = true;
  const double u = config.kp * e + config.ki * pid.integral + config.kd * de;
  return std::clamp(config.beta0 * std::exp(u), config.beta_min, config.beta_max);
}

double lp_replan_decide(const EpisodeState& state, std::span<const StepObservation> history,
                        std::optional<double> roi_target, const LpReplanConfig& config) {
  if (!(state.remaining_budget > 0.0)) return 0.0;
  SelectionInstance inst;
  for (const auto& obs : history) {
    for (std::size_t i = 0; i < obs.values.size(); ++i)
      if (obs.values[i] > 0.0) inst.items.push_back({obs.values[i], obs.prices[i]});
  }
  if (inst.items.empty()) return config.prior_beta;
  const std::size_t remaining_steps = state.num_steps - state.step + 1;
  inst.budget = state.remaining_budget * static_cast<double>(history.size()) /
                static_cast<double>(remaining_steps);
  inst.roi_target = roi_target;
  const SelectionResult r = greedy_fcs(inst, config.mode);
  return r.beta_star.value_or(0.0);
}

DecideFn make_pid_policy(const PidConfig& config, PacingPlan plan) {
  config.validate();
  auto pid = std::make_shared<PidState>();
  return [config, plan = std::move(plan), pid](const DecisionContext& ctx) -> Bid {
    return pid_decide(ctx.state, ctx.constraints.roi_target, *pid, config, plan);
  };
}

DecideFn make_lp_replan_policy(const LpReplanConfig& config) {
  return [config](const DecisionContext& ctx) -> Bid {
    return lp_replan_decide(ctx.state, ctx.history, ctx.constraints.roi_target, config);
  };
}

DecideFn make_fixed_policy(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("make_fixed_policy: beta must be >= 0");
  return [beta](const DecisionContext&) -> Bid { return beta; };
}

}  // namespace autobid
