#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "autobid/auction.hpp"
#include "autobid/oracle.hpp"

namespace autobid {

/// Planned fraction of the budget spent before `step` starts.
using PacingPlan = std::function<double(std::size_t step, std::size_t num_steps)>;

/// Even spend: (step - 1) / T.
double uniform_pacing(std::size_t step, std::size_t num_steps);

enum class PidMode {
  kSpendPacing,  // error = planned spend fraction - actual spend fraction
  kRoiError      // error = (realized ROI - target) / target, 0 until something is bought
};

/// beta = beta0 * exp(kp * e + ki * sum(e) + kd * (e - e_prev)), clamped.
struct PidConfig {
  double kp = 2.0;
  double ki = 0.3;
  double kd = 0.0;
  PidMode mode = PidMode::kSpendPacing;
  double beta0 = 1.0;
  double beta_min = 0.0;
  double beta_max = 1e6;

  void validate() const;
};

/// Integrator memory of one campaign.
struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;
};

double pid_error(const EpisodeState& state, std::optional<double> roi_target, const PidConfig& config,
                 const PacingPlan& plan = uniform_pacing);

/// Advances the integrator by one step and returns the coefficient.
double pid_decide(const EpisodeState& state, std::optional<double> roi_target, PidState& pid,
                  const PidConfig& config, const PacingPlan& plan = uniform_pacing);

struct LpReplanConfig {
  double prior_beta = 1.0;  // used before anything has been observed
  GreedyMode mode = GreedyMode::kStopAtFirstViolation;
};

/// Treats the (value, price) pairs seen so far as a sample of what is left,
/// scales the remaining budget to the observed horizon and returns the
/// greedy threshold for that instance (ROI constraint included when given).
double lp_replan_decide(const EpisodeState& state, std::span<const StepObservation> history,
                        std::optional<double> roi_target, const LpReplanConfig& config = {});

/// Fresh run_campaign callbacks; each call owns its own campaign state.
DecideFn make_pid_policy(const PidConfig& config, PacingPlan plan = uniform_pacing);
DecideFn make_lp_replan_policy(const LpReplanConfig& config);
DecideFn make_fixed_policy(double beta);

}  // namespace autobid
