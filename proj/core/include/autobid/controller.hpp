#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "autobid/auction.hpp"
#include "autobid/hindsight.hpp"
#include "autobid/training.hpp"

namespace autobid {

struct ControllerConfig {
  std::optional<double> lambda;         // step scale; default 0.05 * budget unit of the state
  std::size_t max_iters = 50;           // K
  double c_floor = 1e-9;                // lower clamp for the spend target
  std::optional<double> roi_tolerance;  // default 1e-6 * (C_h + B_tau)
  double target_margin = 0.0;           // plan against r * (1 + margin)
  std::size_t scan_points = 64;         // slack check grid over [c_floor, B_tau]

  void validate() const;
};

enum class DecisionCase { kBcbPassthrough, kRoiCorrected, kRoiInfeasible };

const char* to_string(DecisionCase c);

struct Decision {
  double beta_opt = 0.0;
  DecisionCase decision_case = DecisionCase::kBcbPassthrough;
  double alpha = 1.0;  // beta_opt / f_theta(B_tau)
  std::size_t iterations_used = 0;
  double c_target_final = 0.0;
  double delta_roi = 0.0;  // slack at c_target_final (0 in budget-only mode)
};

class ControllerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ROI slack for spending `c_target` from now on:
/// V_h + f_phi(c_target) - r (C_h + c_target).
double roi_slack(const BudgetCurves& curves, const EpisodeState& state, double r_target,
                 double c_target);

/// B_tau is first capped at curves.max_budget. Budget-only mode returns
/// f_theta(B_tau). With an ROI target the spend target starts at B_tau and,
/// while the slack is negative, moves along g = f_phi'(C) - r with step
/// lambda * g, clamped to [c_floor, B_tau]. The step doubles while the slack
/// stays negative and is halved after any overshoot past the tolerance band
/// and after any step that lowers the slack or passes its maximum.
///
/// When f_phi is not concave the iteration can stall or step over feasible
/// targets, so the slack is also checked on `scan_points` grid points between
/// the iteration's answer and B_tau; the largest feasible one wins and its
/// boundary is bisected. Without any feasible target the largest slack found
/// is used. The returned coefficient is never above f_theta(B_tau).
Decision decide_on_curves(const BudgetCurves& curves, const EpisodeState& state,
                          std::optional<double> r_target, const ControllerConfig& config = {});

Decision decide(const EpisodeState& state, std::span<const double> features,
                const Checkpoint& checkpoint, std::optional<double> r_target,
                const ControllerConfig& config = {});

/// Bidding callback for run_campaign driven by a trained checkpoint.
DecideFn make_controller_policy(std::shared_ptr<const Checkpoint> checkpoint, int day_of_week,
                                const AdvertiserInfo& advertiser,
                                const ControllerConfig& config = {});

struct AlphaRow {
  std::size_t step = 0;
  double alpha = 1.0;
  double delta_roi = 0.0;
};

struct AlphaTrace {
  std::vector<AlphaRow> rows;
  double roi_ratio = 0.0;  // realized ROI / target; 0 without a target
};

AlphaTrace alpha_trace(const CampaignResult& campaign, std::optional<double> r_target);

}  // namespace autobid
