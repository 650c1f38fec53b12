#include "autobid/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace autobid {

void ControllerConfig::validate() const {
  if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("ControllerConfig: lambda must be > 0");
  if (max_iters == 0) throw std::invalid_argument("ControllerConfig: max_iters must be >= 1");
  if (scan_points == 0) throw std::invalid_argument("ControllerConfig: scan_points must be >= 1");
  if (!(c_floor > 0.0)) throw std::invalid_argument("ControllerConfig: c_floor must be > 0");
  if (roi_tolerance && !(*roi_tolerance >= 0.0))
    throw std::invalid_argument("ControllerConfig: roi_tolerance must be >= 0");
  if (!(target_margin >= 0.0)) throw std::invalid_argument("ControllerConfig: target_margin must be >= 0");
}

const char* to_string(DecisionCase c) {
  switch (c) {
    case DecisionCase::kBcbPassthrough: return "bcb_passthrough";
    case DecisionCase::kRoiCorrected: return "roi_corrected";
    case DecisionCase::kRoiInfeasible: return "roi_infeasible";
  }
  return "unknown";
}

double roi_slack(const BudgetCurves& curves, const EpisodeState& state, double r_target,
                 double c_target) {
  return state.hist_value + curves.value_at(c_target) - r_target * (state.hist_cost + c_target);
}

namespace {

[[noreturn]] void fail(const EpisodeState& s, const char* what, double c) {
  std::ostringstream msg;
  msg << "controller: non-finite " << what << " at C_target=" << c << " (step " << s.step << "/"
      << s.num_steps << ", remaining " << s.remaining_budget << ", hist cost " << s.hist_cost
      << ", hist value " << s.hist_value << ")";
  throw ControllerError(msg.str());
}

double checked(double v, const EpisodeState& s, const char* what, double c) {
  if (!std::isfinite(v)) fail(s, what, c);
  return v;
}

}  // namespace

Decision decide_on_curves(const BudgetCurves& curves, const EpisodeState& state,
                          std::optional<double> r_target, const ControllerConfig& config) {
  config.validate();
  // Plan within the budgets seen in training; past them the curves follow a
  // slope nothing was fitted to.
  const double b = std::clamp(state.remaining_budget, 0.0, curves.max_budget);
  const double beta_b = checked(curves.beta_at(b), state, "coefficient", b);
  const double beta_pass = std::max(beta_b, 0.0);

  Decision d;
  d.beta_opt = beta_pass;
  d.c_target_final = b;
  if (!r_target) return d;

  const double r = *r_target * (1.0 + config.target_margin);
  const double tol = config.roi_tolerance.value_or(1e-6 * (state.hist_cost + b));
  auto slack = [&](double c) { return checked(roi_slack(curves, state, r, c), state, "value", c); };

  double delta = slack(b);
  d.delta_roi = delta;
  if (delta >= -tol) return d;

  const double lo = std::min(config.c_floor, b);
  double lambda = config.lambda.value_or(0.05 * curves.budget_unit);
  double c = b;
  bool overshot = false;
  std::size_t it = 0;
  // Feasible points rejected as overshoot; a fallback if the scan finds none.
  double best_c = b;
  double best_delta = delta;
  while (it < config.max_iters) {
    ++it;
    const double g = checked(curves.value_slope_at(c), state, "value slope", c) - r;
    const double next = std::clamp(c + lambda * g, lo, b);
    const double next_delta = slack(next);
    if (next_delta >= -tol && next_delta > best_delta) {
      best_c = next;
      best_delta = next_delta;
    }
    // Overshoot past the band, or a step past the slack maximum.
    const bool crossed =
        next != c && (checked(curves.value_slope_at(next), state, "value slope", next) - r) * g < 0.0;
    if (next_delta > tol || next_delta < delta || crossed) {
      lambda *= 0.5;
      overshot = true;
      continue;
    }
    if (next == c) break;
    c = next;
    delta = next_delta;
    if (delta >= -tol) break;
    if (!overshot) lambda *= 2.0;
  }

  // Safeguard for non-concave f_phi: the iteration can stall on a bump or
  // step over a feasible stretch. Scan [lo, b] from the right down to the
  // iteration's answer; a feasible grid point found first has the right edge
  // of its stretch bisected.
  const std::size_t n = config.scan_points;
  auto grid = [&](std::size_t k) {
    return k >= n ? b : lo + (b - lo) * static_cast<double>(k) / static_cast<double>(n);
  };
  std::optional<std::size_t> k_feasible;
  double feasible_delta = 0.0;
  std::size_t k_max = n;
  double grid_max = d.delta_roi;
  for (std::size_t k = n; k-- > 0;) {
    const double x = grid(k);
    if (delta >= -tol && x <= c) break;
    const double dx = slack(x);
    if (dx >= -tol) {
      k_feasible = k;
      feasible_delta = dx;
      break;
    }
    if (dx > grid_max) {
      k_max = k;
      grid_max = dx;
    }
  }

  if (k_feasible) {
    double feasible = grid(*k_feasible);
    double right = grid(*k_feasible + 1);
    for (std::size_t j = 0; j < config.max_iters && feasible_delta > tol; ++j) {
      const double mid = 0.5 * (feasible + right);
      const double dm = slack(mid);
      if (dm >= -tol) {
        feasible = mid;
        feasible_delta = dm;
      } else {
        right = mid;
      }
    }
    c = feasible;
    delta = feasible_delta;
  } else if (delta < -tol && best_delta >= -tol) {
    c = best_c;
    delta = best_delta;
  } else if (delta < -tol) {
    // Nothing feasible: golden-section search for the largest slack between
    // the neighbours of the best grid point.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = grid(k_max == 0 ? 0 : k_max - 1);
    double z = grid(std::min(k_max + 1, n));
    double x1 = z - phi * (z - a);
    double x2 = a + phi * (z - a);
    double f1 = slack(x1);
    double f2 = slack(x2);
    for (std::size_t j = 0; j < config.max_iters; ++j) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (z - a);
        f2 = slack(x2);
      } else {
        z = x2;
        x2 = x1;
        f2 = f1;
        x1 = z - phi * (z - a);
        f1 = slack(x1);
      }
    }
    c = grid(k_max);
    delta = grid_max;
    if (std::max(f1, f2) > delta) {
      c = f1 >= f2 ? x1 : x2;
      delta = std::max(f1, f2);
    }
  }

  const double beta_c = checked(curves.beta_at(c), state, "coefficient", c);
  d.beta_opt = std::max(0.0, std::min(beta_c, beta_b));
  d.decision_case = delta >= -tol ? DecisionCase::kRoiCorrected : DecisionCase::kRoiInfeasible;
  d.alpha = beta_pass > 0.0 ? d.beta_opt / beta_pass : 1.0;
  d.iterations_used = it;
  d.c_target_final = c;
  d.delta_roi = delta;
  return d;
}

Decision decide(const EpisodeState& state, std::span<const double> features,
                const Checkpoint& checkpoint, std::optional<double> r_target,
                const ControllerConfig& config) {
  return decide_on_curves(curves_for(checkpoint, features), state, r_target, config);
}

DecideFn make_controller_policy(std::shared_ptr<const Checkpoint> checkpoint, int day_of_week,
                                const AdvertiserInfo& advertiser, const ControllerConfig& config) {
  if (!checkpoint) throw std::invalid_argument("make_controller_policy: missing checkpoint");
  config.validate();
  return [checkpoint, day_of_week, advertiser, config](const DecisionContext& ctx) -> Bid {
    const CalendarInfo cal{day_of_week, ctx.state.step, ctx.state.num_steps};
    const StateFeatures f =
        compute_features(ctx.history, ctx.current_values, cal, advertiser, checkpoint->features);
    const Decision d =
        decide(ctx.state, f.normalized, *checkpoint, ctx.constraints.roi_target, config);
    return {d.beta_opt, d.alpha, d.delta_roi};
  };
}

AlphaTrace alpha_trace(const CampaignResult& campaign, std::optional<double> r_target) {
  AlphaTrace t;
  for (const auto& rec : campaign.log)
    t.rows.push_back({rec.step, rec.bid.alpha.value_or(1.0), rec.bid.delta_roi.value_or(0.0)});
  if (r_target && *r_target > 0.0) t.roi_ratio = campaign.realized_roi() / *r_target;
  return t;
}

}  // namespace autobid
