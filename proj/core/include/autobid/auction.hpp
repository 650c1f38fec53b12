#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace autobid {

/// One auction opportunity. `value` is the advertiser's private value
/// (pValue); `price` is the highest competing bid, which is also what the
/// winner pays under second-price rules.
struct Impression {
  double value = 0.0;
  double price = 0.0;
};

/// Coefficient at which an impression starts to win: beta >= price / value.
inline double breakpoint(const Impression& imp) { return imp.price / imp.value; }

/// Impressions grouped into T ordered decision steps. Buckets may be empty.
class ImpressionStream {
 public:
  ImpressionStream() = default;
  explicit ImpressionStream(std::vector<std::vector<Impression>> steps);

  std::size_t num_steps() const { return steps_.size(); }
  std::size_t num_impressions() const;

  /// 1-based step access, matching the step numbering in logs and files.
  std::span<const Impression> step(std::size_t t) const;
  const std::vector<std::vector<Impression>>& buckets() const { return steps_; }

 private:
  std::vector<std::vector<Impression>> steps_;
};

struct ConstraintConfig {
  double budget = 0.0;
  std::optional<double> roi_target;  // absent => budget-only bidding

  bool has_roi() const { return roi_target.has_value(); }
  void validate() const;
};

struct EpisodeState {
  std::size_t step = 1;           // tau, 1-based
  std::size_t num_steps = 1;      // T
  double initial_budget = 0.0;
  double remaining_budget = 0.0;  // B_tau
  double hist_cost = 0.0;         // C_1^{tau-1}
  double hist_value = 0.0;        // V_1^{tau-1}
};

struct StepOutcome {
  double cost = 0.0;
  double value = 0.0;
  std::size_t wins = 0;
};

/// Runs one step of second-price auctions with bids beta * value.
///
/// An impression is won iff beta >= price / value and, when a cap is given,
/// its price does not exceed the cap left at its turn. Buckets are walked in
/// stored order; a skipped impression does not stop later cheaper ones from
/// winning. When `won_mask` is non-null it is resized to the bucket and
/// records which impressions were won.
StepOutcome run_step(std::span<const Impression> bucket, double beta,
                     std::optional<double> budget_cap = std::nullopt,
                     std::vector<bool>* won_mask = nullptr);

struct FixedRollout {
  double cost = 0.0;
  double value = 0.0;
};

/// Fixed-coefficient rollout over steps [from_step, T], threading the cap
/// across steps.
FixedRollout run_fixed(const ImpressionStream& stream, std::size_t from_step, double beta,
                       std::optional<double> budget_cap = std::nullopt);

/// What the bidder gets to see about a finished step: the pValues of every
/// opportunity, the competing prices revealed after the auction, and which
/// ones it won.
struct StepObservation {
  std::vector<double> values;
  std::vector<double> prices;
  std::vector<bool> won;

  std::vector<double> won_prices() const;
};

/// Read-only view handed to a bidding policy before each step.
struct DecisionContext {
  const EpisodeState& state;
  std::span<const StepObservation> history;  // steps 1..tau-1
  std::span<const double> current_values;    // pValues of the upcoming step
  const ConstraintConfig& constraints;
};

/// A policy's answer for one step. Implicitly constructible from a plain
/// coefficient; the annotations are only filled by policies that have them.
struct Bid {
  Bid(double b = 0.0) : beta(b) {}  // NOLINT(google-explicit-constructor)
  Bid(double b, std::optional<double> a, std::optional<double> d)
      : beta(b), alpha(a), delta_roi(d) {}

  double beta;
  std::optional<double> alpha;
  std::optional<double> delta_roi;
};

using DecideFn = std::function<Bid(const DecisionContext&)>;

struct StepRecord {
  std::size_t step = 0;
  Bid bid;
  StepOutcome outcome;
  double remaining_budget = 0.0;  // after the step
};

struct CampaignResult {
  EpisodeState final_state;
  std::vector<StepRecord> log;
  std::vector<StepObservation> observations;

  double total_cost() const { return final_state.hist_cost; }
  double total_value() const { return final_state.hist_value; }
  /// Realized value / cost; zero when nothing was bought.
  double realized_roi() const;
};

class CampaignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plays a full episode. The remaining budget is a hard cap inside every
/// step. Exceptions from `decide`, and negative or non-finite coefficients,
/// abort the episode with a CampaignError naming the step.
CampaignResult run_campaign(const ImpressionStream& stream, const ConstraintConfig& config,
                            const DecideFn& decide);

}  // namespace autobid
