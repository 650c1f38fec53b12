#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "autobid/auction.hpp"

namespace autobid {

struct SelectionItem {
  double value = 0.0;
  double cost = 0.0;
};

/// Offline selection problem: pick a subset maximizing total value subject to
/// sum(cost) <= budget and, when present, sum(value - roi_target * cost) >= 0.
struct SelectionInstance {
  std::vector<SelectionItem> items;
  double budget = 0.0;
  std::optional<double> roi_target;

  void validate() const;
};

struct SelectionResult {
  double total_value = 0.0;
  double total_cost = 0.0;
  std::vector<bool> chosen;
  std::optional<double> beta_star;  // greedy threshold c_k / v_k
};

class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultExactItemLimit = 25;

/// Exact optimum by depth-first branch-and-bound. Nodes are bounded with the
/// fractional relaxation of the free items; the include/exclude order makes
/// the first optimum found the lexicographically smallest selection vector.
SelectionResult milp_oracle(const SelectionInstance& instance,
                            std::size_t item_limit = kDefaultExactItemLimit);

enum class GreedyMode {
  kSkipAndContinue,      // skip an item that breaks a constraint, keep scanning
  kStopAtFirstViolation  // the efficiency prefix ends at the first violation
};

/// Fixed-coefficient greedy: scan by efficiency value/cost descending (ties:
/// lower cost, then lower index) and take what fits.
SelectionResult greedy_fcs(const SelectionInstance& instance,
                           GreedyMode mode = GreedyMode::kSkipAndContinue);

/// Optimum of the LP relaxation with 0 <= y_i <= 1: the efficiency-sorted
/// prefix plus the largest feasible fraction of the next item.
double fractional_relaxation(const SelectionInstance& instance);

/// Efficiency-descending order used by greedy_fcs and the relaxation.
std::vector<std::size_t> efficiency_order(std::span<const SelectionItem> items);

struct ExhaustResult {
  double beta = 0.0;
  double cost = 0.0;   // uncapped cost realized at beta
  double value = 0.0;  // uncapped value realized at beta
  bool no_spend = false;
};

/// Smallest coefficient whose uncapped cost is the largest attainable cost not
/// above `budget`. Searches the finite breakpoint set {c_i / v_i}; costs are
/// evaluated with run_fixed so results replay bit-exactly.
ExhaustResult exhaust_beta(const ImpressionStream& stream, std::size_t from_step, double budget);

/// Same search on an offline instance treated as a single bucket in item order.
ExhaustResult exhaust_beta(const SelectionInstance& instance, double budget);

/// The breakpoint at which every impression of the tail wins.
double full_spend_beta(const ImpressionStream& stream, std::size_t from_step = 1);

}  // namespace autobid
