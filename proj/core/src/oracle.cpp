#include "autobid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace autobid {

namespace {

constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

// Largest additional value the LP relaxation can collect from `free_items`
// (already efficiency-sorted) given the budget left and the ROI slack of the
// fixed part. Returns kInfeasible when no fractional completion restores a
// nonnegative slack.
//
// Optimal LP solutions are efficiency thresholds, so the search is over the
// amount t taken along the sorted order: budget(t) increases, slack(t) first
// rises (items with v/c >= r) and then falls, and the answer is the largest
// feasible t.
double relaxation_tail(std::span<const SelectionItem> items, std::span<const std::size_t> order,
                       std::size_t first_free, double budget_left, double slack,
                       std::optional<double> roi) {
  double value = 0.0;
  for (const std::size_t idx : order) {
    if (idx < first_free) continue;
    const SelectionItem& it = items[idx];
    if (budget_left <= 0.0) break;
    double frac = std::min(1.0, budget_left / it.cost);
    if (roi) {
      const double d = it.value - *roi * it.cost;
      if (d < 0.0 && slack < 0.0) return kInfeasible;
      if (d < 0.0 && slack / -d < frac) {
        // the ROI constraint binds; slack + frac * d would round off zero
        frac = slack / -d;
        slack = 0.0;
      } else {
        slack += frac * d;
      }
    }
    value += frac * it.value;
    budget_left -= frac * it.cost;
    if (frac < 1.0) break;
  }
  if (roi && slack < 0.0) return kInfeasible;
  return value;
}

struct BranchAndBound {
  std::span<const SelectionItem> items;
  std::vector<std::size_t> order;
  double budget;
  std::optional<double> roi;

  std::vector<bool> current;
  std::vector<bool> best;
  double best_value = 0.0;

  void search(std::size_t depth, double cost, double value, double slack) {
    if (depth == items.size()) {
      if (roi && slack < 0.0) return;
      if (value > best_value) {
        best_value = value;
        best = current;
      }
      return;
    }
    const double tail = relaxation_tail(items, order, depth, budget - cost, slack, roi);
    if (tail == kInfeasible) return;
    const double tol = 1e-9 * (1.0 + std::abs(best_value));
    if (value + tail <= best_value - tol) return;

    // 0-branch first: depth-first visits selection vectors in lexicographic order.
    current[depth] = false;
    search(depth + 1, cost, value, slack);

    const SelectionItem& it = items[depth];
    if (cost + it.cost <= budget) {
      current[depth] = true;
      const double d = roi ? it.value - *roi * it.cost : 0.0;
      search(depth + 1, cost + it.cost, value + it.value, slack + d);
      current[depth] = false;
    }
  }
};

SelectionResult summarize(const SelectionInstance& instance, std::vector<bool> chosen) {
  SelectionResult r;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (!chosen[i]) continue;
    r.total_value += instance.items[i].value;
    r.total_cost += instance.items[i].cost;
  }
  r.chosen = std::move(chosen);
  return r;
}

template <typename CostAt>
ExhaustResult search_breakpoints(std::vector<double> bps, double budget, CostAt cost_at) {
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  ExhaustResult out;
  if (bps.empty()) {
    out.no_spend = true;
    return out;
  }
  if (cost_at(bps.front()).cost > budget) {
    out.no_spend = true;
    return out;
  }
  // Invariant: cost(bps[lo]) <= budget; cost(bps[hi]) > budget or hi == size.
  std::size_t lo = 0;
  std::size_t hi = bps.size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cost_at(bps[mid]).cost <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const auto at = cost_at(bps[lo]);
  out.beta = bps[lo];
  out.cost = at.cost;
  out.value = at.value;
  return out;
}

}  // namespace

void SelectionInstance::validate() const {
  if (!(budget >= 0.0)) throw std::invalid_argument("SelectionInstance: budget must be >= 0");
  if (roi_target && !(*roi_target >= 0.0))
    throw std::invalid_argument("SelectionInstance: roi_target must be >= 0");
  for (const auto& it : items) {
    if (!(it.value > 0.0) || !(it.cost > 0.0))
      throw std::invalid_argument("SelectionInstance: item values and costs must be positive");
  }
}

std::vector<std::size_t> efficiency_order(std::span<const SelectionItem> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ea = items[a].value / items[a].cost;
    const double eb = items[b].value / items[b].cost;
    if (ea != eb) return ea > eb;
    if (items[a].cost != items[b].cost) return items[a].cost < items[b].cost;
    return a < b;
  });
  return order;
}

SelectionResult milp_oracle(const SelectionInstance& instance, std::size_t item_limit) {
  instance.validate();
  const std::size_t n = instance.items.size();
  if (n > item_limit) {
    throw SizeLimitError("milp_oracle: " + std::to_string(n) + " items exceeds the exact limit of " +
                         std::to_string(item_limit) + "; subsample first");
  }
  BranchAndBound bb{instance.items, efficiency_order(instance.items), instance.budget,
                    instance.roi_target, std::vector<bool>(n, false), std::vector<bool>(n, false)};
  bb.search(0, 0.0, 0.0, 0.0);
  return summarize(instance, std::move(bb.best));
}

SelectionResult greedy_fcs(const SelectionInstance& instance, GreedyMode mode) {
  instance.validate();
  const auto order = efficiency_order(instance.items);
  std::vector<bool> chosen(instance.items.size(), false);
  double cost = 0.0;
  double slack = 0.0;
  std::optional<double> beta_star;
  for (const std::size_t idx : order) {
    const SelectionItem& it = instance.items[idx];
    const double d = instance.roi_target ? it.value - *instance.roi_target * it.cost : 0.0;
    const bool fits = cost + it.cost <= instance.budget;
    const bool roi_ok = !instance.roi_target || slack + d >= 0.0;
    if (!(fits && roi_ok)) {
      if (mode == GreedyMode::kStopAtFirstViolation) break;
      continue;
    }
    chosen[idx] = true;
    cost += it.cost;
    slack += d;
    beta_star = it.cost / it.value;
  }
  SelectionResult r = summarize(instance, std::move(chosen));
  r.beta_star = beta_star;
  return r;
}

double fractional_relaxation(const SelectionInstance& instance) {
  instance.validate();
  const auto order = efficiency_order(instance.items);
  const double v = relaxation_tail(instance.items, order, 0, instance.budget, 0.0,
                                   instance.roi_target);
  return v == kInfeasible ? 0.0 : v;
}

ExhaustResult exhaust_beta(const ImpressionStream& stream, std::size_t from_step, double budget) {
  if (from_step < 1 || from_step > stream.num_steps())
    throw std::invalid_argument("exhaust_beta: from_step out of range");
  std::vector<double> bps;
  for (std::size_t t = from_step; t <= stream.num_steps(); ++t)
    for (const auto& imp : stream.step(t)) bps.push_back(breakpoint(imp));
  return search_breakpoints(std::move(bps), budget, [&](double beta) {
    return run_fixed(stream, from_step, beta);
  });
}

ExhaustResult exhaust_beta(const SelectionInstance& instance, double budget) {
  instance.validate();
  std::vector<Impression> bucket;
  bucket.reserve(instance.items.size());
  std::vector<double> bps;
  for (const auto& it : instance.items) {
    bucket.push_back({it.value, it.cost});
    bps.push_back(breakpoint(bucket.back()));
  }
  return search_breakpoints(std::move(bps), budget, [&](double beta) {
    const StepOutcome o = run_step(bucket, beta);
    return FixedRollout{o.cost, o.value};
  });
}

double full_spend_beta(const ImpressionStream& stream, std::size_t from_step) {
  double beta = 0.0;
  for (std::size_t t = from_step; t <= stream.num_steps(); ++t)
    for (const auto& imp : stream.step(t)) beta = std::max(beta, breakpoint(imp));
  return beta;
}

}  // namespace autobid
