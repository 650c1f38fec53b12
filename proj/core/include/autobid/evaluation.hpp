#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autobid/baselines.hpp"
#include "autobid/controller.hpp"
#include "autobid/generator.hpp"
#include "autobid/hindsight.hpp"

namespace autobid {

/// Builds a fresh callback for one episode.
using PolicyFactory = std::function<DecideFn(const Episode&)>;

struct NamedPolicy {
  std::string name;
  PolicyFactory make;
};

NamedPolicy learned_policy(std::shared_ptr<const Checkpoint> checkpoint,
                           const ControllerConfig& config = {}, std::string name = "bspline");
NamedPolicy pid_policy(const PidConfig& config, std::string name = "pid");
NamedPolicy lp_replan_policy(const LpReplanConfig& config, std::string name = "lp_replan");
NamedPolicy fixed_policy(double beta, std::string name = "fixed");

/// Median over `episodes` of the coefficient that spends the advertiser's
/// base budget in hindsight; a neutral starting point for the baselines.
double median_exhaust_beta(const SyntheticSuite& suite, std::span<const Episode* const> episodes);

struct EvalGrid {
  std::vector<double> budget_scales{0.5, 0.75, 1.0, 1.25, 1.5};
  std::vector<double> roi_scales;  // empty: budget-only cells
};

struct EpisodeMetrics {
  std::string policy;
  double budget_scale = 1.0;
  std::optional<double> roi_scale;
  std::size_t day = 0;
  std::size_t advertiser = 0;
  double budget = 0.0;
  std::optional<double> roi_target;
  double cost = 0.0;
  double value = 0.0;
  bool compliant = true;  // value >= roi_target * cost
  double mean_beta = 0.0;  // over steps that started with budget left
  std::size_t corrected_steps = 0;  // steps with alpha < 1
  double max_alpha_corrected = 0.0;  // largest alpha among corrected steps
  std::vector<AlphaRow> trace;  // only with EvalOptions::keep_traces
};

struct MetricsReport {
  std::string policy;
  double budget_scale = 1.0;
  std::optional<double> roi_scale;
  double conv = 0.0;  // mean value, violating episodes counted as 0
  double compliance_rate = 1.0;
  double cost_over_budget = 0.0;  // mean cost / budget
  double mean_beta = 0.0;
  std::vector<EpisodeMetrics> episodes;
};

struct EvalOptions {
  std::size_t threads = 1;
  bool keep_traces = false;
};

/// One report per (policy, budget scale, ROI scale), policy-major. Episode
/// budgets are budget_scale * base budget of the advertiser and ROI targets
/// roi_scale * its reference ROI.
std::vector<MetricsReport> evaluate(std::span<const NamedPolicy> policies, const SyntheticSuite& suite,
                                    std::span<const Episode* const> episodes, const EvalGrid& grid,
                                    const EvalOptions& options = {});

/// How hindsight data is gathered from a suite: per trajectory the
/// coefficient range spans the given percentiles of its breakpoints.
struct CollectPlan {
  std::size_t samples_per_step = 10;
  double lo_percentile = 2.0;
  double hi_percentile = 98.0;
  BetaSampling sampling = BetaSampling::kLogUniform;
  std::uint64_t seed = 11;
  FeatureOptions features;
  std::vector<double> behavior_scales{0.5, 1.0, 1.5};  // one trajectory per scale of the base budget
};

/// Collects every episode in `episodes`, once per behavior scale. The
/// behavior bidder spends scale * base budget with the exhaust coefficient;
/// trajectory ids are episode_index * behavior_scales.size() + k.
HindsightDataset collect_suite(const SyntheticSuite& suite, std::span<const Episode* const> episodes,
                               const CollectPlan& plan);

struct SurfaceCell {
  double budget_scale = 0.0;
  double roi_scale = 0.0;
  double mean_beta = 0.0;
  double compliance_rate = 0.0;
  double conv = 0.0;
};

/// Budget x ROI cells of one policy, budget-major.
std::vector<SurfaceCell> surface(std::span<const MetricsReport> reports, const std::string& policy);

std::string report_markdown(std::span<const MetricsReport> reports);
void write_summary_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path);
void write_episodes_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path);
void write_surface_csv(std::span<const SurfaceCell> cells, const std::filesystem::path& path);
/// policy,budget_scale,roi_scale,day,advertiser,step,alpha,delta_roi
void write_alpha_trace_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path);

/// Writes report.md, summary.csv, episodes.csv, alpha_trace.csv and one
/// surface_<policy>.csv per policy with ROI cells into `dir`.
void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& dir);

}  // namespace autobid
