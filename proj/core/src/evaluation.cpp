#include "autobid/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "autobid/oracle.hpp"
#include "autobid/stats.hpp"

namespace autobid {

NamedPolicy learned_policy(std::shared_ptr<const Checkpoint> checkpoint, const ControllerConfig& config,
                           std::string name) {
  if (!checkpoint) throw std::invalid_argument("learned_policy: missing checkpoint");
  config.validate();
  return {std::move(name), [checkpoint, config](const Episode& e) {
            return make_controller_policy(checkpoint, e.day_of_week, e.advertiser, config);
          }};
}

NamedPolicy pid_policy(const PidConfig& config, std::string name) {
  config.validate();
  return {std::move(name), [config](const Episode&) { return make_pid_policy(config); }};
}

NamedPolicy lp_replan_policy(const LpReplanConfig& config, std::string name) {
  return {std::move(name), [config](const Episode&) { return make_lp_replan_policy(config); }};
}

NamedPolicy fixed_policy(double beta, std::string name) {
  make_fixed_policy(beta);  // validates
  return {std::move(name), [beta](const Episode&) { return make_fixed_policy(beta); }};
}

double median_exhaust_beta(const SyntheticSuite& suite, std::span<const Episode* const> episodes) {
  std::vector<double> betas;
  for (const Episode* e : episodes) {
    if (e->advertiser.id >= suite.base_budget.size()) continue;
    betas.push_back(exhaust_beta(e->stream, 1, suite.base_budget[e->advertiser.id]).beta);
  }
  if (betas.empty()) throw std::invalid_argument("median_exhaust_beta: no episodes with a base budget");
  return stats::percentile(betas, 50.0);
}

namespace {

struct Cell {
  std::size_t policy;
  double budget_scale;
  std::optional<double> roi_scale;
};

EpisodeMetrics run_episode(const NamedPolicy& policy, const SyntheticSuite& suite, const Episode& e,
                           const Cell& cell, bool keep_trace) {
  const std::size_t a = e.advertiser.id;
  if (a >= suite.base_budget.size())
    throw std::invalid_argument("evaluate: advertiser without a calibrated budget");
  EpisodeMetrics m;
  m.policy = policy.name;
  m.budget_scale = cell.budget_scale;
  m.roi_scale = cell.roi_scale;
  m.day = e.day;
  m.advertiser = a;
  m.budget = cell.budget_scale * suite.base_budget[a];
  if (cell.roi_scale) m.roi_target = *cell.roi_scale * suite.reference_roi[a];

  const ConstraintConfig constraints{m.budget, m.roi_target};
  const CampaignResult res = run_campaign(e.stream, constraints, policy.make(e));
  m.cost = res.total_cost();
  m.value = res.total_value();
  m.compliant = !m.roi_target || m.value >= *m.roi_target * m.cost;

  double beta_sum = 0.0;
  std::size_t active = 0;
  double before = m.budget;
  for (const auto& rec : res.log) {
    if (before > 0.0) {
      beta_sum += rec.bid.beta;
      ++active;
    }
    before = rec.remaining_budget;
    const double alpha = rec.bid.alpha.value_or(1.0);
    if (alpha < 1.0) {
      ++m.corrected_steps;
      m.max_alpha_corrected = std::max(m.max_alpha_corrected, alpha);
    }
  }
  m.mean_beta = active ? beta_sum / static_cast<double>(active) : 0.0;
  if (keep_trace) m.trace = alpha_trace(res, m.roi_target).rows;
  return m;
}

MetricsReport aggregate(const NamedPolicy& policy, const Cell& cell, std::vector<EpisodeMetrics> rows) {
  MetricsReport r;
  r.policy = policy.name;
  r.budget_scale = cell.budget_scale;
  r.roi_scale = cell.roi_scale;
  if (!rows.empty()) {
    double conv = 0.0, compliant = 0.0, cb = 0.0, beta = 0.0;
    for (const auto& m : rows) {
      if (m.compliant) {
        conv += m.value;
        compliant += 1.0;
      }
      cb += m.budget > 0.0 ? m.cost / m.budget : 0.0;
      beta += m.mean_beta;
    }
    const auto n = static_cast<double>(rows.size());
    r.conv = conv / n;
    r.compliance_rate = compliant / n;
    r.cost_over_budget = cb / n;
    r.mean_beta = beta / n;
  }
  r.episodes = std::move(rows);
  return r;
}

}  // namespace

std::vector<MetricsReport> evaluate(std::span<const NamedPolicy> policies, const SyntheticSuite& suite,
                                    std::span<const Episode* const> episodes, const EvalGrid& grid,
                                    const EvalOptions& options) {
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    if (!policies[p].make) throw std::invalid_argument("evaluate: policy '" + policies[p].name + "' has no factory");
    for (double b : grid.budget_scales) {
      if (grid.roi_scales.empty()) {
        cells.push_back({p, b, std::nullopt});
      } else {
        for (double r : grid.roi_scales) cells.push_back({p, b, r});
      }
    }
  }

  std::vector<MetricsReport> out(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const Cell& c = cells[i];
        std::vector<EpisodeMetrics> rows;
        rows.reserve(episodes.size());
        for (const Episode* e : episodes)
          rows.push_back(run_episode(policies[c.policy], suite, *e, c, options.keep_traces));
        out[i] = aggregate(policies[c.policy], c, std::move(rows));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(cells.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

HindsightDataset collect_suite(const SyntheticSuite& suite, std::span<const Episode* const> episodes,
                               const CollectPlan& plan) {
  HindsightDataset all;
  all.samples_per_step = plan.samples_per_step;
  for (const Episode* e : episodes) {
    std::vector<double> bps;
    for (const auto& bucket : e->stream.buckets())
      for (const auto& imp : bucket) bps.push_back(breakpoint(imp));
    if (bps.empty()) continue;
    CollectConfig cfg;
    cfg.samples_per_step = plan.samples_per_step;
    cfg.beta_lo = stats::percentile(bps, plan.lo_percentile);
    cfg.beta_hi = stats::percentile(bps, plan.hi_percentile);
    cfg.sampling = plan.sampling;
    cfg.seed = plan.seed;
    cfg.features = plan.features;

    const double budget = e->advertiser.id < suite.base_budget.size() ? suite.base_budget[e->advertiser.id] : 0.0;
    const auto index = static_cast<std::size_t>(e - suite.episodes.data());
    for (std::size_t k = 0; k < plan.behavior_scales.size(); ++k) {
      TrajectoryContext ctx;
      ctx.traj_id = index * plan.behavior_scales.size() + k;
      ctx.day_of_week = e->day_of_week;
      ctx.advertiser = e->advertiser;
      ctx.behavior_beta = exhaust_beta(e->stream, 1, plan.behavior_scales[k] * budget).beta;
      all.append(collect(e->stream, ctx, cfg));
    }
  }
  return all;
}

std::vector<SurfaceCell> surface(std::span<const MetricsReport> reports, const std::string& policy) {
  std::vector<SurfaceCell> cells;
  for (const auto& r : reports) {
    if (r.policy != policy || !r.roi_scale) continue;
    cells.push_back({r.budget_scale, *r.roi_scale, r.mean_beta, r.compliance_rate, r.conv});
  }
  std::stable_sort(cells.begin(), cells.end(), [](const SurfaceCell& a, const SurfaceCell& b) {
    return a.budget_scale != b.budget_scale ? a.budget_scale < b.budget_scale : a.roi_scale < b.roi_scale;
  });
  return cells;
}

namespace {

std::string roi_label(const std::optional<double>& r) {
  if (!r) return "-";
  std::ostringstream s;
  s << *r;
  return s.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(10);
  return out;
}

}  // namespace

std::string report_markdown(std::span<const MetricsReport> reports) {
  std::ostringstream md;
  md.setf(std::ios::fixed);
  md.precision(3);
  md << "| policy | budget | roi | Conv | C.R. | C/B | mean beta |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    md << "| " << r.policy << " | " << r.budget_scale << " | " << roi_label(r.roi_scale) << " | "
       << r.conv << " | " << r.compliance_rate << " | " << r.cost_over_budget << " | " << r.mean_beta
       << " |\n";
  }
  // Conv pivot, one row per (policy, roi scale), one column per budget scale.
  std::vector<double> budgets;
  for (const auto& r : reports)
    if (std::find(budgets.begin(), budgets.end(), r.budget_scale) == budgets.end())
      budgets.push_back(r.budget_scale);
  if (!budgets.empty()) {
    std::sort(budgets.begin(), budgets.end());
    md << "\nConv by budget scale\n\n| policy | roi |";
    for (double b : budgets) md << ' ' << b << " |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < budgets.size(); ++i) md << "---|";
    md << '\n';
    std::vector<std::pair<std::string, std::string>> rows;
    std::map<std::pair<std::string, std::string>, std::map<double, double>> conv;
    for (const auto& r : reports) {
      const auto key = std::make_pair(r.policy, roi_label(r.roi_scale));
      if (!conv.count(key)) rows.push_back(key);
      conv[key][r.budget_scale] = r.conv;
    }
    for (const auto& key : rows) {
      md << "| " << key.first << " | " << key.second << " |";
      for (double b : budgets) {
        const auto& m = conv[key];
        const auto it = m.find(b);
        if (it == m.end()) md << " - |";
        else md << ' ' << it->second << " |";
      }
      md << '\n';
    }
  }
  return md.str();
}

void write_summary_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "policy,budget_scale,roi_scale,conv,compliance_rate,cost_over_budget,mean_beta,episodes\n";
  for (const auto& r : reports) {
    out << r.policy << ',' << r.budget_scale << ',' << (r.roi_scale ? std::to_string(*r.roi_scale) : "")
        << ',' << r.conv << ',' << r.compliance_rate << ',' << r.cost_over_budget << ',' << r.mean_beta
        << ',' << r.episodes.size() << '\n';
  }
}

void write_episodes_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "policy,budget_scale,roi_scale,day,advertiser,budget,roi_target,cost,value,compliant,"
         "mean_beta,corrected_steps\n";
  for (const auto& r : reports) {
    for (const auto& m : r.episodes) {
      out << m.policy << ',' << m.budget_scale << ',' << (m.roi_scale ? std::to_string(*m.roi_scale) : "")
          << ',' << m.day << ',' << m.advertiser << ',' << m.budget << ','
          << (m.roi_target ? std::to_string(*m.roi_target) : "") << ',' << m.cost << ',' << m.value
          << ',' << (m.compliant ? 1 : 0) << ',' << m.mean_beta << ',' << m.corrected_steps << '\n';
    }
  }
}

void write_surface_csv(std::span<const SurfaceCell> cells, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "budget_scale,roi_scale,mean_beta,compliance_rate,conv\n";
  for (const auto& c : cells)
    out << c.budget_scale << ',' << c.roi_scale << ',' << c.mean_beta << ',' << c.compliance_rate << ','
        << c.conv << '\n';
}

void write_alpha_trace_csv(std::span<const MetricsReport> reports, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "policy,budget_scale,roi_scale,day,advertiser,step,alpha,delta_roi\n";
  for (const auto& r : reports) {
    for (const auto& m : r.episodes) {
      for (const auto& row : m.trace) {
        out << m.policy << ',' << m.budget_scale << ','
            << (m.roi_scale ? std::to_string(*m.roi_scale) : "") << ',' << m.day << ',' << m.advertiser
            << ',' << row.step << ',' << row.alpha << ',' << row.delta_roi << '\n';
      }
    }
  }
}

void write_report(std::span<const MetricsReport> reports, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto md = open_out(dir / "report.md");
    md << report_markdown(reports);
  }
  write_summary_csv(reports, dir / "summary.csv");
  write_episodes_csv(reports, dir / "episodes.csv");
  write_alpha_trace_csv(reports, dir / "alpha_trace.csv");
  std::vector<std::string> names;
  for (const auto& r : reports)
    if (r.roi_scale && std::find(names.begin(), names.end(), r.policy) == names.end())
      names.push_back(r.policy);
  for (const auto& n : names) write_surface_csv(surface(reports, n), dir / ("surface_" + n + ".csv"));
}

}  // namespace autobid
