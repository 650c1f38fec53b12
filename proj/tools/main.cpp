#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "autobid/csv_io.hpp"
#include "autobid/evaluation.hpp"
#include "autobid/oracle.hpp"
#include "autobid/training.hpp"
#include "config.hpp"

namespace {

using namespace autobid;
namespace fs = std::filesystem;

struct Common {
  std::optional<fs::path> config_path;
  std::optional<std::uint64_t> seed;

  cli::AppConfig load() const { return cli::load_config(config_path); }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, std::string("seed; default from ") + cli::kSeedEnv + " or the config");
}

std::vector<const Episode*> pick(const SyntheticSuite& suite, const std::string& split) {
  if (split == "train") return suite.train_episodes();
  if (split == "test") return suite.test_episodes();
  std::vector<const Episode*> all;
  for (const auto& e : suite.episodes) all.push_back(&e);
  return all;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int gen_data(const Common& common, const fs::path& out) {
  auto cfg = common.load();
  if (auto seed = cli::resolve_seed(common.seed, cfg)) cfg.generator.seed = *seed;
  const SyntheticSuite suite = generate(cfg.generator);
  write_suite(suite, out);
  std::size_t imps = 0;
  for (const auto& e : suite.episodes) imps += e.stream.num_impressions();
  std::fprintf(stderr, "wrote %zu episodes (%zu impressions, seed %llu) to %s\n", suite.episodes.size(), imps,
               static_cast<unsigned long long>(cfg.generator.seed), out.c_str());
  return 0;
}

int collect_cmd(const Common& common, const fs::path& suite_dir, const fs::path& out, const std::string& split) {
  auto cfg = common.load();
  if (auto seed = cli::resolve_seed(common.seed, cfg)) cfg.collect.seed = *seed;
  const SyntheticSuite suite = read_suite(suite_dir);
  const auto episodes = pick(suite, split);
  const HindsightDataset ds = collect_suite(suite, episodes, cfg.collect);
  write_dataset_csv(ds, out);
  std::fprintf(stderr, "collected %zu tuples from %zu episodes into %s\n", ds.tuples.size(), episodes.size(),
               out.c_str());
  return 0;
}

int train_cmd(const Common& common, const fs::path& data, const fs::path& out, std::optional<fs::path> log,
              std::optional<std::size_t> epochs) {
  auto cfg = common.load();
  if (auto seed = cli::resolve_seed(common.seed, cfg)) cfg.train.seed = *seed;
  if (epochs) cfg.train.epochs = *epochs;
  const HindsightDataset ds = read_dataset_csv(data);
  const auto states = relabel_as_supervision(ds);
  const TrainResult res = train(states, cfg.train);
  save_checkpoint(res.checkpoint, out);
  if (!log) log = fs::path(out.string() + ".log.csv");
  write_training_log(res.log, *log);
  const auto& first = res.log.front();
  const auto& last = res.log.back();
  std::fprintf(stderr, "trained %zu epochs on %zu states: val loss %.5g -> %.5g; checkpoint %s\n",
               last.epoch, states.size(), first.val_loss, last.val_loss, out.c_str());
  return 0;
}

struct BidArgs {
  fs::path checkpoint;
  fs::path stream;
  double budget = 0.0;
  std::optional<double> roi_target;
  std::optional<double> lambda;
  std::optional<std::size_t> max_iters;
  std::optional<double> margin;
  int day_of_week = 0;
  AdvertiserInfo advertiser;
  std::optional<fs::path> out;
};

int bid_cmd(const Common& common, const BidArgs& a) {
  auto cfg = common.load();
  // Decisions are deterministic; the seed is only echoed so runs can be matched to data.
  const auto seed = cli::resolve_seed(common.seed, cfg);
  ControllerConfig ctl = cfg.controller;
  if (a.lambda) ctl.lambda = a.lambda;
  if (a.max_iters) ctl.max_iters = *a.max_iters;
  if (a.margin) ctl.target_margin = *a.margin;
  auto ck = std::make_shared<const Checkpoint>(load_checkpoint(a.checkpoint));
  const ImpressionStream stream = read_impressions_csv(a.stream);
  const ConstraintConfig constraints{a.budget, a.roi_target};
  constraints.validate();
  const CampaignResult res =
      run_campaign(stream, constraints, make_controller_policy(ck, a.day_of_week, a.advertiser, ctl));
  if (a.out)
    write_campaign_csv(res, *a.out);
  else
    write_campaign_csv(res, std::cout);
  std::fprintf(stderr, "cost %.6g of %.6g, value %.6g, roi %.6g", res.total_cost(), a.budget, res.total_value(),
               res.realized_roi());
  if (a.roi_target)
    std::fprintf(stderr, " (target %.6g, %s)", *a.roi_target,
                 res.total_value() >= *a.roi_target * res.total_cost() ? "met" : "missed");
  if (seed) std::fprintf(stderr, ", seed %llu", static_cast<unsigned long long>(*seed));
  std::fprintf(stderr, "\n");
  return 0;
}

int oracle_cmd(const fs::path& items, double budget, std::optional<double> roi, std::size_t limit) {
  SelectionInstance inst{read_items_csv(items), budget, roi};
  inst.validate();
  const SelectionResult exact = milp_oracle(inst, limit);
  const SelectionResult greedy = greedy_fcs(inst);
  const double frac = fractional_relaxation(inst);
  double v_max = 0.0;
  for (const auto& it : inst.items) v_max = std::max(v_max, it.value);
  std::printf("items        %zu\n", inst.items.size());
  std::printf("V_oracle     %.10g\n", exact.total_value);
  std::printf("V_fixed      %.10g\n", greedy.total_value);
  std::printf("V_frac       %.10g\n", frac);
  if (greedy.beta_star)
    std::printf("beta_star    %.10g\n", *greedy.beta_star);
  else
    std::printf("beta_star    none\n");
  std::printf("gap          %.10g\n", exact.total_value - greedy.total_value);
  std::printf("v_max        %.10g\n", v_max);
  std::printf("bound        %s\n", greedy.total_value > exact.total_value - v_max ? "holds" : "violated");
  return 0;
}

struct EvalArgs {
  fs::path suite;
  std::optional<fs::path> checkpoint;
  std::string policies = "bspline,pid,lp_replan,fixed";
  std::string mode = "both";
  std::string split = "test";
  fs::path out = "results.json";
  std::optional<std::size_t> threads;
  bool traces = false;
};

int evaluate_cmd(const Common& common, const EvalArgs& a) {
  const auto cfg = common.load();
  const SyntheticSuite suite = read_suite(a.suite);
  const double prior = cfg.baseline_beta ? *cfg.baseline_beta : median_exhaust_beta(suite, suite.train_episodes());

  std::vector<NamedPolicy> policies;
  for (const auto& name : split_list(a.policies)) {
    if (name == "bspline") {
      if (!a.checkpoint) throw std::invalid_argument("evaluate: policy 'bspline' needs --checkpoint");
      auto ck = std::make_shared<const Checkpoint>(load_checkpoint(*a.checkpoint));
      policies.push_back(learned_policy(ck, cfg.controller));
    } else if (name == "pid") {
      PidConfig p = cfg.pid;
      p.beta0 = prior;
      policies.push_back(pid_policy(p));
    } else if (name == "lp_replan") {
      LpReplanConfig l = cfg.lp;
      l.prior_beta = prior;
      policies.push_back(lp_replan_policy(l));
    } else if (name == "fixed") {
      policies.push_back(fixed_policy(prior));
    } else {
      throw std::invalid_argument("evaluate: unknown policy '" + name + "'");
    }
  }
  if (a.mode != "bcb" && a.mode != "mcb" && a.mode != "both")
    throw std::invalid_argument("evaluate: --mode must be bcb, mcb or both");

  const auto episodes = pick(suite, a.split);
  const EvalOptions opts{a.threads.value_or(cfg.threads), a.traces};
  std::vector<MetricsReport> reports;
  if (a.mode != "mcb") {
    EvalGrid g = cfg.grid;
    g.roi_scales.clear();
    auto r = evaluate(policies, suite, episodes, g, opts);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  if (a.mode != "bcb") {
    EvalGrid g = cfg.grid;
    g.roi_scales = cfg.roi_scales;
    auto r = evaluate(policies, suite, episodes, g, opts);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  write_reports_json(reports, a.out);
  std::fprintf(stderr, "%zu cells over %zu episodes -> %s\n", reports.size(), episodes.size(), a.out.c_str());
  return 0;
}

int report_cmd(const fs::path& results, const fs::path& out) {
  const auto reports = read_reports_json(results);
  write_report(reports, out);
  std::cout << report_markdown(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-pacing and ROI-constrained auto-bidding with spline policies"};
  app.require_subcommand(0, 1);
  Common common;
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the effective config as JSON and exit");
  app.add_option("-c,--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  fs::path gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic suite of auction days");
  add_common(gen, common);
  gen->add_option("-o,--out", gen_out, "output directory")->required();

  fs::path col_suite, col_out;
  std::string col_split = "train";
  auto* col = app.add_subcommand("collect", "hindsight experience collection on a suite");
  add_common(col, common);
  col->add_option("--suite", col_suite, "suite directory")->required()->check(CLI::ExistingDirectory);
  col->add_option("-o,--out", col_out, "dataset CSV")->required();
  col->add_option("--split", col_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));

  fs::path tr_data, tr_out;
  std::optional<fs::path> tr_log;
  std::optional<std::size_t> tr_epochs;
  auto* tr = app.add_subcommand("train", "fit the spline policy on a dataset");
  add_common(tr, common);
  tr->add_option("--data", tr_data, "dataset CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--out", tr_out, "checkpoint JSON")->required();
  tr->add_option("--log", tr_log, "training log CSV (default <out>.log.csv)");
  tr->add_option("--epochs", tr_epochs, "override train.epochs");

  BidArgs bid;
  auto* bd = app.add_subcommand("bid", "run one campaign on an impression stream");
  add_common(bd, common);
  bd->add_option("checkpoint", bid.checkpoint, "checkpoint JSON")->required()->check(CLI::ExistingFile);
  bd->add_option("stream", bid.stream, "impression CSV (step,value,price)")->required()->check(CLI::ExistingFile);
  bd->add_option("--budget", bid.budget, "campaign budget")->required();
  bd->add_option("--roi-target", bid.roi_target, "minimum value/cost; omit for budget-only bidding");
  bd->add_option("--lambda", bid.lambda, "controller step scale");
  bd->add_option("--max-iters", bid.max_iters, "controller iteration cap");
  bd->add_option("--margin", bid.margin, "plan against roi_target * (1 + margin)");
  bd->add_option("--day-of-week", bid.day_of_week, "0..6")->check(CLI::Range(0, 6));
  bd->add_option("--advertiser", bid.advertiser.id, "advertiser index");
  bd->add_option("--num-advertisers", bid.advertiser.num_advertisers, "advertiser count of the training suite");
  bd->add_option("--category", bid.advertiser.category, "category index");
  bd->add_option("--num-categories", bid.advertiser.num_categories, "category count of the training suite");
  bd->add_option("-o,--out", bid.out, "campaign CSV (default stdout)");

  fs::path or_items;
  double or_budget = 0.0;
  std::optional<double> or_roi;
  std::size_t or_limit = kDefaultExactItemLimit;
  auto* orc = app.add_subcommand("oracle", "exact and greedy values of an offline selection instance");
  orc->add_option("items", or_items, "CSV value,cost")->required()->check(CLI::ExistingFile);
  orc->add_option("--budget", or_budget, "budget")->required();
  orc->add_option("--roi-target", or_roi, "minimum value/cost");
  orc->add_option("--item-limit", or_limit, "largest instance the exact solver accepts");

  EvalArgs ev;
  auto* evc = app.add_subcommand("evaluate", "run policies over the budget (and ROI) grid");
  add_common(evc, common);
  evc->add_option("--suite", ev.suite, "suite directory")->required()->check(CLI::ExistingDirectory);
  evc->add_option("--checkpoint", ev.checkpoint, "checkpoint for the bspline policy")->check(CLI::ExistingFile);
  evc->add_option("--policies", ev.policies, "comma list of bspline,pid,lp_replan,fixed");
  evc->add_option("--mode", ev.mode, "bcb, mcb or both");
  evc->add_option("--split", ev.split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  evc->add_option("-o,--out", ev.out, "results JSON");
  evc->add_option("--threads", ev.threads, "worker threads");
  evc->add_flag("--traces", ev.traces, "keep per-step alpha traces");

  fs::path rp_in, rp_out;
  auto* rp = app.add_subcommand("report", "tables and plot-ready CSV from evaluation results");
  rp->add_option("--results", rp_in, "results JSON")->required()->check(CLI::ExistingFile);
  rp->add_option("-o,--out", rp_out, "report directory")->required();

  CLI11_PARSE(app, argc, argv);
  if (!print_config && app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    if (print_config) {
      std::cout << cli::config_to_json(common.load()) << '\n';
      return 0;
    }
    if (*gen) return gen_data(common, gen_out);
    if (*col) return collect_cmd(common, col_suite, col_out, col_split);
    if (*tr) return train_cmd(common, tr_data, tr_out, tr_log, tr_epochs);
    if (*bd) return bid_cmd(common, bid);
    if (*orc) return oracle_cmd(or_items, or_budget, or_roi, or_limit);
    if (*evc) return evaluate_cmd(common, ev);
    if (*rp) return report_cmd(rp_in, rp_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
