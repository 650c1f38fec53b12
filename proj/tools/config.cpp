#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "autobid/csv_io.hpp"
#include "json.hpp"

namespace autobid::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section, std::set<std::string> allowed) {
  if (!j.is_object()) throw std::invalid_argument(std::string("config: '") + section + "' must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument(std::string("config: unknown key '") + key + "' in '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_opt(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<double>();
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

BetaSampling sampling_from(const std::string& s) {
  if (s == "uniform") return BetaSampling::kUniform;
  if (s == "log_uniform") return BetaSampling::kLogUniform;
  throw std::invalid_argument("config: collect.sampling must be 'uniform' or 'log_uniform'");
}

PidMode pid_mode_from(const std::string& s) {
  if (s == "spend_pacing") return PidMode::kSpendPacing;
  if (s == "roi_error") return PidMode::kRoiError;
  throw std::invalid_argument("config: pid.mode must be 'spend_pacing' or 'roi_error'");
}

GreedyMode greedy_from(const std::string& s) {
  if (s == "skip_and_continue") return GreedyMode::kSkipAndContinue;
  if (s == "stop_at_first_violation") return GreedyMode::kStopAtFirstViolation;
  throw std::invalid_argument("config: lp_replan.mode must be 'skip_and_continue' or 'stop_at_first_violation'");
}

}  // namespace

AppConfig load_config(const std::optional<std::filesystem::path>& path) {
  AppConfig c;
  c.controller.target_margin = 0.1;
  if (!path) return c;

  std::ifstream in(*path);
  if (!in) throw std::runtime_error("cannot open config " + path->string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }
  check_keys(j, "root", {"seed", "generator", "collect", "train", "controller", "pid", "lp_replan",
                         "baseline_beta", "eval"});
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("generator")) c.generator = generator_config_from_json(j.at("generator").dump());

  if (j.contains("collect")) {
    const auto& s = j.at("collect");
    check_keys(s, "collect", {"samples_per_step", "lo_percentile", "hi_percentile", "sampling", "seed",
                              "behavior_scales", "count_scale"});
    read(s, "samples_per_step", c.collect.samples_per_step);
    read(s, "lo_percentile", c.collect.lo_percentile);
    read(s, "hi_percentile", c.collect.hi_percentile);
    if (s.contains("sampling")) c.collect.sampling = sampling_from(s.at("sampling").get<std::string>());
    read(s, "seed", c.collect.seed);
    read(s, "behavior_scales", c.collect.behavior_scales);
    read(s, "count_scale", c.collect.features.count_scale);
  }
  c.train.features = c.collect.features;

  if (j.contains("train")) {
    const auto& s = j.at("train");
    check_keys(s, "train", {"learning_rate", "epochs", "batch_size", "seed", "hidden", "degree", "num_grid",
                            "val_fraction"});
    read(s, "learning_rate", c.train.learning_rate);
    read(s, "epochs", c.train.epochs);
    read(s, "batch_size", c.train.batch_size);
    read(s, "seed", c.train.seed);
    read(s, "hidden", c.train.hidden);
    read(s, "degree", c.train.spline.degree);
    read(s, "num_grid", c.train.spline.num_grid);
    read(s, "val_fraction", c.train.val_fraction);
  }

  if (j.contains("controller")) {
    const auto& s = j.at("controller");
    check_keys(s, "controller", {"lambda", "max_iters", "c_floor", "roi_tolerance", "target_margin", "scan_points"});
    read_opt(s, "lambda", c.controller.lambda);
    read(s, "max_iters", c.controller.max_iters);
    read(s, "c_floor", c.controller.c_floor);
    read_opt(s, "roi_tolerance", c.controller.roi_tolerance);
    read(s, "target_margin", c.controller.target_margin);
    read(s, "scan_points", c.controller.scan_points);
  }

  if (j.contains("pid")) {
    const auto& s = j.at("pid");
    check_keys(s, "pid", {"kp", "ki", "kd", "mode", "beta_min", "beta_max"});
    read(s, "kp", c.pid.kp);
    read(s, "ki", c.pid.ki);
    read(s, "kd", c.pid.kd);
    if (s.contains("mode")) c.pid.mode = pid_mode_from(s.at("mode").get<std::string>());
    read(s, "beta_min", c.pid.beta_min);
    read(s, "beta_max", c.pid.beta_max);
  }
  if (j.contains("lp_replan")) {
    const auto& s = j.at("lp_replan");
    check_keys(s, "lp_replan", {"mode"});
    if (s.contains("mode")) c.lp.mode = greedy_from(s.at("mode").get<std::string>());
  }
  read_opt(j, "baseline_beta", c.baseline_beta);

  if (j.contains("eval")) {
    const auto& s = j.at("eval");
    check_keys(s, "eval", {"budget_scales", "roi_scales", "threads"});
    read(s, "budget_scales", c.grid.budget_scales);
    read(s, "roi_scales", c.roi_scales);
    read(s, "threads", c.threads);
  }

  c.generator.validate();
  c.train.validate();
  c.controller.validate();
  c.pid.validate();
  return c;
}

std::string config_to_json(const AppConfig& c) {
  json j;
  if (c.seed) j["seed"] = *c.seed;
  j["generator"] = json::parse(generator_config_to_json(c.generator));
  j["collect"] = {{"samples_per_step", c.collect.samples_per_step},
                  {"lo_percentile", c.collect.lo_percentile},
                  {"hi_percentile", c.collect.hi_percentile},
                  {"sampling", c.collect.sampling == BetaSampling::kUniform ? "uniform" : "log_uniform"},
                  {"seed", c.collect.seed},
                  {"behavior_scales", c.collect.behavior_scales},
                  {"count_scale", c.collect.features.count_scale}};
  j["train"] = {{"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},       {"seed", c.train.seed},
                {"hidden", c.train.hidden},               {"degree", c.train.spline.degree},
                {"num_grid", c.train.spline.num_grid},    {"val_fraction", c.train.val_fraction}};
  j["controller"] = {{"lambda", opt(c.controller.lambda)},
                     {"max_iters", c.controller.max_iters},
                     {"c_floor", c.controller.c_floor},
                     {"roi_tolerance", opt(c.controller.roi_tolerance)},
                     {"target_margin", c.controller.target_margin},
                     {"scan_points", c.controller.scan_points}};
  j["pid"] = {{"kp", c.pid.kp},
              {"ki", c.pid.ki},
              {"kd", c.pid.kd},
              {"mode", c.pid.mode == PidMode::kSpendPacing ? "spend_pacing" : "roi_error"},
              {"beta_min", c.pid.beta_min},
              {"beta_max", c.pid.beta_max}};
  j["lp_replan"] = {{"mode", c.lp.mode == GreedyMode::kSkipAndContinue ? "skip_and_continue"
                                                                        : "stop_at_first_violation"}};
  j["baseline_beta"] = opt(c.baseline_beta);
  j["eval"] = {{"budget_scales", c.grid.budget_scales}, {"roi_scales", c.roi_scales}, {"threads", c.threads}};
  return j.dump(2);
}

std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag, const AppConfig& config) {
  if (flag) return flag;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::char_traits<char>::length(env)) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
  }
  return config.seed;
}

}  // namespace autobid::cli
