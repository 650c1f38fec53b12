#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autobid/baselines.hpp"
#include "autobid/controller.hpp"
#include "autobid/evaluation.hpp"
#include "autobid/generator.hpp"
#include "autobid/training.hpp"

namespace autobid::cli {

inline constexpr const char* kSeedEnv = "AUTOBID_SEED";

struct AppConfig {
  std::optional<std::uint64_t> seed;  // top-level "seed"
  GeneratorConfig generator;
  CollectPlan collect;
  TrainConfig train;
  ControllerConfig controller;
  PidConfig pid;
  LpReplanConfig lp;
  std::optional<double> baseline_beta;  // PID beta0, LP prior, fixed beta; median exhaust beta if unset
  EvalGrid grid;
  std::vector<double> roi_scales{0.8, 0.9, 1.0, 1.1, 1.2};
  std::size_t threads = 1;
};

/// Defaults, overridden by whatever keys the file sets. Unknown keys are
/// rejected so typos do not go unnoticed.
AppConfig load_config(const std::optional<std::filesystem::path>& path);

std::string config_to_json(const AppConfig& config);

/// --seed flag, else the AUTOBID_SEED variable, else the file's top-level seed.
std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag, const AppConfig& config);

}  // namespace autobid::cli
