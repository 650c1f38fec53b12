#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "autobid/hindsight.hpp"
#include "autobid/meta_model.hpp"

namespace autobid {

/// Units that map raw budgets, coefficients and values onto spline scale.
/// Budgets and values of a state are divided by (scale * fraction of steps
/// left), so early and late states both land on the [0, 1] grid.
struct Normalization {
  double b_scale = 1.0;
  double beta_scale = 1.0;
  double v_scale = 1.0;
  double x_support = 1.0;  // budgets past x_support * unit are outside the data
};

double steps_left_fraction(std::span<const double> features);

/// Budget unit: largest anchor budget per unit of steps left. Coefficient and
/// value units: 90th percentiles of anchor coefficients and of anchor values
/// per unit of steps left. x_support: 99th percentile of normalized budgets.
Normalization fit_normalization(std::span<const SupervisedState> states);

std::vector<LossExample> to_loss_examples(std::span<const SupervisedState> states,
                                          const Normalization& norm, const SplineConfig& spline);

/// Everything needed to bid with a trained model.
struct Checkpoint {
  MetaModel model;
  SplineConfig spline;
  Normalization norm;
  FeatureOptions features;
};

BudgetCurves curves_for(const Checkpoint& checkpoint, std::span<const double> features);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

/// Adam on a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  std::uint64_t seed = 7;
  std::size_t hidden = 128;
  SplineConfig spline;
  double val_fraction = 0.2;  // fraction of trajectories held out
  std::optional<Normalization> normalization;  // fitted from data when absent
  FeatureOptions features;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;  // entry 0 is the initialization
  std::vector<std::size_t> val_trajectories;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mini-batch Adam on the composite anchor loss. Deterministic for a seed.
TrainResult train(std::span<const SupervisedState> states, const TrainConfig& config);

void write_training_log(std::span<const EpochLog> log, const std::filesystem::path& path);

}  // namespace autobid
