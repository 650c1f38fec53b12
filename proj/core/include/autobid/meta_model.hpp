#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "autobid/spline.hpp"

namespace autobid {

struct SplineConfig {
  int degree = 3;
  std::size_t num_grid = 16;

  std::size_t num_control() const { return num_grid + static_cast<std::size_t>(degree) - 1; }
  SplineBasis basis() const { return SplineBasis(degree, num_grid); }
};

/// Feed-forward conditioning network: features -> tanh hidden layer -> the
/// control points of two splines. Outputs [0, M) drive the budget->coefficient
/// curve (theta head), outputs [M, 2M) the budget->future-value curve (phi head).
struct MetaModel {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 2M x hidden
  Eigen::VectorXd b2;

  static MetaModel zeros(std::size_t input_dim, std::size_t hidden, std::size_t num_control);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static MetaModel random(std::size_t input_dim, std::size_t hidden, std::size_t num_control,
                          std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t num_control() const { return static_cast<std::size_t>(w2.rows()) / 2; }
  std::size_t num_parameters() const;

  /// Parameters in the order w1, b1, w2, b2 (column-major matrices).
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

struct HeadOutputs {
  std::vector<double> theta;
  std::vector<double> phi;
};

HeadOutputs forward(const MetaModel& model, std::span<const double> features);
std::vector<HeadOutputs> forward_batch(const MetaModel& model,
                                       const std::vector<std::vector<double>>& features);

/// One budget anchor in spline units: x = budget / budget_unit, targets divided
/// by their scales. `basis` caches the spline basis at x.
struct NormalizedAnchor {
  double x = 0.0;
  double beta_target = 0.0;
  double value_target = 0.0;
  std::vector<double> basis;
};

struct LossExample {
  std::vector<double> features;
  std::vector<NormalizedAnchor> anchors;
};

/// Fills NormalizedAnchor::basis for every anchor.
void attach_basis(const SplineBasis& basis, std::vector<LossExample>& batch);

struct LossValue {
  double total = 0.0;
  double beta_term = 0.0;
  double value_term = 0.0;
};

/// Mean over states of the mean over anchors of
/// (theta-spline(x) - beta)^2 + (phi-spline(x) - value)^2.
LossValue loss(const MetaModel& model, std::span<const LossExample> batch);

struct Gradient {
  MetaModel grad;
  LossValue loss;
};

/// Analytic gradient of `loss` with respect to every network parameter,
/// chained through the spline basis.
Gradient backward(const MetaModel& model, std::span<const LossExample> batch);

/// Budget-domain view of one state's pair of splines.
///
/// The spline input is budget / budget_unit; coefficient and value outputs are
/// multiplied back by their units.
struct BudgetCurves {
  SplineCurve beta_curve;
  SplineCurve value_curve;
  double budget_unit = 1.0;
  double beta_unit = 1.0;
  double value_unit = 1.0;
  double max_budget = std::numeric_limits<double>::infinity();  // planning cap

  double beta_at(double budget) const { return beta_unit * beta_curve.eval(budget / budget_unit); }
  double value_at(double budget) const {
    return value_unit * value_curve.eval(budget / budget_unit);
  }
  double value_slope_at(double budget) const {
    return value_unit / budget_unit * value_curve.eval_derivative(budget / budget_unit);
  }
  double beta_slope_at(double budget) const {
    return beta_unit / budget_unit * beta_curve.eval_derivative(budget / budget_unit);
  }
};

}  // namespace autobid
