#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "autobid/meta_model.hpp"
#include "autobid/spline.hpp"

namespace autobid {

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// coeffs[i] multiplies x^i.
struct PolynomialFit {
  std::vector<double> coeffs;
  double operator()(double x) const;
};

/// Ordinary least squares. Throws RankDeficientError when the design matrix
/// has fewer than degree + 1 independent columns (e.g. a single distinct x).
PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree);

struct MlpConfig {
  std::size_t hidden = 16;
  std::size_t epochs = 3000;
  double learning_rate = 1e-2;
  std::uint64_t seed = 1;
};

/// 1 -> tanh(hidden) -> 1, trained full-batch with Adam on standardized data.
struct MlpFit {
  Eigen::VectorXd w1, b1, w2;
  double b2 = 0.0;
  double x_shift = 0.0, x_scale = 1.0, y_shift = 0.0, y_scale = 1.0;
  double operator()(double x) const;
};

MlpFit fit_mlp(std::span<const double> x, std::span<const double> y, const MlpConfig& config = {});

inline constexpr double kSmoothingCandidates[] = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// Spline fitted by penalized least squares on the control points, the domain
/// [x_lo, x_hi] of the training inputs mapped onto [0, 1].
struct SplineFit {
  SplineCurve curve;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double operator()(double x) const;
};

/// `smoothing` weights a second-difference penalty on the control points,
/// which keeps the system well posed when data are sparse.
SplineFit fit_spline(std::span<const double> x, std::span<const double> y,
                     const SplineConfig& config = {}, double smoothing = 1e-4);

/// Picks the smoothing from `candidates` by fitting on the lower
/// (1 - holdout) share of x and scoring RMSE on the rest.
double select_smoothing(std::span<const double> x, std::span<const double> y,
                        const SplineConfig& config,
                        std::span<const double> candidates = kSmoothingCandidates,
                        double holdout = 0.2);

struct Sample1d {
  std::vector<double> x;
  std::vector<double> y;
};

/// Monotone curve that rises steeply and then flattens past `knee`:
/// y = slope_hi * x for x below the knee, continuing with slope_lo, joined
/// smoothly over `softness`.
struct KneeCurve {
  double knee = 0.5;
  double slope_hi = 2.0;
  double slope_lo = 0.3;
  double softness = 0.05;
  double operator()(double x) const;
};

/// Draws a random knee curve, `n_train` noisy samples on [0, split) and
/// `n_test` on [split, 1].
struct ExtrapolationTask {
  KneeCurve curve;
  Sample1d train;
  Sample1d test;
};

ExtrapolationTask make_knee_task(std::uint64_t seed, std::size_t n_train = 60,
                                 std::size_t n_test = 40, double split = 0.7,
                                 double noise = 0.01);

struct ComparatorReport {
  double linear = 0.0;
  double quadratic = 0.0;
  double mlp = 0.0;
  double bspline = 0.0;
};

/// Fits all four models on `train` and reports held-out RMSE on `test`. The
/// spline smoothing comes from select_smoothing on `train`.
ComparatorReport compare_extrapolation(const Sample1d& train, const Sample1d& test,
                                       const MlpConfig& mlp = {},
                                       const SplineConfig& spline = {3, 8});

double rmse(std::span<const double> predicted, std::span<const double> actual);

}  // namespace autobid
