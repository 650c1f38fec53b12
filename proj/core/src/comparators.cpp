#include "autobid/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "autobid/training.hpp"

namespace autobid {

namespace {

void check_xy(std::span<const double> x, std::span<const double> y, const char* who) {
  if (x.size() != y.size()) throw std::invalid_argument(std::string(who) + ": x and y differ in length");
  if (x.empty()) throw std::invalid_argument(std::string(who) + ": no data");
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

}  // namespace

double PolynomialFit::operator()(double x) const {
  double y = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
  return y;
}

PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
  check_xy(x, y, "fit_polynomial");
  if (degree < 0) throw std::invalid_argument("fit_polynomial: degree must be >= 0");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index p = degree + 1;
  Eigen::MatrixXd a(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      a(i, j) = v;
      v *= x[static_cast<std::size_t>(i)];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw RankDeficientError("fit_polynomial: design matrix has rank " + std::to_string(qr.rank()) +
                             ", degree " + std::to_string(degree) + " needs " + std::to_string(p));
  const Eigen::VectorXd c =
      qr.solve(Eigen::Map<const Eigen::VectorXd>(y.data(), n));
  return {std::vector<double>(c.data(), c.data() + c.size())};
}

double MlpFit::operator()(double x) const {
  const double u = (x - x_shift) / x_scale;
  const double out = w2.dot((w1 * u + b1).array().tanh().matrix()) + b2;
  return out * y_scale + y_shift;
}

MlpFit fit_mlp(std::span<const double> x, std::span<const double> y, const MlpConfig& config) {
  check_xy(x, y, "fit_mlp");
  if (config.hidden == 0) throw std::invalid_argument("fit_mlp: hidden must be >= 1");
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto h = static_cast<Eigen::Index>(config.hidden);
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

  MlpFit f;
  auto standardize = [](const Eigen::VectorXd& v, double& shift, double& scale) {
    shift = v.mean();
    const double sd = std::sqrt((v.array() - shift).square().mean());
    scale = sd > 0.0 ? sd : 1.0;
  };
  standardize(xv, f.x_shift, f.x_scale);
  standardize(yv, f.y_shift, f.y_scale);
  const Eigen::VectorXd u = (xv.array() - f.x_shift) / f.x_scale;
  const Eigen::VectorXd t = (yv.array() - f.y_shift) / f.y_scale;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  f.w1 = Eigen::VectorXd::NullaryExpr(h, [&] { return unif(rng); });
  f.b1 = Eigen::VectorXd::NullaryExpr(h, [&] { return unif(rng); });
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  f.w2 = Eigen::VectorXd::NullaryExpr(h, [&] { return s2 * unif(rng); });

  // Flat layout: w1, b1, w2, b2.
  Eigen::VectorXd params(3 * h + 1);
  params << f.w1, f.b1, f.w2, f.b2;
  Adam adam(static_cast<std::size_t>(params.size()), config.learning_rate);
  Eigen::VectorXd grad(params.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Eigen::MatrixXd pre = (u * f.w1.transpose()).rowwise() + f.b1.transpose();  // n x h
    const Eigen::MatrixXd act = pre.array().tanh();
    const Eigen::VectorXd err = act * f.w2 + Eigen::VectorXd::Constant(n, f.b2) - t;
    const Eigen::VectorXd d_out = 2.0 * err / static_cast<double>(n);
    const Eigen::MatrixXd d_pre =
        ((d_out * f.w2.transpose()).array() * (1.0 - act.array().square())).matrix();
    grad << d_pre.transpose() * u, d_pre.colwise().sum().transpose(), act.transpose() * d_out,
        d_out.sum();
    adam.step(params, grad);
    f.w1 = params.segment(0, h);
    f.b1 = params.segment(h, h);
    f.w2 = params.segment(2 * h, h);
    f.b2 = params[3 * h];
  }
  return f;
}

double SplineFit::operator()(double x) const { return curve.eval((x - x_lo) / (x_hi - x_lo)); }

SplineFit fit_spline(std::span<const double> x, std::span<const double> y, const SplineConfig& config,
                     double smoothing) {
  check_xy(x, y, "fit_spline");
  if (smoothing < 0.0) throw std::invalid_argument("fit_spline: smoothing must be >= 0");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  if (!(*hi_it > *lo_it)) throw RankDeficientError("fit_spline: all inputs are equal");
  const double lo = *lo_it;
  const double hi = *hi_it;

  const SplineBasis basis = config.basis();
  const auto m = static_cast<Eigen::Index>(basis.num_basis());
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, m);
  std::vector<double> row(basis.num_basis());
  for (Eigen::Index i = 0; i < n; ++i) {
    basis.basis_into((x[static_cast<std::size_t>(i)] - lo) / (hi - lo), row);
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(m - 2, 0), m);
  for (Eigen::Index i = 0; i + 2 < m; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  const Eigen::MatrixXd lhs =
      a.transpose() * a + smoothing * static_cast<double>(n) * d.transpose() * d;
  const Eigen::VectorXd rhs = a.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const Eigen::VectorXd c = lhs.ldlt().solve(rhs);
  return {SplineCurve(basis, std::vector<double>(c.data(), c.data() + c.size())), lo, hi};
}

double select_smoothing(std::span<const double> x, std::span<const double> y,
                        const SplineConfig& config, std::span<const double> candidates,
                        double holdout) {
  check_xy(x, y, "select_smoothing");
  if (candidates.empty()) throw std::invalid_argument("select_smoothing: no candidates");
  if (!(holdout > 0.0 && holdout < 1.0))
    throw std::invalid_argument("select_smoothing: holdout must be in (0, 1)");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const auto cut = static_cast<std::size_t>(static_cast<double>(idx.size()) * (1.0 - holdout));
  if (cut < 2 || cut == idx.size()) return candidates.front();
  std::vector<double> fx, fy, vx, vy;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < cut ? fx : vx).push_back(x[idx[k]]);
    (k < cut ? fy : vy).push_back(y[idx[k]]);
  }
  double best = candidates.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    const SplineFit f = fit_spline(fx, fy, config, s);
    std::vector<double> pred;
    for (double xi : vx) pred.push_back(f(xi));
    const double err = rmse(pred, vy);
    if (err < best_err) {
      best_err = err;
      best = s;
    }
  }
  return best;
}

double KneeCurve::operator()(double x) const {
  return slope_hi * x - (slope_hi - slope_lo) * softness * softplus((x - knee) / softness);
}

ExtrapolationTask make_knee_task(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                                 double split, double noise) {
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("make_knee_task: split must be in (0, 1)");
  std::mt19937_64 rng(seed);
  auto unif = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::normal_distribution<double> eps(0.0, noise);
  ExtrapolationTask task;
  task.curve.knee = unif(0.25, 0.5) * split / 0.7;
  task.curve.slope_hi = unif(1.5, 3.0);
  task.curve.slope_lo = unif(0.1, 0.5);
  task.curve.softness = unif(0.02, 0.06);
  for (std::size_t i = 0; i < n_train; ++i) {
    const double xi = unif(0.0, split);
    task.train.x.push_back(xi);
    task.train.y.push_back(task.curve(xi) + eps(rng));
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    const double xi = unif(split, 1.0);
    task.test.x.push_back(xi);
    task.test.y.push_back(task.curve(xi) + eps(rng));
  }
  return task;
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_xy(predicted, actual, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

ComparatorReport compare_extrapolation(const Sample1d& train, const Sample1d& test,
                                       const MlpConfig& mlp, const SplineConfig& spline) {
  const PolynomialFit lin = fit_polynomial(train.x, train.y, 1);
  const PolynomialFit quad = fit_polynomial(train.x, train.y, 2);
  const MlpFit net = fit_mlp(train.x, train.y, mlp);
  const SplineFit spl =
      fit_spline(train.x, train.y, spline, select_smoothing(train.x, train.y, spline));
  auto score = [&](const auto& f) {
    std::vector<double> pred;
    pred.reserve(test.x.size());
    for (double xi : test.x) pred.push_back(f(xi));
    return rmse(pred, test.y);
  };
  return {score(lin), score(quad), score(net), score(spl)};
}

}  // namespace autobid
