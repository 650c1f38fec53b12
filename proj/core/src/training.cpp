#include "autobid/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "autobid/stats.hpp"

namespace autobid {

double steps_left_fraction(std::span<const double> features) {
  if (features.size() <= feature::kStepsLeft)
    throw std::invalid_argument("steps_left_fraction: feature vector too short");
  return std::max(features[feature::kStepsLeft], 1e-6);
}

Normalization fit_normalization(std::span<const SupervisedState> states) {
  std::vector<double> budgets;
  std::vector<double> betas;
  std::vector<double> values;
  for (const auto& s : states) {
    const double frac = steps_left_fraction(s.features);
    for (const auto& a : s.anchors) {
      budgets.push_back(a.budget / frac);
      betas.push_back(a.beta);
      values.push_back(a.value / frac);
    }
  }
  auto pct = [](const std::vector<double>& xs, double p) {
    const double v = stats::percentile(xs, p);
    return v > 0.0 ? v : 1.0;
  };
  // Budgets use the maximum so every training anchor sits inside the grid.
  Normalization n{pct(budgets, 100.0), pct(betas, 90.0), pct(values, 90.0), 1.0};
  n.x_support = pct(budgets, 99.0) / n.b_scale;
  return n;
}

std::vector<LossExample> to_loss_examples(std::span<const SupervisedState> states,
                                          const Normalization& norm, const SplineConfig& spline) {
  const SplineBasis basis = spline.basis();
  std::vector<LossExample> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    const double frac = steps_left_fraction(s.features);
    LossExample ex;
    ex.features.assign(s.features.begin(), s.features.end());
    for (const auto& a : s.anchors) {
      NormalizedAnchor na;
      na.x = a.budget / (norm.b_scale * frac);
      na.beta_target = a.beta / norm.beta_scale;
      na.value_target = a.value / (norm.v_scale * frac);
      na.basis = basis.basis(na.x);
      ex.anchors.push_back(std::move(na));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

BudgetCurves curves_for(const Checkpoint& checkpoint, std::span<const double> features) {
  const HeadOutputs heads = forward(checkpoint.model, features);
  const double frac = steps_left_fraction(features);
  const SplineBasis basis = checkpoint.spline.basis();
  BudgetCurves c{SplineCurve(basis, heads.theta), SplineCurve(basis, heads.phi),
                 checkpoint.norm.b_scale * frac, checkpoint.norm.beta_scale,
                 checkpoint.norm.v_scale * frac};
  c.max_budget = checkpoint.norm.x_support * c.budget_unit;
  return c;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (hidden == 0) throw std::invalid_argument("TrainConfig: hidden must be >= 1");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("TrainConfig: val_fraction must be in [0, 1)");
}

TrainResult train(std::span<const SupervisedState> states, const TrainConfig& config) {
  config.validate();
  if (states.empty()) throw std::invalid_argument("train: no supervised states");

  // Hold out whole trajectories.
  std::vector<std::size_t> trajs;
  {
    std::set<std::size_t> ids;
    for (const auto& s : states) ids.insert(s.traj_id);
    trajs.assign(ids.begin(), ids.end());
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(trajs.begin(), trajs.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(trajs.size())));
  if (n_val >= trajs.size()) n_val = trajs.size() - 1;
  const std::set<std::size_t> val_set(trajs.begin(), trajs.begin() + static_cast<std::ptrdiff_t>(n_val));

  std::vector<SupervisedState> train_states;
  std::vector<SupervisedState> val_states;
  for (const auto& s : states) {
    if (s.anchors.empty()) continue;
    (val_set.count(s.traj_id) ? val_states : train_states).push_back(s);
  }
  if (train_states.empty()) throw std::invalid_argument("train: no training states with anchors");

  TrainResult result;
  result.val_trajectories.assign(val_set.begin(), val_set.end());
  Checkpoint& ckpt = result.checkpoint;
  ckpt.spline = config.spline;
  ckpt.features = config.features;
  ckpt.norm = config.normalization.value_or(fit_normalization(train_states));

  std::vector<LossExample> train_ex = to_loss_examples(train_states, ckpt.norm, ckpt.spline);
  const std::vector<LossExample> val_ex = to_loss_examples(val_states, ckpt.norm, ckpt.spline);

  const std::size_t m = ckpt.spline.num_control();
  ckpt.model = MetaModel::random(kFeatureDim, config.hidden, m, config.seed);
  {
    // Start both curves at the mean target so early steps are small corrections.
    double beta_sum = 0.0;
    double value_sum = 0.0;
    std::size_t count = 0;
    for (const auto& ex : train_ex) {
      for (const auto& a : ex.anchors) {
        beta_sum += a.beta_target;
        value_sum += a.value_target;
        ++count;
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(count, 1));
    ckpt.model.b2.head(static_cast<Eigen::Index>(m)).setConstant(beta_sum / n);
    ckpt.model.b2.tail(static_cast<Eigen::Index>(m)).setConstant(value_sum / n);
  }

  auto evaluate = [&](std::size_t epoch) {
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = loss(ckpt.model, train_ex).total;
    e.val_loss = val_ex.empty() ? e.train_loss : loss(ckpt.model, val_ex).total;
    if (!std::isfinite(e.train_loss) || !std::isfinite(e.val_loss) || !ckpt.model.all_finite()) {
      std::ostringstream msg;
      msg << "train: loss diverged at epoch " << epoch << " (train " << e.train_loss << ", val "
          << e.val_loss << ", learning rate " << config.learning_rate << ")";
      throw TrainingDivergedError(msg.str());
    }
    result.log.push_back(e);
  };
  evaluate(0);

  Adam adam(ckpt.model.num_parameters(), config.learning_rate);
  Eigen::VectorXd params = ckpt.model.flatten();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(train_ex.begin(), train_ex.end(), rng);
    for (std::size_t start = 0; start < train_ex.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, train_ex.size() - start);
      const Gradient g = backward(ckpt.model, std::span(train_ex).subspan(start, len));
      adam.step(params, g.grad.flatten());
      ckpt.model.unflatten(params);
    }
    evaluate(epoch);
  }
  return result;
}

void write_training_log(std::span<const EpochLog> log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_training_log: cannot open " + path.string());
  out.precision(10);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : log) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

}  // namespace autobid
