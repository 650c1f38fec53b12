#include "autobid/meta_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace autobid {

namespace {

void check_features(const MetaModel& model, std::span<const double> features) {
  if (features.size() != model.input_dim()) {
    throw std::invalid_argument("MetaModel: expected " + std::to_string(model.input_dim()) +
                                " features, got " + std::to_string(features.size()));
  }
}

struct Activations {
  Eigen::VectorXd hidden;
  Eigen::VectorXd out;
};

Activations run(const MetaModel& m, std::span<const double> features) {
  check_features(m, features);
  const Eigen::Map<const Eigen::VectorXd> s(features.data(),
                                            static_cast<Eigen::Index>(features.size()));
  Activations a;
  a.hidden = (m.w1 * s + m.b1).array().tanh().matrix();
  a.out = m.w2 * a.hidden + m.b2;
  return a;
}

double dot(const double* coeffs, const std::vector<double>& basis) {
  double s = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) s += coeffs[j] * basis[j];
  return s;
}

void check_batch(std::span<const LossExample> batch) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  for (const auto& ex : batch) {
    if (ex.anchors.empty()) throw std::invalid_argument("loss: state without anchors");
  }
}

}  // namespace

MetaModel MetaModel::zeros(std::size_t input_dim, std::size_t hidden, std::size_t num_control) {
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto out = static_cast<Eigen::Index>(2 * num_control);
  MetaModel m;
  m.w1 = Eigen::MatrixXd::Zero(h, in);
  m.b1 = Eigen::VectorXd::Zero(h);
  m.w2 = Eigen::MatrixXd::Zero(out, h);
  m.b2 = Eigen::VectorXd::Zero(out);
  return m;
}

MetaModel MetaModel::random(std::size_t input_dim, std::size_t hidden, std::size_t num_control,
                            std::uint64_t seed) {
  MetaModel m = zeros(input_dim, hidden, num_control);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index j = 0; j < m.w1.cols(); ++j)
    for (Eigen::Index i = 0; i < m.w1.rows(); ++i) m.w1(i, j) = s1 * u(rng);
  for (Eigen::Index j = 0; j < m.w2.cols(); ++j)
    for (Eigen::Index i = 0; i < m.w2.rows(); ++i) m.w2(i, j) = s2 * u(rng);
  return m;
}

std::size_t MetaModel::num_parameters() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

Eigen::VectorXd MetaModel::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index o = 0;
  flat.segment(o, w1.size()) = Eigen::Map<const Eigen::VectorXd>(w1.data(), w1.size());
  o += w1.size();
  flat.segment(o, b1.size()) = b1;
  o += b1.size();
  flat.segment(o, w2.size()) = Eigen::Map<const Eigen::VectorXd>(w2.data(), w2.size());
  o += w2.size();
  flat.segment(o, b2.size()) = b2;
  return flat;
}

void MetaModel::unflatten(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_parameters())
    throw std::invalid_argument("MetaModel::unflatten: size mismatch");
  Eigen::Index o = 0;
  Eigen::Map<Eigen::VectorXd>(w1.data(), w1.size()) = flat.segment(o, w1.size());
  o += w1.size();
  b1 = flat.segment(o, b1.size());
  o += b1.size();
  Eigen::Map<Eigen::VectorXd>(w2.data(), w2.size()) = flat.segment(o, w2.size());
  o += w2.size();
  b2 = flat.segment(o, b2.size());
}

bool MetaModel::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

HeadOutputs forward(const MetaModel& model, std::span<const double> features) {
  const Activations a = run(model, features);
  const auto m = static_cast<Eigen::Index>(model.num_control());
  HeadOutputs h;
  h.theta.assign(a.out.data(), a.out.data() + m);
  h.phi.assign(a.out.data() + m, a.out.data() + 2 * m);
  return h;
}

std::vector<HeadOutputs> forward_batch(const MetaModel& model,
                                       const std::vector<std::vector<double>>& features) {
  std::vector<HeadOutputs> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(forward(model, f));
  return out;
}

void attach_basis(const SplineBasis& basis, std::vector<LossExample>& batch) {
  for (auto& ex : batch)
    for (auto& a : ex.anchors) a.basis = basis.basis(a.x);
}

LossValue loss(const MetaModel& model, std::span<const LossExample> batch) {
  check_batch(batch);
  const std::size_t m = model.num_control();
  LossValue total;
  for (const auto& ex : batch) {
    const Activations a = run(model, ex.features);
    double lb = 0.0;
    double lv = 0.0;
    for (const auto& anchor : ex.anchors) {
      if (anchor.basis.size() != m) throw std::invalid_argument("loss: anchor basis size mismatch");
      const double eb = dot(a.out.data(), anchor.basis) - anchor.beta_target;
      const double ev = dot(a.out.data() + m, anchor.basis) - anchor.value_target;
      lb += eb * eb;
      lv += ev * ev;
    }
    const auto n = static_cast<double>(ex.anchors.size());
    total.beta_term += lb / n;
    total.value_term += lv / n;
  }
  const auto s = static_cast<double>(batch.size());
  total.beta_term /= s;
  total.value_term /= s;
  total.total = total.beta_term + total.value_term;
  return total;
}

Gradient backward(const MetaModel& model, std::span<const LossExample> batch) {
  check_batch(batch);
  const std::size_t m = model.num_control();
  const auto s = static_cast<double>(batch.size());
  Gradient g{MetaModel::zeros(model.input_dim(), model.hidden_dim(), m), {}};
  Eigen::VectorXd d_out(static_cast<Eigen::Index>(2 * m));

  for (const auto& ex : batch) {
    const Activations a = run(model, ex.features);
    const auto n = static_cast<double>(ex.anchors.size());
    d_out.setZero();
    double lb = 0.0;
    double lv = 0.0;
    for (const auto& anchor : ex.anchors) {
      if (anchor.basis.size() != m) throw std::invalid_argument("loss: anchor basis size mismatch");
      const double eb = dot(a.out.data(), anchor.basis) - anchor.beta_target;
      const double ev = dot(a.out.data() + m, anchor.basis) - anchor.value_target;
      lb += eb * eb;
      lv += ev * ev;
      const double cb = 2.0 * eb / (n * s);
      const double cv = 2.0 * ev / (n * s);
      for (std::size_t j = 0; j < m; ++j) {
        d_out[static_cast<Eigen::Index>(j)] += cb * anchor.basis[j];
        d_out[static_cast<Eigen::Index>(m + j)] += cv * anchor.basis[j];
      }
    }
    g.loss.beta_term += lb / n;
    g.loss.value_term += lv / n;

    const Eigen::Map<const Eigen::VectorXd> x(ex.features.data(),
                                              static_cast<Eigen::Index>(ex.features.size()));
    g.grad.w2.noalias() += d_out * a.hidden.transpose();
    g.grad.b2 += d_out;
    const Eigen::VectorXd d_hidden =
        ((model.w2.transpose() * d_out).array() * (1.0 - a.hidden.array().square())).matrix();
    g.grad.w1.noalias() += d_hidden * x.transpose();
    g.grad.b1 += d_hidden;
  }
  g.loss.beta_term /= s;
  g.loss.value_term /= s;
  g.loss.total = g.loss.beta_term + g.loss.value_term;
  return g;
}

}  // namespace autobid
