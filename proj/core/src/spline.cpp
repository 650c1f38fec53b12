#include "autobid/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace autobid {

SplineBasis::SplineBasis(int degree, std::size_t num_grid) : degree_(degree), num_grid_(num_grid) {
  if (degree < 1 || degree > 15) throw std::invalid_argument("SplineBasis: degree must be in [1, 15]");
  if (num_grid < 2) throw std::invalid_argument("SplineBasis: need at least 2 grid points");
  const auto k = static_cast<std::size_t>(degree);
  knots_.reserve(num_grid + 2 * k);
  knots_.insert(knots_.end(), k, 0.0);
  for (std::size_t i = 0; i < num_grid; ++i)
    knots_.push_back(static_cast<double>(i) / static_cast<double>(num_grid - 1));
  knots_.back() = 1.0;
  knots_.insert(knots_.end(), k, 1.0);
}

std::vector<double> SplineBasis::grid() const {
  const auto k = static_cast<std::size_t>(degree_);
  return {knots_.begin() + static_cast<std::ptrdiff_t>(k),
          knots_.begin() + static_cast<std::ptrdiff_t>(k + num_grid_)};
}

std::size_t SplineBasis::find_span(double x) const {
  const auto k = static_cast<std::size_t>(degree_);
  const std::size_t n = num_basis();
  if (x >= 1.0) return n - 1;
  if (x <= 0.0) return k;
  // Uniform interior knots: direct index, then guard against rounding.
  auto span = k + static_cast<std::size_t>(std::floor(x * static_cast<double>(num_grid_ - 1)));
  span = std::clamp(span, k, n - 1);
  while (span > k && x < knots_[span]) --span;
  while (span < n - 1 && x >= knots_[span + 1]) ++span;
  return span;
}

void SplineBasis::nonzero_basis(std::size_t span, double x, int p, std::span<double> out) const {
  // Cox-de Boor triangle; out[r] = N_{span-p+r, p}(x).
  double left[16];
  double right[16];
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - static_cast<std::size_t>(j)];
    right[j] = knots_[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void SplineBasis::inside_basis(double x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t span = find_span(x);
  double local[16];
  nonzero_basis(span, x, degree_, local);
  const std::size_t first = span - static_cast<std::size_t>(degree_);
  for (int r = 0; r <= degree_; ++r) out[first + static_cast<std::size_t>(r)] = local[r];
}

void SplineBasis::inside_derivative(double x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t span = find_span(x);
  const int k = degree_;
  double lower[16];
  nonzero_basis(span, x, k - 1, lower);  // lower[r] = N_{span-k+1+r, k-1}
  const std::size_t first = span - static_cast<std::size_t>(k);
  auto lower_at = [&](std::size_t j) -> double {
    // N_{j, k-1} on this span; nonzero only for span-k+1 <= j <= span.
    if (j + static_cast<std::size_t>(k) < span + 1 || j > span) return 0.0;
    return lower[j - (span + 1 - static_cast<std::size_t>(k))];
  };
  for (std::size_t j = first; j <= span; ++j) {
    double d = 0.0;
    const double a = knots_[j + static_cast<std::size_t>(k)] - knots_[j];
    if (a > 0.0) d += k / a * lower_at(j);
    const double b = knots_[j + static_cast<std::size_t>(k) + 1] - knots_[j + 1];
    if (b > 0.0) d -= k / b * lower_at(j + 1);
    out[j] = d;
  }
}

void SplineBasis::basis_into(double x, std::span<double> out) const {
  if (!std::isfinite(x)) throw std::invalid_argument("SplineBasis: x must be finite");
  if (out.size() != num_basis()) throw std::invalid_argument("SplineBasis: output size mismatch");
  if (x >= 0.0 && x <= 1.0) {
    inside_basis(x, out);
    return;
  }
  const double edge = x < 0.0 ? 0.0 : 1.0;
  std::vector<double> slope(num_basis());
  inside_basis(edge, out);
  inside_derivative(edge, slope);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += (x - edge) * slope[j];
}

std::vector<double> SplineBasis::basis(double x) const {
  std::vector<double> out(num_basis());
  basis_into(x, out);
  return out;
}

std::vector<double> SplineBasis::basis_derivative(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("SplineBasis: x must be finite");
  std::vector<double> out(num_basis());
  inside_derivative(std::clamp(x, 0.0, 1.0), out);
  return out;
}

SplineCurve::SplineCurve(int degree, std::size_t num_grid, std::vector<double> control_points)
    : SplineCurve(SplineBasis(degree, num_grid), std::move(control_points)) {}

SplineCurve::SplineCurve(SplineBasis basis, std::vector<double> control_points)
    : basis_(std::move(basis)), control_points_(std::move(control_points)) {
  if (control_points_.size() != basis_.num_basis())
    throw std::invalid_argument("SplineCurve: expected " + std::to_string(basis_.num_basis()) +
                                " control points, got " + std::to_string(control_points_.size()));
}

double SplineCurve::eval(double x) const {
  const auto b = basis_.basis(x);
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * control_points_[j];
  return s;
}

double SplineCurve::eval_derivative(double x) const {
  const auto d = basis_.basis_derivative(x);
  double s = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * control_points_[j];
  return s;
}

std::vector<double> SplineCurve::grad_control_points(double x) const { return basis_.basis(x); }

std::string spline_to_json(const SplineCurve& curve, double b_scale) {
  nlohmann::json j;
  j["degree"] = curve.degree();
  j["grid"] = curve.basis().grid();
  j["control_points"] = std::vector<double>(curve.control_points().begin(),
                                            curve.control_points().end());
  j["b_scale"] = b_scale;
  return j.dump();
}

SplineCurve spline_from_json(const std::string& text, double* b_scale) {
  const auto j = nlohmann::json::parse(text);
  const auto grid = j.at("grid").get<std::vector<double>>();
  if (b_scale) *b_scale = j.value("b_scale", 1.0);
  return SplineCurve(j.at("degree").get<int>(), grid.size(),
                     j.at("control_points").get<std::vector<double>>());
}

}  // namespace autobid
