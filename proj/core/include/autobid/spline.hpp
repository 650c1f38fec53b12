#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace autobid {

/// Clamped uniform B-spline on the normalized domain [0, 1].
///
/// `num_grid` points split [0, 1] into num_grid - 1 equal spans; end knots are
/// repeated degree + 1 times, giving num_grid + degree - 1 basis functions.
/// Outside [0, 1] the curve continues linearly with the boundary value and
/// slope, so evaluation stays linear in the control points everywhere.
class SplineBasis {
 public:
  SplineBasis(int degree, std::size_t num_grid);

  int degree() const { return degree_; }
  std::size_t num_grid() const { return num_grid_; }
  std::size_t num_basis() const { return num_grid_ + static_cast<std::size_t>(degree_) - 1; }
  const std::vector<double>& knots() const { return knots_; }
  std::vector<double> grid() const;

  /// Index of the knot span containing x in [0, 1] (x = 1 maps to the last span).
  std::size_t find_span(double x) const;

  /// b_j(x) for every basis function, extension included.
  std::vector<double> basis(double x) const;
  /// d b_j / dx, extension included (constant outside [0, 1]).
  std::vector<double> basis_derivative(double x) const;

  /// Writes basis(x) into `out` (size num_basis()) without allocating the result.
  void basis_into(double x, std::span<double> out) const;

 private:
  // Nonzero basis functions of degree p on `span` at x in [0, 1].
  void nonzero_basis(std::size_t span, double x, int p, std::span<double> out) const;
  void inside_basis(double x, std::span<double> out) const;
  void inside_derivative(double x, std::span<double> out) const;

  int degree_;
  std::size_t num_grid_;
  std::vector<double> knots_;
};

class SplineCurve {
 public:
  SplineCurve(int degree, std::size_t num_grid, std::vector<double> control_points);
  SplineCurve(SplineBasis basis, std::vector<double> control_points);

  const SplineBasis& basis() const { return basis_; }
  int degree() const { return basis_.degree(); }
  std::span<const double> control_points() const { return control_points_; }

  double eval(double x) const;
  double eval_derivative(double x) const;
  /// d eval(x) / d control_points, i.e. basis(x).
  std::vector<double> grad_control_points(double x) const;

 private:
  SplineBasis basis_;
  std::vector<double> control_points_;
};

/// {degree, grid, control_points, b_scale}
std::string spline_to_json(const SplineCurve& curve, double b_scale);
SplineCurve spline_from_json(const std::string& text, double* b_scale = nullptr);

}  // namespace autobid
