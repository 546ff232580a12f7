#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "shellcap/linalg.hpp"

namespace shellcap {

/// Volume of the Euclidean unit ball in dimension d, pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// Positive-definite quadratic form Q(x) = sum_ij b_ij x_i x_j on R^d.
///
/// Immutable after construction. The coefficient matrix is stored symmetrized
/// and factored as coeffs = L L^T; 2*pi factors are absorbed into the
/// coefficients and never reintroduced.
class QuadraticForm {
 public:
  int dim() const { return dim_; }
  const Matrix& coeffs() const { return coeffs_; }
  /// Lower-triangular Cholesky factor.
  const Matrix& chol() const { return chol_; }
  double det() const { return det_; }
  /// Volume of {Q(x) < 1}.
  double unit_volume() const { return unit_volume_; }
  /// All coefficients are integers (after symmetrization).
  bool integer_coeffs() const { return integer_coeffs_; }
  bool is_identity() const;

  /// Q(x) computed as |L^T x|^2, hence never negative.
  double eval(std::span<const double> x) const;
  double sqrt_eval(std::span<const double> x) const;

  /// Q(n) for an integer vector from the coefficients directly (compensated).
  double eval_int(std::span<const std::int64_t> n) const;
  /// Exact Q(n) when the coefficients are integers and the value fits.
  std::optional<__int128> eval_int_exact(std::span<const std::int64_t> n) const;

  /// Ratio of extreme Cholesky pivots; bounds how far lattice coordinates can
  /// exceed lambda.
  double condition_bound() const;

  friend QuadraticForm make_form(int dim, const Matrix& entries);

 private:
  int dim_ = 0;
  Matrix coeffs_;
  Matrix chol_;
  double det_ = 0.0;
  double unit_volume_ = 0.0;
  bool integer_coeffs_ = false;
};

/// Validates, symmetrizes and factors a form.
/// Throws NotSymmetric, NotPositiveDefinite or DimensionMismatch.
QuadraticForm make_form(int dim, const Matrix& entries);
QuadraticForm identity_form(int dim);
/// Parses "b11,b12,...,bdd" (row-major); d is inferred from the entry count.
QuadraticForm parse_form_matrix(const std::string& text);

double eval_form(const QuadraticForm& q, std::span<const double> x);
double sqrt_form(const QuadraticForm& q, std::span<const double> x);

std::string form_to_json(const QuadraticForm& q);

}  // namespace shellcap
