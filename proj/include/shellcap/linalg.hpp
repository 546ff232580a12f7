#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shellcap {

using IntVec = std::vector<std::int64_t>;
using RealVec = std::vector<double>;

/// Dense row-major matrix of doubles; only what the small d x d computations
/// in this library need.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& other) const;
  RealVec operator*(std::span<const double> x) const;

  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Neumaier-compensated accumulator; summation order is the caller's.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Solves L x = b for lower-triangular L.
RealVec forward_substitute(const Matrix& lower, std::span<const double> b);
/// Solves U x = b for upper-triangular U.
RealVec back_substitute(const Matrix& upper, std::span<const double> b);

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
Matrix inverse(const Matrix& m);

/// Orthonormal basis whose first row is `first` (normalized); remaining rows
/// come from Gram-Schmidt over the standard basis.
Matrix orthonormal_frame(std::span<const double> first);

}  // namespace shellcap
