#include "shellcap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shellcap/error.hpp"

namespace shellcap {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product");
  Matrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      for (std::size_t c = 0; c < other.cols_; ++c) out(r, c) += a * other(k, c);
    }
  return out;
}

RealVec Matrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
  RealVec out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = dot(row(r), x);
  return out;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

RealVec forward_substitute(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  RealVec x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= lower(i, j) * x[j];
    x[i] = s / lower(i, i);
  }
  return x;
}

RealVec back_substitute(const Matrix& upper, std::span<const double> b) {
  const std::size_t n = upper.rows();
  RealVec x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= upper(ii, j) * x[j];
    x[ii] = s / upper(ii, ii);
  }
  return x;
}

Matrix inverse(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw Error(ErrorKind::DimensionMismatch, "inverse of non-square matrix");
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw Error(ErrorKind::DegenerateInput, "singular matrix");
    if (piv != col)
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(piv, c), a(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
    const double p = a(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      a(col, c) /= p;
      inv(col, c) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

Matrix orthonormal_frame(std::span<const double> first) {
  const std::size_t n = first.size();
  Matrix frame(n, n);
  std::vector<RealVec> rows;
  RealVec u(first.begin(), first.end());
  const double nu = norm2(u);
  if (nu == 0.0) throw Error(ErrorKind::DegenerateInput, "zero frame direction");
  for (double& v : u) v /= nu;
  rows.push_back(u);
  // Standard basis vectors, least aligned with `first` first, for stability.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(u[a]) < std::abs(u[b]); });
  for (std::size_t e : order) {
    if (rows.size() == n) break;
    RealVec w(n, 0.0);
    w[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& r : rows) {
        const double c = dot(w, r);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * r[i];
      }
    const double nw = norm2(w);
    if (nw < 1e-8) continue;
    for (double& v : w) v /= nw;
    rows.push_back(std::move(w));
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) frame(r, c) = rows[r][c];
  return frame;
}

}  // namespace shellcap
