#include "shellcap/quadform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "shellcap/error.hpp"

namespace shellcap {

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

QuadraticForm make_form(int dim, const Matrix& entries) {
  if (dim < 1 || entries.rows() != static_cast<std::size_t>(dim) ||
      entries.cols() != static_cast<std::size_t>(dim))
    throw Error(ErrorKind::DimensionMismatch, "form entries must be a dim x dim matrix");
  for (double v : entries.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite form entry");

  const std::size_t n = static_cast<std::size_t>(dim);
  const double scale = entries.max_abs();
  if (scale == 0.0) throw Error(ErrorKind::NotPositiveDefinite, "zero form");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(entries(i, j) - entries(j, i)) > 1e-12 * scale)
        throw Error(ErrorKind::NotSymmetric, "entries differ at (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ")");

  QuadraticForm q;
  q.dim_ = dim;
  q.coeffs_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q.coeffs_(i, j) = 0.5 * (entries(i, j) + entries(j, i));

  q.chol_ = Matrix(n, n);
  double logdet = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = q.coeffs_(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= q.chol_(j, k) * q.chol_(j, k);
    if (!(pivot > 1e-12 * scale))
      throw Error(ErrorKind::NotPositiveDefinite, "Cholesky pivot " + std::to_string(j) +
                                                      " is not positive");
    const double ljj = std::sqrt(pivot);
    q.chol_(j, j) = ljj;
    logdet += 2.0 * std::log(ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = q.coeffs_(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= q.chol_(i, k) * q.chol_(j, k);
      q.chol_(i, j) = s / ljj;
    }
  }
  q.det_ = std::exp(logdet);
  q.unit_volume_ = unit_ball_volume(dim) * std::exp(-0.5 * logdet);

  q.integer_coeffs_ = true;
  for (double v : q.coeffs_.data())
    if (v != std::round(v) || std::abs(v) > 1e9) q.integer_coeffs_ = false;
  return q;
}

QuadraticForm identity_form(int dim) {
  return make_form(dim, Matrix::identity(static_cast<std::size_t>(dim)));
}

QuadraticForm parse_form_matrix(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad form entry '" + item + "'");
    }
  }
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(values.size()))));
  if (d < 1 || static_cast<std::size_t>(d * d) != values.size())
    throw Error(ErrorKind::DimensionMismatch, "form matrix needs d*d entries, got " +
                                                  std::to_string(values.size()));
  Matrix m(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < values.size(); ++i) m(i / d, i % d) = values[i];
  return make_form(d, m);
}

bool QuadraticForm::is_identity() const {
  const auto n = static_cast<std::size_t>(dim_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (coeffs_(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

double QuadraticForm::eval(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw Error(ErrorKind::DimensionMismatch, "vector length does not match form dimension");
  const auto n = static_cast<std::size_t>(dim_);
  double s = 0.0;
  // (L^T x)_j = sum_{i >= j} L_ij x_i
  for (std::size_t j = 0; j < n; ++j) {
    double t = 0.0;
    for (std::size_t i = j; i < n; ++i) t += chol_(i, j) * x[i];
    s += t * t;
  }
  return s;
}

double QuadraticForm::sqrt_eval(std::span<const double> x) const { return std::sqrt(eval(x)); }

double QuadraticForm::eval_int(std::span<const std::int64_t> n) const {
  if (auto exact = eval_int_exact(n)) return static_cast<double>(*exact);
  const auto d = static_cast<std::size_t>(dim_);
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) {
    const double ni = static_cast<double>(n[i]);
    acc.add(coeffs_(i, i) * ni * ni);
    for (std::size_t j = i + 1; j < d; ++j)
      acc.add(2.0 * coeffs_(i, j) * ni * static_cast<double>(n[j]));
  }
  return acc.value();
}

std::optional<__int128> QuadraticForm::eval_int_exact(std::span<const std::int64_t> n) const {
  if (!integer_coeffs_) return std::nullopt;
  const auto d = static_cast<std::size_t>(dim_);
  __int128 s = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(n[i]) > (std::int64_t{1} << 40) || std::abs(n[j]) > (std::int64_t{1} << 40))
        return std::nullopt;
      s += static_cast<__int128>(static_cast<std::int64_t>(coeffs_(i, j))) * n[i] * n[j];
    }
  return s;
}

double QuadraticForm::condition_bound() const {
  double lo = chol_(0, 0), hi = chol_(0, 0);
  for (std::size_t i = 1; i < static_cast<std::size_t>(dim_); ++i) {
    lo = std::min(lo, chol_(i, i));
    hi = std::max(hi, chol_(i, i));
  }
  return hi / lo;
}

double eval_form(const QuadraticForm& q, std::span<const double> x) { return q.eval(x); }
double sqrt_form(const QuadraticForm& q, std::span<const double> x) { return q.sqrt_eval(x); }

std::string form_to_json(const QuadraticForm& q) {
  nlohmann::json j;
  j["dim"] = q.dim();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < static_cast<std::size_t>(q.dim()); ++i) {
    auto r = q.coeffs().row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["coeffs"] = rows;
  return j.dump();
}

}  // namespace shellcap
