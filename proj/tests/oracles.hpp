#pragma once

// Independent brute-force oracles. They share no code with the library's
// enumeration, reduction or norm kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using Point = std::vector<std::int64_t>;

/// Visits every point of the box [-b, b]^d.
inline void box(int d, std::int64_t b, const std::function<void(const Point&)>& fn) {
  Point x(static_cast<std::size_t>(d), -b);
  while (true) {
    fn(x);
    int i = 0;
    while (i < d && x[static_cast<std::size_t>(i)] == b) x[static_cast<std::size_t>(i++)] = -b;
    if (i == d) return;
    ++x[static_cast<std::size_t>(i)];
  }
}

/// Q(n) for an integer coefficient matrix (row-major), exact.
inline std::int64_t form_value(const std::vector<std::int64_t>& coeffs, const Point& n) {
  const std::size_t d = n.size();
  std::int64_t s = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s += coeffs[i * d + j] * n[i] * n[j];
  return s;
}

inline std::vector<std::int64_t> identity_coeffs(int d) {
  std::vector<std::int64_t> c(static_cast<std::size_t>(d * d), 0);
  for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i * d + i)] = 1;
  return c;
}

/// #{n in [-b,b]^d : Q(n) < r2} with r2 given as a long double (exact for the
/// test radii used, which are chosen away from representability issues).
inline std::int64_t ball_count(const std::vector<std::int64_t>& coeffs, int d, std::int64_t b,
                               long double r2) {
  std::int64_t n = 0;
  box(d, b, [&](const Point& x) {
    if (static_cast<long double>(form_value(coeffs, x)) < r2) ++n;
  });
  return n;
}

/// Lexicographically sorted shell points lo2 <= Q(n) < hi2.
inline std::vector<Point> shell_points(const std::vector<std::int64_t>& coeffs, int d,
                                       std::int64_t b, long double lo2, long double hi2) {
  std::vector<Point> out;
  box(d, b, [&](const Point& x) {
    const auto v = static_cast<long double>(form_value(coeffs, x));
    if (v >= lo2 && v < hi2) out.push_back(x);
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// Number of ordered quadruples (a, b, c, e) with a + b = c + e.
inline std::int64_t additive_energy(const std::vector<Point>& pts) {
  std::int64_t n = 0;
  const std::size_t m = pts.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t e = 0; e < m; ++e) {
          bool eq = true;
          for (std::size_t k = 0; k < pts[a].size() && eq; ++k)
            eq = pts[a][k] + pts[b][k] == pts[c][k] + pts[e][k];
          if (eq) ++n;
        }
  return n;
}

/// ||f||_4^4 from the coefficient map by direct pair-sum convolution.
inline double l4_fourth(const std::map<Point, std::complex<double>>& coeffs) {
  std::map<Point, std::complex<double>> sums;
  for (const auto& [k1, a1] : coeffs)
    for (const auto& [k2, a2] : coeffs) {
      Point s(k1.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = k1[i] + k2[i];
      sums[s] += a1 * a2;
    }
  double t = 0.0;
  for (const auto& [s, v] : sums) t += std::norm(v);
  return t;
}

/// Least-squares slope of y on x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
