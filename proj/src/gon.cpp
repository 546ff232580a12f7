#include "shellcap/gon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "shellcap/error.hpp"

namespace shellcap {

namespace {

using boost::multiprecision::cpp_int;

Matrix gram_of(const Matrix& a) { return a.transpose() * a; }

double gram_ip(const Matrix& g, const IntVec& x, const IntVec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) s += static_cast<double>(x[i]) * g(i, j) * static_cast<double>(y[j]);
  }
  return s;
}

/// Visits every integer x with x^T G x <= radius_sq (with a small slack).
class ShortVectorSearch {
 public:
  ShortVectorSearch(const Matrix& gram, double radius_sq, std::size_t budget)
      : d_(static_cast<int>(gram.rows())), budget_(budget), radius_sq_(radius_sq * (1.0 + 1e-9) + 1e-12) {
    // Cholesky G = L L^T; traverse with the upper factor U = L^T.
    Matrix l(gram.rows(), gram.cols());
    for (std::size_t j = 0; j < gram.rows(); ++j) {
      double p = gram(j, j);
      for (std::size_t k = 0; k < j; ++k) p -= l(j, k) * l(j, k);
      if (!(p > 0.0)) throw Error(ErrorKind::DegenerateInput, "theta-norm Gram matrix not positive definite");
      l(j, j) = std::sqrt(p);
      for (std::size_t i = j + 1; i < gram.rows(); ++i) {
        double s = gram(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / l(j, j);
      }
    }
    upper_ = l.transpose();
  }

  void run(const std::function<void(const IntVec&)>& fn) {
    IntVec x(static_cast<std::size_t>(d_), 0);
    recurse(d_ - 1, 0.0, x, fn);
  }

 private:
  void recurse(int level, double partial, IntVec& x, const std::function<void(const IntVec&)>& fn) {
    if (++nodes_ > budget_) throw Error(ErrorKind::SearchBudgetExceeded, "short vector search exceeded budget");
    const auto li = static_cast<std::size_t>(level);
    double s = 0.0;
    for (int j = level + 1; j < d_; ++j) s += upper_(li, static_cast<std::size_t>(j)) * static_cast<double>(x[static_cast<std::size_t>(j)]);
    const double c = -s / upper_(li, li);
    const double r = std::sqrt(std::max(radius_sq_ - partial, 0.0)) / upper_(li, li);
    const auto lo = static_cast<std::int64_t>(std::ceil(c - r - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(c + r + 1e-9));
    if (hi - lo > (std::int64_t{1} << 30)) throw Error(ErrorKind::Overflow, "short vector range too wide");
    for (std::int64_t v = lo; v <= hi; ++v) {
      x[li] = v;
      const double t = upper_(li, li) * (static_cast<double>(v) - c);
      const double p = partial + t * t;
      if (p > radius_sq_) continue;
      if (level == 0)
        fn(x);
      else
        recurse(level - 1, p, x, fn);
    }
    x[li] = 0;
  }

  int d_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  double radius_sq_;
  Matrix upper_;
};

template <typename T>
T bareiss(std::vector<std::vector<T>> m, bool& overflow) {
  const std::size_t n = m.size();
  if (n == 0) return T(1);
  T sign = 1;
  T prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && m[r][k] == 0) ++r;
      if (r == n) return T(0);
      std::swap(m[k], m[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        if constexpr (std::is_same_v<T, __int128>) {
          __int128 a, b;
          if (__builtin_mul_overflow(m[i][j], m[k][k], &a) || __builtin_mul_overflow(m[i][k], m[k][j], &b)) {
            overflow = true;
            return 0;
          }
          __int128 diff;
          if (__builtin_sub_overflow(a, b, &diff)) {
            overflow = true;
            return 0;
          }
          m[i][j] = diff / prev;
        } else {
          m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        }
      }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

/// Exact determinant as a big integer: 128-bit Bareiss, arbitrary precision on overflow.
cpp_int big_determinant(const std::vector<IntVec>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::vector<__int128>> a(n, std::vector<__int128>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = rows[i][j];
  bool overflow = false;
  const __int128 v = bareiss(a, overflow);
  if (!overflow) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    cpp_int out = static_cast<std::uint64_t>(u >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(u);
    return neg ? cpp_int(-out) : out;
  }
  std::vector<std::vector<cpp_int>> b(n, std::vector<cpp_int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b[i][j] = rows[i][j];
  bool unused = false;
  return bareiss(b, unused);
}

std::int64_t to_int64(const cpp_int& v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw Error(ErrorKind::Overflow, "integer result exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw Error(ErrorKind::Overflow, "basis coordinate exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

/// Exact rank test: is `cand` independent of `chosen`?
bool independent(const std::vector<IntVec>& chosen, const IntVec& cand) {
  std::vector<IntVec> rows = chosen;
  rows.push_back(cand);
  const std::size_t k = rows.size();
  const std::size_t d = cand.size();
  // rank == k iff some k x k minor is nonzero; d <= 8 keeps this cheap, but
  // fraction-free elimination is simpler: rank of rows via Bareiss on a copy.
  std::vector<std::vector<cpp_int>> m(k, std::vector<cpp_int>(d));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) m[i][j] = rows[i][j];
  std::size_t rank = 0;
  cpp_int prev = 1;
  for (std::size_t col = 0; col < d && rank < k; ++col) {
    std::size_t piv = rank;
    while (piv < k && m[piv][col] == 0) ++piv;
    if (piv == k) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t i = rank + 1; i < k; ++i) {
      for (std::size_t j = col + 1; j < d; ++j)
        m[i][j] = (m[i][j] * m[rank][col] - m[i][col] * m[rank][j]) / prev;
      m[i][col] = 0;
    }
    prev = m[rank][col];
    ++rank;
  }
  return rank == k;
}

IntVec canonical_sign(IntVec x) {
  for (auto c : x) {
    if (c == 0) continue;
    if (c < 0)
      for (auto& v : x) v = -v;
    break;
  }
  return x;
}

}  // namespace

ThetaNorm::ThetaNorm(Matrix frame, RealVec half_widths)
    : frame_(std::move(frame)), half_widths_(std::move(half_widths)) {
  const std::size_t d = half_widths_.size();
  if (frame_.rows() != d || frame_.cols() != d)
    throw Error(ErrorKind::DimensionMismatch, "frame and half-widths disagree");
  box_map_ = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(half_widths_[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "half-widths must be positive");
    for (std::size_t j = 0; j < d; ++j) box_map_(i, j) = frame_(i, j) / half_widths_[i];
  }
}

ThetaNorm ThetaNorm::axis_box(RealVec half_widths) {
  const std::size_t d = half_widths.size();
  return ThetaNorm(Matrix::identity(d), std::move(half_widths));
}

ThetaNorm ThetaNorm::for_cap(const Cap& cap) { return ThetaNorm(orthonormal_frame(cap.normal), cap.half_widths); }

double ThetaNorm::operator()(std::span<const double> x) const {
  if (x.size() != half_widths_.size()) throw Error(ErrorKind::DimensionMismatch, "theta-norm argument");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(dot(box_map_.row(i), x)));
  return m;
}

double ThetaNorm::operator()(std::span<const std::int64_t> x) const {
  RealVec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<double>(x[i]);
  return (*this)(std::span<const double>(y));
}

double theta_norm(const ThetaNorm& norm, std::span<const double> x) { return norm(x); }

std::vector<IntVec> lll_reduce(std::vector<IntVec> b, const Matrix& gram, double factor) {
  const std::size_t n = b.size();
  if (n < 2) return b;
  std::vector<std::vector<double>> mu(n, std::vector<double>(n, 0.0));
  std::vector<double> bstar(n, 0.0);
  auto gso = [&] {
    std::vector<RealVec> coeff(n);  // b*_i in terms of the b_j, via mu
    for (std::size_t i = 0; i < n; ++i) {
      double bi = gram_ip(gram, b[i], b[i]);
      for (std::size_t j = 0; j < i; ++j) {
        double s = gram_ip(gram, b[i], b[j]);
        for (std::size_t k = 0; k < j; ++k) s -= mu[j][k] * mu[i][k] * bstar[k];
        mu[i][j] = s / bstar[j];
        bi -= mu[i][j] * mu[i][j] * bstar[j];
      }
      bstar[i] = bi;
    }
  };
  gso();
  std::size_t k = 1;
  std::size_t guard = 0;
  while (k < n) {
    if (++guard > 100000) throw Error(ErrorKind::SearchBudgetExceeded, "LLL did not converge");
    for (std::size_t jj = k; jj-- > 0;) {
      const double q = std::round(mu[k][jj]);
      if (q == 0.0) continue;
      const auto qi = static_cast<std::int64_t>(q);
      for (std::size_t t = 0; t < b[k].size(); ++t) b[k][t] -= qi * b[jj][t];
      gso();
    }
    if (bstar[k] >= (factor - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      gso();
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return b;
}

Minima successive_minima(const ThetaNorm& norm, std::size_t budget) {
  const int d = norm.dim();
  if (d < 1 || d > 8) throw Error(ErrorKind::InvalidArgument, "successive minima support d <= 8");
  const Matrix gram = gram_of(norm.box_map());
  std::vector<IntVec> basis(static_cast<std::size_t>(d), IntVec(static_cast<std::size_t>(d), 0));
  for (int i = 0; i < d; ++i) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  basis = lll_reduce(std::move(basis), gram);

  Minima out;
  if (d > 4) {
    std::sort(basis.begin(), basis.end(), [&](const IntVec& a, const IntVec& b) { return norm(a) < norm(b); });
    for (auto& v : basis) {
      out.values.push_back(norm(v));
      out.witnesses.push_back(canonical_sign(v));
    }
    out.exact = false;
    return out;
  }

  double bound = 0.0;
  for (const auto& v : basis) bound = std::max(bound, norm(v));
  struct Cand {
    double n;
    IntVec x;
  };
  std::vector<Cand> cands;
  ShortVectorSearch search(gram, d * bound * bound, budget);
  search.run([&](const IntVec& x) {
    bool zero = true, positive = false;
    for (auto c : x)
      if (c != 0) {
        if (zero) positive = c > 0;
        zero = false;
      }
    if (zero || !positive) return;
    const double v = norm(x);
    if (v <= bound * (1.0 + 1e-12)) cands.push_back({v, x});
  });
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.n != b.n) return a.n < b.n;
    return a.x < b.x;
  });
  for (const auto& c : cands) {
    if (out.witnesses.size() == static_cast<std::size_t>(d)) break;
    if (independent(out.witnesses, c.x)) {
      out.witnesses.push_back(c.x);
      out.values.push_back(c.n);
    }
  }
  if (out.witnesses.size() != static_cast<std::size_t>(d))
    throw Error(ErrorKind::DegenerateInput, "minima search found too few independent vectors");
  return out;
}

std::vector<IntVec> adapted_basis(const std::vector<IntVec>& witnesses, const ThetaNorm& norm) {
  const std::size_t d = witnesses.size();
  // w[r][c] = coordinate r of witness c; x holds the basis as columns.
  std::vector<std::vector<__int128>> w(d, std::vector<__int128>(d)), x(d, std::vector<__int128>(d, 0));
  for (std::size_t r = 0; r < d; ++r) {
    x[r][r] = 1;
    for (std::size_t c = 0; c < d; ++c) w[r][c] = witnesses[c][r];
  }
  // Unimodular row operations E on w bring it to upper-triangular form; the
  // basis absorbs E^{-1} as column operations so that witnesses = x * w.
  for (std::size_t col = 0; col < d; ++col) {
    for (std::size_t r = col + 1; r < d; ++r) {
      while (w[r][col] != 0) {
        const __int128 a = w[col][col], b = w[r][col];
        if (a == 0) {
          std::swap(w[col], w[r]);
          for (std::size_t i = 0; i < d; ++i) std::swap(x[i][col], x[i][r]);
          continue;
        }
        // Extended Euclid on (a, b).
        __int128 old_r = a, rr = b, old_s = 1, s = 0, old_t = 0, t = 1;
        while (rr != 0) {
          const __int128 q = old_r / rr;
          __int128 tmp = old_r - q * rr;
          old_r = rr;
          rr = tmp;
          tmp = old_s - q * s;
          old_s = s;
          s = tmp;
          tmp = old_t - q * t;
          old_t = t;
          t = tmp;
        }
        const __int128 g = old_r, sa = old_s, tb = old_t;  // sa*a + tb*b = g
        const __int128 ag = a / g, bg = b / g;
        for (std::size_t c = 0; c < d; ++c) {
          const __int128 top = sa * w[col][c] + tb * w[r][c];
          const __int128 bottom = -bg * w[col][c] + ag * w[r][c];
          w[col][c] = top;
          w[r][c] = bottom;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const __int128 p = x[i][col] * ag + x[i][r] * bg;
          const __int128 q = -x[i][col] * tb + x[i][r] * sa;
          x[i][col] = p;
          x[i][r] = q;
        }
      }
    }
  }
  std::vector<IntVec> basis(d, IntVec(d));
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < d; ++r) basis[c][r] = checked(x[r][c]);

  // Size reduction keeps span(x1..xi) and unimodularity.
  const Matrix& a = norm.box_map();
  auto image = [&](const IntVec& v) { return a * std::span<const double>(RealVec(v.begin(), v.end())); };
  for (std::size_t i = 1; i < d; ++i) {
    for (int iter = 0; iter < 64; ++iter) {
      bool improved = false;
      for (std::size_t j = i; j-- > 0;) {
        const RealVec ai = image(basis[i]), aj = image(basis[j]);
        const double c = dot(ai, aj) / dot(aj, aj);
        double best = norm(basis[i]);
        std::int64_t best_k = 0;
        const auto lo = static_cast<std::int64_t>(std::floor(c)) - 1;
        for (std::int64_t k = lo; k <= lo + 3; ++k) {
          if (k == 0) continue;
          IntVec t = basis[i];
          for (std::size_t m = 0; m < d; ++m) t[m] -= k * basis[j][m];
          const double v = norm(t);
          if (v < best * (1.0 - 1e-12)) {
            best = v;
            best_k = k;
          }
        }
        if (best_k != 0) {
          for (std::size_t m = 0; m < d; ++m) basis[i][m] -= best_k * basis[j][m];
          improved = true;
        }
      }
      if (!improved) break;
    }
  }
  return basis;
}

std::vector<IntVec> reduced_basis(const ThetaNorm& norm, std::size_t budget) {
  return adapted_basis(successive_minima(norm, budget).witnesses, norm);
}

int rank_from_minima(const RealVec& minima) {
  int r = 0;
  for (double m : minima)
    if (m <= 1.0 + 1e-12) ++r;
  return r;
}

int cap_rank(const ThetaNorm& norm, std::size_t budget) {
  return rank_from_minima(successive_minima(norm, budget).values);
}

std::int64_t exact_determinant(const std::vector<IntVec>& rows) {
  for (const auto& r : rows)
    if (r.size() != rows.size()) throw Error(ErrorKind::DimensionMismatch, "determinant of non-square matrix");
  return to_int64(big_determinant(rows));
}

IntVec wedge_vector(const std::vector<IntVec>& vectors) {
  const std::size_t k = vectors.size();
  const std::size_t d = k + 1;
  for (const auto& v : vectors) {
    if (v.size() != d) throw Error(ErrorKind::DimensionMismatch, "wedge needs d-1 vectors of length d");
    for (auto c : v)
      if (std::abs(c) >= (std::int64_t{1} << 20)) throw Error(ErrorKind::Overflow, "wedge input coordinate >= 2^20");
  }
  IntVec out(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<IntVec> minor(k, IntVec(k));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0, cc = 0; c < d; ++c) {
        if (c == i) continue;
        minor[r][cc++] = vectors[r][c];
      }
    const cpp_int m = big_determinant(minor);
    out[i] = to_int64(i % 2 == 0 ? m : cpp_int(-m));
  }
  return out;
}

std::size_t count_in_box(const ThetaNorm& norm, double radius, std::size_t budget) {
  const Matrix gram = gram_of(norm.box_map());
  std::size_t n = 0;
  ShortVectorSearch search(gram, norm.dim() * radius * radius, budget);
  search.run([&](const IntVec& x) {
    if (norm(x) <= radius * (1.0 + 1e-12)) ++n;
  });
  return n;
}

Step2Audit audit_step2(const Cap& cap, const ShellSpec& spec, const CapLattice& lat) {
  const int d = static_cast<int>(cap.normal.size());
  if (lat.r_theta < 1 || lat.r_theta >= d)
    throw Error(ErrorKind::RankOutOfRange, "r_theta = " + std::to_string(lat.r_theta));
  const double lambda = spec.lambda, delta = spec.delta;
  const double cap_scale = std::sqrt(lambda * delta);
  const double base =
      std::pow(delta * std::pow(cap_scale, d - 1) / static_cast<double>(lat.box_count), 1.0 / (d - lat.r_theta));
  RealVec v(lat.wedge.begin(), lat.wedge.end());
  const double vn = norm2(v);
  if (vn == 0.0) throw Error(ErrorKind::DegenerateInput, "zero wedge vector");
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = v[i] / vn;
    plus += (cap.normal[i] - u) * (cap.normal[i] - u);
    minus += (cap.normal[i] + u) * (cap.normal[i] + u);
  }
  const double angle = std::sqrt(std::min(plus, minus));
  Step2Audit a;
  a.size_ratio = vn / (base / delta);
  a.angle_ratio = angle / (base / (cap_scale * vn));
  return a;
}

CapLattice analyze_cap(const Cap& cap, const ShellSpec& spec, std::size_t budget) {
  const ThetaNorm norm = ThetaNorm::for_cap(cap);
  const int d = norm.dim();
  CapLattice lat;
  lat.cap_id = cap.id;
  lat.minima = successive_minima(norm, budget);
  lat.basis = adapted_basis(lat.minima.witnesses, norm);
  lat.r_theta = rank_from_minima(lat.minima.values);
  lat.wedge = wedge_vector(std::vector<IntVec>(lat.basis.begin(), lat.basis.end() - 1));
  lat.basis_det = exact_determinant(lat.basis);
  lat.box_count = count_in_box(norm, 1.0, budget);
  double prod = 1.0, hw = 1.0, partial = 1.0;
  for (int i = 0; i < d; ++i) {
    prod *= lat.minima.values[static_cast<std::size_t>(i)];
    hw *= norm.half_widths()[static_cast<std::size_t>(i)];
    if (i < lat.r_theta) partial *= lat.minima.values[static_cast<std::size_t>(i)];
  }
  lat.minkowski_product = prod * hw;
  lat.step1_ratio = static_cast<double>(lat.box_count) * partial;
  if (lat.r_theta >= 1 && lat.r_theta < d) lat.step2 = audit_step2(cap, spec, lat);
  return lat;
}

std::vector<CapLattice> analyze_caps(const CapDecomposition& decomp, std::size_t budget) {
  std::vector<const Cap*> populated;
  for (const Cap& c : decomp.caps)
    if (c.n_theta() > 0) populated.push_back(&c);
  std::vector<CapLattice> out(populated.size());
  std::vector<std::exception_ptr> errors(populated.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < populated.size(); ++i) {
    try {
      out[i] = analyze_cap(*populated[i], decomp.spec, budget);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace shellcap
