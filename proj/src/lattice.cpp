#include "shellcap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>
#include <omp.h>

#include "shellcap/error.hpp"

namespace shellcap {

namespace {

using boost::multiprecision::cpp_rational;

constexpr double kMaxCoordinate = 1099511627776.0;  // 2^40

/// Exact predicate Q(n) < radius^2 for a radius given as an exact double
/// expression. Decided in floating point outside a guard band, by exact
/// rational arithmetic inside it.
class RadiusTest {
 public:
  RadiusTest(const QuadraticForm& q, cpp_rational radius, double lambda_scale)
      : q_(q), radius_sq_(radius * radius) {
    const double r = static_cast<double>(radius);
    threshold_ = r * r;
    guard_ = 2e-9 * lambda_scale * r + 1e-14 * threshold_ + 1e-300;
  }

  double threshold() const { return threshold_; }

  bool below(std::span<const std::int64_t> n, std::size_t& exact_count) const {
    if (auto exact = q_.eval_int_exact(n)) {
      const __int128 v = *exact;
      if (static_cast<double>(v) + 1.0 < threshold_) return true;
      if (static_cast<double>(v) - 1.0 > threshold_) return false;
      ++exact_count;
      return cpp_rational(static_cast<long long>(v)) < radius_sq_;
    }
    const double v = q_.eval_int(n);
    if (v < threshold_ - guard_) return true;
    if (v > threshold_ + guard_) return false;
    ++exact_count;
    return exact_value(n) < radius_sq_;
  }

 private:
  cpp_rational exact_value(std::span<const std::int64_t> n) const {
    const auto d = static_cast<std::size_t>(q_.dim());
    cpp_rational s = 0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        s += cpp_rational(q_.coeffs()(i, j)) * cpp_rational(static_cast<long long>(n[i])) *
             cpp_rational(static_cast<long long>(n[j]));
    return s;
  }

  const QuadraticForm& q_;
  cpp_rational radius_sq_;
  double threshold_ = 0.0;
  double guard_ = 0.0;
};

/// Fincke-Pohst style traversal with the upper factor R = L^T, so that
/// Q(x) = sum_i R_ii^2 (x_i - c_i)^2 with c_i depending on x_{i+1..d-1}.
class RowEnumerator {
 public:
  using RowFn = std::function<void(std::vector<std::int64_t>&, double center, double rem)>;

  RowEnumerator(const QuadraticForm& q, double threshold)
      : d_(q.dim()), upper_(q.chol().transpose()), threshold_(threshold) {}

  /// Candidate values of the outermost coordinate (ascending).
  std::vector<std::int64_t> top_values() const {
    if (d_ == 1) return {0};
    const int top = d_ - 1;
    const double r = std::sqrt(threshold_) / upper_(top, top);
    const double span = r * (1.0 + 1e-9) + 1e-9;
    if (span > kMaxCoordinate) throw Error(ErrorKind::Overflow, "coordinate bound exceeds 2^40");
    const auto lo = static_cast<std::int64_t>(std::floor(-span));
    const auto hi = static_cast<std::int64_t>(std::ceil(span));
    std::vector<std::int64_t> out;
    for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }

  /// Visits every innermost row below a fixed outermost coordinate.
  void visit(std::int64_t top_value, const RowFn& fn) const {
    std::vector<std::int64_t> x(static_cast<std::size_t>(d_), 0);
    if (d_ == 1) {
      fn(x, 0.0, threshold_);
      return;
    }
    const int top = d_ - 1;
    x[static_cast<std::size_t>(top)] = top_value;
    const double t = upper_(top, top) * static_cast<double>(top_value);
    const double partial = t * t;
    if (partial > threshold_ * (1.0 + 1e-9) + 1e-9) return;
    recurse(top - 1, partial, x, fn);
  }

 private:
  double center(int level, const std::vector<std::int64_t>& x) const {
    double s = 0.0;
    for (int j = level + 1; j < d_; ++j)
      s += upper_(static_cast<std::size_t>(level), static_cast<std::size_t>(j)) *
           static_cast<double>(x[static_cast<std::size_t>(j)]);
    return -s / upper_(static_cast<std::size_t>(level), static_cast<std::size_t>(level));
  }

  void recurse(int level, double partial, std::vector<std::int64_t>& x, const RowFn& fn) const {
    const double c = center(level, x);
    const double rem = threshold_ - partial;
    if (level == 0) {
      fn(x, c, rem);
      return;
    }
    const double rii = upper_(static_cast<std::size_t>(level), static_cast<std::size_t>(level));
    const double r = std::sqrt(std::max(rem, 0.0)) / rii;
    const double slack = r * 1e-9 + 1e-9 * (1.0 + std::abs(c));
    const auto lo = static_cast<std::int64_t>(std::ceil(c - r - slack));
    const auto hi = static_cast<std::int64_t>(std::floor(c + r + slack));
    for (std::int64_t v = lo; v <= hi; ++v) {
      x[static_cast<std::size_t>(level)] = v;
      const double t = rii * (static_cast<double>(v) - c);
      recurse(level - 1, partial + t * t, x, fn);
    }
    x[static_cast<std::size_t>(level)] = 0;
  }

  int d_;
  Matrix upper_;
  double threshold_;
};

struct Interval {
  std::int64_t lo = 1;
  std::int64_t hi = 0;
  bool empty() const { return lo > hi; }
};

/// Exact interval {x_0 : Q(x) < r^2} on one row, from an approximate center
/// and squared half-width. The set is an interval because Q is convex in x_0.
Interval row_interval(std::vector<std::int64_t>& x, double center, double rem, double r00,
                      const RadiusTest& test, std::size_t& exact_count) {
  auto inside = [&](std::int64_t v) {
    x[0] = v;
    return test.below(x, exact_count);
  };
  const double half = std::sqrt(std::max(rem, 0.0)) / r00;
  Interval iv;
  iv.lo = static_cast<std::int64_t>(std::ceil(center - half));
  iv.hi = static_cast<std::int64_t>(std::floor(center + half));
  if (iv.lo > iv.hi) {
    // Empty in floating point; the nearest integer may still qualify.
    const auto c = static_cast<std::int64_t>(std::llround(center));
    if (!inside(c)) return {};
    iv.lo = iv.hi = c;
  }
  while (iv.lo <= iv.hi && !inside(iv.lo)) ++iv.lo;
  if (iv.empty()) return iv;
  while (inside(iv.lo - 1)) --iv.lo;
  while (!inside(iv.hi)) --iv.hi;
  while (inside(iv.hi + 1)) ++iv.hi;
  return iv;
}

cpp_rational exact(double v) { return cpp_rational(v); }

void validate_shell(const ShellSpec& spec) {
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
    throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (!(spec.delta > 0.0) || !(spec.delta < spec.lambda))
    throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, lambda)");
}

void apply_cutoff(LatticeShell& shell) {
  if (shell.spec.cutoff != Cutoff::SmoothBump) return;
  PointSet kept(shell.points.dim());
  std::vector<double> weights;
  for (std::size_t i = 0; i < shell.points.size(); ++i) {
    const double t = (std::sqrt(shell.form.eval_int(shell.points[i])) - shell.spec.lambda) /
                     shell.spec.delta;
    const double w = bump(t);
    if (w > 0.0) {
      kept.push_back(shell.points[i]);
      weights.push_back(w);
    }
  }
  shell.points = std::move(kept);
  shell.weights = std::move(weights);
}

}  // namespace

double bump(double t) {
  const double a = std::abs(t);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  const double s = (1.0 - a) / 0.5;  // 0 at |t| = 1, 1 at |t| = 1/2
  const double f = std::exp(-1.0 / s);
  const double g = std::exp(-1.0 / (1.0 - s));
  return f / (f + g);
}

void PointSet::sort_lex() {
  const std::size_t n = size();
  const auto d = static_cast<std::size_t>(dim_);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords_.begin() + a * d, coords_.begin() + (a + 1) * d,
                                        coords_.begin() + b * d, coords_.begin() + (b + 1) * d);
  });
  std::vector<std::int64_t> sorted;
  sorted.reserve(coords_.size());
  for (std::size_t i : idx)
    sorted.insert(sorted.end(), coords_.begin() + i * d, coords_.begin() + (i + 1) * d);
  coords_ = std::move(sorted);
}

LatticeShell enumerate_shell(const QuadraticForm& q, const ShellSpec& spec) {
  validate_shell(spec);
  const RadiusTest outer(q, exact(spec.lambda) + exact(spec.delta), spec.lambda);
  const RadiusTest inner(q, exact(spec.lambda) - exact(spec.delta), spec.lambda);
  const RowEnumerator rows(q, outer.threshold());
  const auto tops = rows.top_values();
  const double r00 = q.chol()(0, 0);

  std::vector<PointSet> parts(tops.size(), PointSet(q.dim()));
  std::vector<std::size_t> exact_counts(tops.size(), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < tops.size(); ++k) {
    PointSet& out = parts[k];
    std::size_t& ec = exact_counts[k];
    rows.visit(tops[k], [&](std::vector<std::int64_t>& x, double c, double rem) {
      const Interval o = row_interval(x, c, rem, r00, outer, ec);
      if (o.empty()) return;
      const double rem_in = rem - (outer.threshold() - inner.threshold());
      const Interval i = row_interval(x, c, rem_in, r00, inner, ec);
      for (std::int64_t v = o.lo; v <= o.hi; ++v) {
        if (!i.empty() && v >= i.lo && v <= i.hi) {
          v = i.hi;
          continue;
        }
        x[0] = v;
        out.push_back(x);
      }
    });
  }

  LatticeShell shell{spec, q, PointSet(q.dim()), {}, 0};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    shell.points.append(parts[k]);
    shell.exact_resolutions += exact_counts[k];
  }
  shell.points.sort_lex();
  apply_cutoff(shell);
  return shell;
}

std::int64_t count_ball(const QuadraticForm& q, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const RadiusTest test(q, exact(lambda), lambda);
  const RowEnumerator rows(q, test.threshold());
  const auto tops = rows.top_values();
  const double r00 = q.chol()(0, 0);
  std::vector<std::int64_t> counts(tops.size(), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < tops.size(); ++k) {
    std::size_t ec = 0;
    std::int64_t c = 0;
    rows.visit(tops[k], [&](std::vector<std::int64_t>& x, double center, double rem) {
      const Interval iv = row_interval(x, center, rem, r00, test, ec);
      if (!iv.empty()) c += iv.hi - iv.lo + 1;
    });
    counts[k] = c;
  }
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double error_term(const QuadraticForm& q, double lambda) {
  return static_cast<double>(count_ball(q, lambda)) - q.unit_volume() * std::pow(lambda, q.dim());
}

std::int64_t shell_count_sharp(const QuadraticForm& q, double lambda, double delta) {
  validate_shell({lambda, delta, Cutoff::Sharp});
  return count_ball(q, lambda + delta) - count_ball(q, lambda - delta);
}

double landau_error_exponent(int d) { return d - 2.0 * d / (d + 1.0); }

std::vector<ErrorRow> sweep_error(const QuadraticForm& q, std::span<const double> lambdas) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] >= lambdas[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "lambda grid must be ascending");
  std::vector<ErrorRow> rows(lambdas.size());
  const double expo = landau_error_exponent(q.dim());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    ErrorRow& r = rows[i];
    r.lambda = lambdas[i];
    r.count = count_ball(q, r.lambda);
    r.error = static_cast<double>(r.count) - q.unit_volume() * std::pow(r.lambda, q.dim());
    r.normalized = std::abs(r.error) / std::pow(r.lambda, expo);
  }
  return rows;
}

namespace reference {

namespace {
/// Box half-widths: |x_i| <= r sqrt((B^{-1})_ii).
std::vector<std::int64_t> box_bounds(const QuadraticForm& q, double radius) {
  const Matrix inv = inverse(q.coeffs());
  std::vector<std::int64_t> b;
  for (std::size_t i = 0; i < static_cast<std::size_t>(q.dim()); ++i)
    b.push_back(static_cast<std::int64_t>(std::ceil(radius * std::sqrt(inv(i, i)))) + 1);
  return b;
}

template <typename Fn>
void scan_box(const std::vector<std::int64_t>& bounds, Fn&& fn) {
  const std::size_t d = bounds.size();
  std::vector<std::int64_t> x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = -bounds[i];
  while (true) {
    fn(x);
    std::size_t i = 0;
    while (i < d && x[i] == bounds[i]) {
      x[i] = -bounds[i];
      ++i;
    }
    if (i == d) return;
    ++x[i];
  }
}
}  // namespace

LatticeShell enumerate_shell_box(const QuadraticForm& q, const ShellSpec& spec) {
  validate_shell(spec);
  const RadiusTest outer(q, exact(spec.lambda) + exact(spec.delta), spec.lambda);
  const RadiusTest inner(q, exact(spec.lambda) - exact(spec.delta), spec.lambda);
  LatticeShell shell{spec, q, PointSet(q.dim()), {}, 0};
  scan_box(box_bounds(q, spec.lambda + spec.delta), [&](const std::vector<std::int64_t>& x) {
    if (outer.below(x, shell.exact_resolutions) && !inner.below(x, shell.exact_resolutions))
      shell.points.push_back(x);
  });
  shell.points.sort_lex();
  apply_cutoff(shell);
  return shell;
}

std::int64_t count_ball_box(const QuadraticForm& q, double lambda) {
  const RadiusTest test(q, exact(lambda), lambda);
  std::int64_t n = 0;
  std::size_t ec = 0;
  scan_box(box_bounds(q, lambda), [&](const std::vector<std::int64_t>& x) {
    if (test.below(x, ec)) ++n;
  });
  return n;
}

}  // namespace reference

}  // namespace shellcap
