#include "shellcap/extremal.hpp"

#include <algorithm>
#include <cmath>

#include "shellcap/error.hpp"

namespace shellcap {

void CoefficientVector::add(const IntVec& k, std::complex<double> a) {
  if (static_cast<int>(k.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "coefficient frequency");
  auto [it, inserted] = entries_.try_emplace(k, a);
  if (!inserted) it->second += a;
  if (it->second == std::complex<double>(0.0, 0.0)) entries_.erase(it);
}

void CoefficientVector::set(const IntVec& k, std::complex<double> a) {
  if (static_cast<int>(k.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "coefficient frequency");
  if (a == std::complex<double>(0.0, 0.0))
    entries_.erase(k);
  else
    entries_[k] = a;
}

std::int64_t CoefficientVector::max_abs_freq() const {
  std::int64_t m = 0;
  for (const auto& [k, a] : entries_)
    for (auto c : k) m = std::max(m, c < 0 ? -c : c);
  return m;
}

bool CoefficientVector::nonnegative() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const auto& e) { return e.second.imag() == 0.0 && e.second.real() >= 0.0; });
}

CoefficientVector CoefficientVector::unit_on(const PointSet& points) {
  CoefficientVector c(points.dim());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto p = points[i];
    c.set(IntVec(p.begin(), p.end()), 1.0);
  }
  return c;
}

AxisPoint find_axis_lambda(const QuadraticForm& q, std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  const auto d = static_cast<std::size_t>(q.dim());
  // grad Q parallel to e_d means xi0 = t B^{-1} e_d; Q(xi0) = 1 fixes t.
  const Matrix inv = inverse(q.coeffs());
  const double idd = inv(d - 1, d - 1);
  const double t = 1.0 / std::sqrt(idd);
  AxisPoint a;
  a.xi0.resize(d);
  for (std::size_t i = 0; i < d; ++i) a.xi0[i] = t * inv(i, d - 1);
  a.xi0[d - 1] = std::sqrt(idd);
  a.lambda = static_cast<double>(n) / a.xi0[d - 1];
  return a;
}

KnappSpec make_knapp_spec(const QuadraticForm& q, std::int64_t n, Taper taper) {
  KnappSpec s;
  s.xi0 = find_axis_lambda(q, n).xi0;
  s.n = n;
  s.taper = taper;
  return s;
}

namespace {

struct CuboidPoint {
  IntVec k;
  double weight;
};

std::vector<CuboidPoint> cuboid_points(const RealVec& z, double tangential, double normal, Taper taper) {
  const std::size_t d = z.size();
  std::vector<std::int64_t> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double w = i + 1 == d ? normal : tangential;
    lo[i] = static_cast<std::int64_t>(std::floor(z[i] - w)) + 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(z[i] + w)) - 1;
  }
  std::vector<CuboidPoint> out;
  IntVec k(lo.begin(), lo.end());
  while (true) {
    bool inside = true;
    double weight = 1.0;
    for (std::size_t i = 0; i < d && inside; ++i) {
      const double w = i + 1 == d ? normal : tangential;
      const double off = std::abs(static_cast<double>(k[i]) - z[i]);
      if (!(off < w)) inside = false;
      if (taper == Taper::FejerProduct && i + 1 < d) weight *= std::max(0.0, 1.0 - off / w);
    }
    if (inside && weight > 0.0) out.push_back({k, weight});
    std::size_t i = 0;
    while (i < d && k[i] == hi[i]) {
      k[i] = lo[i];
      ++i;
    }
    if (i == d) break;
    ++k[i];
  }
  return out;
}

}  // namespace

KnappResult knapp_coefficients(const QuadraticForm& q, double lambda, double delta, const KnappSpec& spec) {
  const auto d = static_cast<std::size_t>(q.dim());
  if (spec.xi0.size() != d) throw Error(ErrorKind::DimensionMismatch, "xi0");
  if (!(delta > 0.0) || !(delta < lambda)) throw Error(ErrorKind::InvalidArgument, "need 0 < delta < lambda");
  if (!(spec.c > 0.0)) throw Error(ErrorKind::InvalidArgument, "cuboid constant must be positive");
  if (std::abs(lambda * spec.xi0[d - 1] - static_cast<double>(spec.n)) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "lambda xi0^d must equal n");
  RealVec z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = lambda * spec.xi0[i];
  z[d - 1] = static_cast<double>(spec.n);

  auto offset = [&](const IntVec& k) {
    RealVec x(k.begin(), k.end());
    return std::abs(q.sqrt_eval(x) - lambda);
  };

  KnappResult r;
  r.lambda = lambda;
  r.coeffs = CoefficientVector(static_cast<int>(d));
  double c = spec.c;
  std::vector<CuboidPoint> pts;
  for (int halvings = 0;; ++halvings) {
    pts = cuboid_points(z, c * std::sqrt(lambda * delta), c * delta, spec.taper);
    const bool ok = std::all_of(pts.begin(), pts.end(), [&](const CuboidPoint& p) { return offset(p.k) < 0.5 * delta; });
    if (ok || halvings == 10) break;
    c *= 0.5;
  }
  r.c_used = c;
  for (const auto& p : pts) {
    if (offset(p.k) < delta)
      r.coeffs.set(p.k, p.weight);
    else
      ++r.dropped;
  }
  if (r.coeffs.empty()) {
    IntVec k(d);
    for (std::size_t i = 0; i < d; ++i) k[i] = static_cast<std::int64_t>(std::llround(z[i]));
    r.coeffs.set(k, 1.0);
    r.empty_cuboid = true;
  }
  return r;
}

RadialResult radial_coefficients(const QuadraticForm& q, double lambda, double delta) {
  RadialResult r;
  r.lambda = lambda;
  const LatticeShell shell = enumerate_shell(q, {lambda, delta, Cutoff::Sharp});
  r.coeffs = CoefficientVector::unit_on(shell.points);
  if (shell.points.empty()) r.coeffs = CoefficientVector(q.dim());
  r.empty_shell = r.coeffs.empty();
  return r;
}

double optimize_radial_lambda(const QuadraticForm& q, std::int64_t n, double delta) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be >= 2 to scan [n-1, n+1]");
  const double step = delta / 2.0;
  const auto steps = static_cast<std::int64_t>(std::floor(2.0 / step + 1e-9));
  if (steps > 1'000'000) throw Error(ErrorKind::InvalidArgument, "delta too small for the lambda scan");
  double best = static_cast<double>(n);
  std::int64_t best_count = -1;
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double lambda = static_cast<double>(n - 1) + static_cast<double>(i) * step;
    if (!(lambda > delta)) continue;
    const std::int64_t count = shell_count_sharp(q, lambda, delta);
    if (count > best_count) {
      best_count = count;
      best = lambda;
    }
  }
  return best;
}

double knapp_predicted_ratio(int d, double p, double lambda, double delta) {
  if (!(p >= 2.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 2");
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return std::pow(1.0 + lambda * delta, 0.5 * (d - 1) * (0.5 - inv_p));
}

}  // namespace shellcap
