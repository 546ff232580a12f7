#include "shellcap/norms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <unordered_map>

#include "shellcap/caps.hpp"
#include "shellcap/error.hpp"

namespace shellcap {

std::string to_string(NormMethod m) {
  switch (m) {
    case NormMethod::Exact2: return "Exact2";
    case NormMethod::ExactInf: return "ExactInf";
    case NormMethod::EnergyEven: return "EnergyEven";
    case NormMethod::QuadratureExact: return "QuadratureExact";
    case NormMethod::GridApprox: return "GridApprox";
  }
  return "?";
}

NormResult l2_norm(const CoefficientVector& c) {
  CompensatedSum s;
  for (const auto& [k, a] : c.entries()) s.add(std::norm(a));
  return {std::sqrt(s.value()), NormMethod::Exact2, 0.0, 0, {}};
}

NormResult linf_nonneg(const CoefficientVector& c) {
  if (!c.nonnegative()) throw Error(ErrorKind::NegativeCoefficient, "linf_nonneg needs nonnegative coefficients");
  CompensatedSum s;
  for (const auto& [k, a] : c.entries()) s.add(a.real());
  return {s.value(), NormMethod::ExactInf, 0.0, 0, {}};
}

namespace {

/// Mixed-radix packing of pair sums into int64 keys.
struct SumPacking {
  std::vector<std::int64_t> lo, base;
  bool fits = true;

  explicit SumPacking(const CoefficientVector& c) {
    const auto d = static_cast<std::size_t>(c.dim());
    lo.assign(d, std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> hi(d, std::numeric_limits<std::int64_t>::min());
    for (const auto& [k, a] : c.entries())
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], k[i]);
        hi[i] = std::max(hi[i], k[i]);
      }
    base.resize(d);
    long double total = 1.0L;
    for (std::size_t i = 0; i < d; ++i) {
      base[i] = 2 * (hi[i] - lo[i]) + 1;
      total *= static_cast<long double>(base[i]);
    }
    fits = total < 4.0e18L;
  }

  std::int64_t key(const IntVec& a, const IntVec& b) const {
    std::int64_t k = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) k = k * base[i] + (a[i] + b[i] - 2 * lo[i]);
    return k;
  }
};

double energy_from_values(std::vector<std::pair<std::int64_t, double>>& sq) {
  std::sort(sq.begin(), sq.end());
  CompensatedSum s;
  for (const auto& [k, v] : sq) s.add(v);
  return s.value();
}

}  // namespace

double l4_fourth(const CoefficientVector& c) {
  if (c.size() > kMaxEnergySupport)
    throw Error(ErrorKind::SupportTooLarge, "support " + std::to_string(c.size()) + " exceeds energy limit");
  if (c.empty()) return 0.0;
  const SumPacking pack(c);
  if (!pack.fits) return reference::l4_fourth_serial(c);
  std::vector<std::pair<const IntVec*, std::complex<double>>> e;
  e.reserve(c.size());
  for (const auto& [k, a] : c.entries()) e.emplace_back(&k, a);
  const std::size_t n = e.size();
  // Fixed chunking so the per-key summation order ignores the thread count.
  constexpr std::size_t kChunks = 64;
  std::vector<std::unordered_map<std::int64_t, std::complex<double>>> local(kChunks);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t ch = 0; ch < kChunks; ++ch) {
    const std::size_t b = n * ch / kChunks, end = n * (ch + 1) / kChunks;
    auto& m = local[ch];
    for (std::size_t i = b; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j) m[pack.key(*e[i].first, *e[j].first)] += e[i].second * e[j].second;
  }
  std::unordered_map<std::int64_t, std::complex<double>> total;
  for (auto& m : local) {
    for (const auto& [k, v] : m) total[k] += v;
    m.clear();
  }
  std::vector<std::pair<std::int64_t, double>> sq;
  sq.reserve(total.size());
  for (const auto& [k, v] : total) sq.emplace_back(k, std::norm(v));
  return energy_from_values(sq);
}

NormResult l4_energy(const CoefficientVector& c) {
  return {std::pow(l4_fourth(c), 0.25), NormMethod::EnergyEven, 0.0, 0, {}};
}

std::int64_t fast_length(std::int64_t n) {
  if (n <= 1) return 1;
  for (std::int64_t m = n;; ++m) {
    std::int64_t r = m;
    for (std::int64_t f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

namespace {

bool is_even_integer(double p) { return std::isfinite(p) && p >= 2.0 && p == std::floor(p) && std::fmod(p, 2.0) == 0.0; }

struct GridPlan {
  std::vector<std::int64_t> shift, len;
  bool exact = false;
  double points = 1.0;
};

GridPlan plan_grid(const CoefficientVector& c, double p, int oversample) {
  if (oversample < 1) throw Error(ErrorKind::InvalidArgument, "oversample must be >= 1");
  const auto d = static_cast<std::size_t>(c.dim());
  std::vector<std::int64_t> lo(d, std::numeric_limits<std::int64_t>::max()), hi(d, std::numeric_limits<std::int64_t>::min());
  for (const auto& [k, a] : c.entries())
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], k[i]);
      hi[i] = std::max(hi[i], k[i]);
    }
  GridPlan g;
  g.exact = is_even_integer(p);
  g.shift.resize(d);
  g.len.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    g.shift[i] = lo[i] + (hi[i] - lo[i]) / 2;
    const std::int64_t h = std::max(hi[i] - g.shift[i], g.shift[i] - lo[i]);
    std::int64_t need = oversample * (2 * h + 1);
    if (g.exact) need = std::max(need, static_cast<std::int64_t>(p) * h + 1);
    g.len[i] = fast_length(need);
    g.points *= static_cast<double>(g.len[i]);
  }
  if (g.points > kMaxGridPoints)
    throw Error(ErrorKind::GridTooLarge, "grid of " + std::to_string(g.points) + " points exceeds 2^31");
  return g;
}

std::mutex fftw_planner_mutex;

double int_power(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

/// Mean of |f/scale|^p over the grid (or max of |f/scale| for p = inf).
double grid_mean_power(const CoefficientVector& c, const GridPlan& g, double p, double scale) {
  const std::size_t d = g.len.size();
  const bool inf = std::isinf(p);
  const std::int64_t m1 = g.len[0];
  std::int64_t slab = 1;
  for (std::size_t i = 1; i < d; ++i) slab *= g.len[i];

  struct Entry {
    std::int64_t k1;
    std::int64_t index;
    std::complex<double> a;
  };
  std::vector<Entry> entries;
  entries.reserve(c.size());
  for (const auto& [k, a] : c.entries()) {
    std::int64_t idx = 0;
    for (std::size_t i = 1; i < d; ++i) {
      const std::int64_t r = ((k[i] - g.shift[i]) % g.len[i] + g.len[i]) % g.len[i];
      idx = idx * g.len[i] + r;
    }
    const std::int64_t r1 = ((k[0] - g.shift[0]) % m1 + m1) % m1;
    entries.push_back({r1, idx, a / scale});
  }
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(m1));
  for (std::int64_t j = 0; j < m1; ++j) {
    const double t = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(m1);
    roots[static_cast<std::size_t>(j)] = {std::cos(t), std::sin(t)};
  }

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    std::vector<int> dims;
    for (std::size_t i = 1; i < d; ++i) dims.push_back(static_cast<int>(g.len[i]));
    fftw_complex* probe = fftw_alloc_complex(static_cast<std::size_t>(slab));
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), probe, probe, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(probe);
  }

  const int half_power = is_even_integer(p) && p <= 256.0 ? static_cast<int>(p / 2.0) : 0;
  std::vector<double> partial(static_cast<std::size_t>(m1), 0.0);
#pragma omp parallel
  {
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(slab));
    auto* z = reinterpret_cast<std::complex<double>*>(buf);
#pragma omp for schedule(static)
    for (std::int64_t x1 = 0; x1 < m1; ++x1) {
      std::fill(z, z + slab, std::complex<double>(0.0, 0.0));
      for (const auto& e : entries) z[e.index] += e.a * roots[static_cast<std::size_t>((e.k1 * x1) % m1)];
      fftw_execute_dft(plan, buf, buf);
      if (inf) {
        double m = 0.0;
        for (std::int64_t i = 0; i < slab; ++i) m = std::max(m, std::norm(z[i]));
        partial[static_cast<std::size_t>(x1)] = std::sqrt(m);
      } else {
        CompensatedSum s;
        if (half_power > 0) {
          for (std::int64_t i = 0; i < slab; ++i) s.add(int_power(std::norm(z[i]), half_power));
        } else {
          for (std::int64_t i = 0; i < slab; ++i) s.add(std::pow(std::norm(z[i]), 0.5 * p));
        }
        partial[static_cast<std::size_t>(x1)] = s.value();
      }
    }
    fftw_free(buf);
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  if (inf) return *std::max_element(partial.begin(), partial.end());
  return compensated_sum(partial) / g.points;
}

double grid_value(const CoefficientVector& c, const GridPlan& g, double p) {
  double scale = 0.0;
  for (const auto& [k, a] : c.entries()) scale += std::abs(a);
  const double mean = grid_mean_power(c, g, p, scale);
  return std::isinf(p) ? scale * mean : scale * std::pow(mean, 1.0 / p);
}

void check_p(double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
}

}  // namespace

NormResult lp_norm_grid(const CoefficientVector& c, double p, int oversample) {
  check_p(p);
  NormResult r;
  r.oversample = oversample;
  if (c.empty()) {
    r.method = is_even_integer(p) ? NormMethod::QuadratureExact : NormMethod::GridApprox;
    return r;
  }
  const GridPlan g = plan_grid(c, p, oversample);
  r.grid = g.len;
  r.value = grid_value(c, g, p);
  if (g.exact) {
    r.method = NormMethod::QuadratureExact;
  } else {
    r.method = NormMethod::GridApprox;
    const int other = oversample >= 2 ? oversample / 2 : 2;
    const double v2 = grid_value(c, plan_grid(c, p, other), p);
    r.error_bound = r.value > 0.0 ? std::abs(r.value - v2) / r.value : std::abs(v2);
  }
  return r;
}

NormRatio norm_ratio(const CoefficientVector& c, double p) {
  check_p(p);
  if (c.empty()) throw Error(ErrorKind::DegenerateInput, "empty coefficient vector");
  const double l2 = l2_norm(c).value;
  NormResult r;
  if (p == 2.0)
    r = l2_norm(c);
  else if (std::isinf(p) && c.nonnegative())
    r = linf_nonneg(c);
  else if (p == 4.0 && c.size() <= kMaxEnergySupport &&
           static_cast<double>(c.size()) * static_cast<double>(c.size()) <= plan_grid(c, p, 4).points)
    r = l4_energy(c);
  else
    r = lp_norm_grid(c, p);
  return {p == 2.0 ? 1.0 : r.value / l2, r.method, r.error_bound};
}

std::string to_string(const Family& f) {
  switch (f.kind) {
    case FamilyKind::Knapp: return "knapp";
    case FamilyKind::Radial: return "radial";
    case FamilyKind::SingleCap: return "singlecap";
    case FamilyKind::RandomSigns: return "random:" + std::to_string(f.trials) + ":" + std::to_string(f.seed);
  }
  return "?";
}

std::vector<Family> parse_families(const std::string& text) {
  std::vector<Family> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    Family f;
    if (item == "knapp") {
      f.kind = FamilyKind::Knapp;
    } else if (item == "radial") {
      f.kind = FamilyKind::Radial;
    } else if (item == "singlecap") {
      f.kind = FamilyKind::SingleCap;
    } else if (item.rfind("random:", 0) == 0) {
      f.kind = FamilyKind::RandomSigns;
      const auto colon = item.find(':', 7);
      if (colon == std::string::npos) throw Error(ErrorKind::InvalidFamilies, "expected random:TRIALS:SEED");
      try {
        f.trials = std::stoi(item.substr(7, colon - 7));
        f.seed = std::stoull(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidFamilies, "bad random family '" + item + "'");
      }
      if (f.trials < 1) throw Error(ErrorKind::InvalidFamilies, "random family needs >= 1 trial");
    } else {
      throw Error(ErrorKind::InvalidFamilies, "unknown family '" + item + "'");
    }
    out.push_back(f);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidFamilies, "no families given");
  return out;
}

namespace {

CoefficientVector knapp_window(const QuadraticForm& q, const LatticeShell& shell, double lambda, double delta) {
  const auto d = static_cast<std::size_t>(q.dim());
  const RealVec xi0 = find_axis_lambda(q, 1).xi0;
  const double w = 0.25 * std::sqrt(lambda * delta);
  CoefficientVector c(q.dim());
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shell.points.size(); ++i) {
    auto k = shell.points[i];
    bool inside = k[d - 1] > 0;
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double off = static_cast<double>(k[j]) - lambda * xi0[j];
      dist += off * off;
      if (j + 1 < d && !(std::abs(off) < w)) inside = false;
    }
    if (inside) c.set(IntVec(k.begin(), k.end()), 1.0);
    if (dist < best) {
      best = dist;
      nearest = i;
    }
  }
  if (c.empty()) {
    auto k = shell.points[nearest];
    c.set(IntVec(k.begin(), k.end()), 1.0);
  }
  return c;
}

CoefficientVector densest_cap(const QuadraticForm& q, const LatticeShell& shell) {
  const CapDecomposition decomp = assign_points(shell, build_cap_net(q, shell.spec));
  const Cap* best = nullptr;
  for (const Cap& cap : decomp.caps)
    if (best == nullptr || cap.n_theta() > best->n_theta()) best = &cap;
  return CoefficientVector::unit_on(best->points);
}

}  // namespace

OpNormLower opnorm_lower(const QuadraticForm& q, double lambda, double delta, double p,
                         const std::vector<Family>& families) {
  if (families.empty()) throw Error(ErrorKind::InvalidFamilies, "no families given");
  check_p(p);
  const LatticeShell shell = enumerate_shell(q, {lambda, delta, Cutoff::Sharp});
  if (shell.points.empty()) throw Error(ErrorKind::DegenerateInput, "empty shell");
  OpNormLower out;
  for (const Family& f : families) {
    FamilyRow row;
    row.family = f;
    auto record = [&](const CoefficientVector& c) {
      const NormRatio r = norm_ratio(c, p);
      if (r.ratio > row.ratio || row.support == 0) {
        row.ratio = r.ratio;
        row.method = r.method;
        row.error_bound = r.error_bound;
        row.support = c.size();
      }
    };
    switch (f.kind) {
      case FamilyKind::Knapp: record(knapp_window(q, shell, lambda, delta)); break;
      case FamilyKind::Radial: record(CoefficientVector::unit_on(shell.points)); break;
      case FamilyKind::SingleCap: record(densest_cap(q, shell)); break;
      case FamilyKind::RandomSigns: {
        std::mt19937_64 rng(f.seed);
        for (int t = 0; t < f.trials; ++t) {
          CoefficientVector c(q.dim());
          for (std::size_t i = 0; i < shell.points.size(); ++i) {
            auto k = shell.points[i];
            c.set(IntVec(k.begin(), k.end()), (rng() >> 63) != 0 ? 1.0 : -1.0);
          }
          record(c);
        }
        break;
      }
    }
    if (row.ratio > out.best_ratio || out.rows.empty()) {
      out.best_ratio = row.ratio;
      out.witness = to_string(f);
    }
    out.rows.push_back(row);
  }
  return out;
}

namespace reference {

std::complex<double> evaluate(const CoefficientVector& c, std::span<const double> x) {
  std::complex<double> s = 0.0;
  for (const auto& [k, a] : c.entries()) {
    double t = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) t += static_cast<double>(k[i]) * x[i];
    t -= std::floor(t);
    s += a * std::complex<double>(std::cos(2.0 * M_PI * t), std::sin(2.0 * M_PI * t));
  }
  return s;
}

NormResult lp_norm_direct(const CoefficientVector& c, double p, int oversample) {
  check_p(p);
  NormResult r;
  r.oversample = oversample;
  r.method = is_even_integer(p) ? NormMethod::QuadratureExact : NormMethod::GridApprox;
  if (c.empty()) return r;
  const GridPlan g = plan_grid(c, p, oversample);
  r.grid = g.len;
  const std::size_t d = g.len.size();
  std::vector<std::int64_t> m(d, 0);
  RealVec x(d);
  CompensatedSum s;
  double mx = 0.0;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = static_cast<double>(m[i]) / static_cast<double>(g.len[i]);
    const double a = std::abs(evaluate(c, x));
    if (std::isinf(p))
      mx = std::max(mx, a);
    else
      s.add(std::pow(a, p));
    std::size_t i = d;
    while (i-- > 0) {
      if (++m[i] < g.len[i]) break;
      m[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  r.value = std::isinf(p) ? mx : std::pow(s.value() / g.points, 1.0 / p);
  return r;
}

double l4_fourth_serial(const CoefficientVector& c) {
  std::map<IntVec, std::complex<double>> sums;
  for (const auto& [k1, a1] : c.entries())
    for (const auto& [k2, a2] : c.entries()) {
      IntVec s(k1.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = k1[i] + k2[i];
      sums[s] += a1 * a2;
    }
  CompensatedSum total;
  for (const auto& [k, v] : sums) total.add(std::norm(v));
  return total.value();
}

}  // namespace reference

}  // namespace shellcap
