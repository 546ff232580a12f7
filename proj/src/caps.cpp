#include "shellcap/caps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "shellcap/error.hpp"

namespace shellcap {

namespace {

std::size_t grid_side(double lambda, double delta) {
  return static_cast<std::size_t>(std::ceil(2.0 * std::sqrt(lambda / delta)));
}

struct VecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

/// Uniform hash grid over cap centers, cell size = sqrt(lambda delta).
class CenterGrid {
 public:
  CenterGrid(const std::vector<CapCenter>& net, double cell) : net_(net), cell_(cell) {
    for (std::size_t i = 0; i < net.size(); ++i) cells_[key(net[i].center)].push_back(static_cast<int>(i));
  }

  int nearest(std::span<const double> p) const {
    const auto home = key(p);
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    // Grow the search until some center is found, then rescan the exact radius.
    std::int64_t reach = 1;
    while (best_id < 0) {
      scan(home, reach, p, best, best_id);
      if (best_id < 0) {
        reach *= 2;
        if (reach > (std::int64_t{1} << 20)) throw Error(ErrorKind::DegenerateInput, "empty cap net");
      }
    }
    const auto exact_reach = static_cast<std::int64_t>(std::ceil(std::sqrt(best) / cell_)) + 1;
    if (exact_reach > reach) scan(home, exact_reach, p, best, best_id);
    return best_id;
  }

 private:
  std::vector<std::int64_t> key(std::span<const double> x) const {
    std::vector<std::int64_t> k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = static_cast<std::int64_t>(std::floor(x[i] / cell_));
    return k;
  }

  void scan(const std::vector<std::int64_t>& home, std::int64_t reach, std::span<const double> p,
            double& best, int& best_id) const {
    const std::size_t d = home.size();
    std::vector<std::int64_t> off(d, -reach);
    std::vector<std::int64_t> k(d);
    while (true) {
      for (std::size_t i = 0; i < d; ++i) k[i] = home[i] + off[i];
      if (auto it = cells_.find(k); it != cells_.end())
        for (int id : it->second) {
          double s = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const double t = p[i] - net_[static_cast<std::size_t>(id)].center[i];
            s += t * t;
          }
          if (s < best || (s == best && id < best_id)) {
            best = s;
            best_id = id;
          }
        }
      std::size_t i = 0;
      while (i < d && off[i] == reach) off[i++] = -reach;
      if (i == d) return;
      ++off[i];
    }
  }

  const std::vector<CapCenter>& net_;
  double cell_;
  std::unordered_map<std::vector<std::int64_t>, std::vector<int>, VecHash> cells_;
};

CapDecomposition build_decomposition(const LatticeShell& shell, const std::vector<CapCenter>& net,
                                     BoxConstants box, const std::vector<int>& owner) {
  const int d = shell.form.dim();
  const double lambda = shell.spec.lambda;
  const double delta = shell.spec.delta;
  CapDecomposition out{shell.form, shell.spec, box, {}, {}, 0};
  out.caps.reserve(net.size());
  RealVec hw(static_cast<std::size_t>(d), box.c2 * std::sqrt(lambda * delta));
  hw[0] = box.c1 * delta;
  for (std::size_t i = 0; i < net.size(); ++i)
    out.caps.push_back(Cap{static_cast<int>(i), net[i].center, net[i].normal, PointSet(d), hw});
  for (std::size_t i = 0; i < owner.size(); ++i)
    out.caps[static_cast<std::size_t>(owner[i])].points.push_back(shell.points[i]);

  const double mean = out.mean_count();
  for (const Cap& c : out.caps) {
    if (c.n_theta() == 0) continue;
    const int j = cap_class(c.n_theta(), mean);
    out.classes[j].push_back(c.id);
    out.j_max = std::max(out.j_max, j);
  }
  return out;
}

RealVec as_real(std::span<const std::int64_t> p) {
  RealVec x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = static_cast<double>(p[i]);
  return x;
}

}  // namespace

double CapDecomposition::mean_count() const {
  const int d = form.dim();
  return std::pow(std::sqrt(spec.lambda * spec.delta), d - 1) * spec.delta;
}

std::size_t CapDecomposition::total_points() const {
  std::size_t n = 0;
  for (const Cap& c : caps) n += c.n_theta();
  return n;
}

std::size_t cap_net_size(int d, double lambda, double delta) {
  const double m = static_cast<double>(grid_side(lambda, delta));
  double total = 0.0;
  for (int a = 0; a < d; ++a) total += 2.0 * std::pow(m - 1.0, a) * std::pow(m + 1.0, d - 1 - a);
  return total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

std::vector<CapCenter> build_cap_net(const QuadraticForm& q, const ShellSpec& spec) {
  if (!(spec.delta > 0.0) || !(spec.delta < spec.lambda))
    throw Error(ErrorKind::InvalidArgument, "cap net needs 0 < delta < lambda");
  const int d = q.dim();
  const std::size_t count = cap_net_size(d, spec.lambda, spec.delta);
  if (count > kMaxNetSize)
    throw Error(ErrorKind::NetTooLarge, std::to_string(count) + " directions requested");
  const auto m = static_cast<std::int64_t>(grid_side(spec.lambda, spec.delta));
  const double step = 2.0 / static_cast<double>(m);

  std::vector<CapCenter> net;
  net.reserve(count);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d));
  // Face (axis a, sign s) owns grid points whose coordinates before a are
  // strictly inside (-1, 1); this lists every surface point exactly once.
  for (int a = 0; a < d; ++a)
    for (int s : {-1, 1}) {
      std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        lo[static_cast<std::size_t>(i)] = i < a ? 1 : 0;
        hi[static_cast<std::size_t>(i)] = i < a ? m - 1 : m;
      }
      lo[static_cast<std::size_t>(a)] = hi[static_cast<std::size_t>(a)] = (s < 0 ? 0 : m);
      bool empty = false;
      for (int i = 0; i < d; ++i) empty = empty || lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)];
      if (empty) continue;
      idx = lo;
      while (true) {
        RealVec g(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] = -1.0 + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
        g[static_cast<std::size_t>(a)] = static_cast<double>(s);
        const double n2 = norm2(g);
        RealVec normal(g);
        for (double& v : normal) v /= n2;
        const double scale = spec.lambda / q.sqrt_eval(normal);
        RealVec center(normal);
        for (double& v : center) v *= scale;
        net.push_back({std::move(center), std::move(normal)});

        int i = d - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == hi[static_cast<std::size_t>(i)]) {
          idx[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
          --i;
        }
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
      }
    }
  return net;
}

CapDecomposition assign_points(const LatticeShell& shell, const std::vector<CapCenter>& net,
                               BoxConstants box) {
  const std::size_t n = shell.points.size();
  if (n > 0 && net.empty()) throw Error(ErrorKind::InvalidArgument, "empty net for nonempty shell");
  std::vector<int> owner(n, 0);
  if (n > 0) {
    const CenterGrid grid(net, std::sqrt(shell.spec.lambda * shell.spec.delta));
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) owner[i] = grid.nearest(as_real(shell.points[i]));
  }
  return build_decomposition(shell, net, box, owner);
}

int cap_class(std::size_t n, double mean) {
  const double v = static_cast<double>(n);
  // Relative slack so that n equal to a dyadic boundary is not split by rounding.
  const double tol = 1e-12;
  if (v <= mean * (1.0 + tol)) return 0;
  int j = 1;
  while (v > std::ldexp(mean, j) * (1.0 + tol)) ++j;
  return j;
}

ClassHistogram classify(const CapDecomposition& decomp) {
  ClassHistogram h;
  for (const auto& [j, ids] : decomp.classes) h.counts[j] = ids.size();
  h.net_size = decomp.caps.size();
  const int d = decomp.form.dim();
  h.net_size_ratio = static_cast<double>(h.net_size) /
                     std::pow(decomp.spec.lambda / decomp.spec.delta, 0.5 * (d - 1));
  return h;
}

std::optional<int> optimal_k(double lambda, double delta, int j, double K) {
  const double dl = delta * lambda;
  if (!(dl > 1.0)) return std::nullopt;
  auto holds = [&](int k) { return std::pow(dl, 0.5 * k) * delta * std::ldexp(1.0, j) > K; };
  int k = 1;
  while (!holds(k)) {
    ++k;
    if (k > 10000) return std::nullopt;
  }
  return k;
}

CapTheoremAudit verify_cap_theorem(const CapDecomposition& decomp, double K, bool strict) {
  const int d = decomp.form.dim();
  const double lambda = decomp.spec.lambda;
  const double delta = decomp.spec.delta;
  CapTheoremAudit audit;
  audit.K = K;
  audit.delta_in_range = std::log(delta) > -(d - 1.0) / (d + 1.0) * std::log(lambda);

  for (int j = 1; j <= decomp.j_max; ++j) {
    const double two_j = std::ldexp(1.0, j);
    auto it = decomp.classes.find(j);
    const std::size_t count = it == decomp.classes.end() ? 0 : it->second.size();
    if (two_j >= K / delta && count > 0) audit.cmax_ok = false;
    if (!(two_j > K)) continue;
    CapTheoremRow row;
    row.j = j;
    row.count = count;
    row.k0 = optimal_k(lambda, delta, j, K);
    row.in_regime = row.k0 && *row.k0 <= d - 1;
    if (strict && !row.in_regime)
      throw Error(ErrorKind::RegimeViolation, "no k in {1..d-1} for j = " + std::to_string(j));
    if (row.k0) {
      row.bound = std::pow(std::pow(two_j, 1.0 / *row.k0) * delta, -d);
      row.ratio = static_cast<double>(count) / row.bound;
      audit.max_ratio = std::max(audit.max_ratio, row.ratio);
    } else {
      row.bound = std::numeric_limits<double>::quiet_NaN();
      row.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    audit.rows.push_back(row);
  }
  return audit;
}

CapGeometryCheck check_cap_geometry(const CapDecomposition& decomp) {
  const int d = decomp.form.dim();
  const double scale = std::sqrt(decomp.spec.lambda * decomp.spec.delta);
  const double trivial = std::pow(scale, d - 1);
  CapGeometryCheck out;
  for (const Cap& c : decomp.caps) {
    if (c.n_theta() == 0) continue;
    out.max_trivial_ratio = std::max(out.max_trivial_ratio, static_cast<double>(c.n_theta()) / trivial);
    const Matrix frame = orthonormal_frame(c.normal);
    RealVec lo(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    RealVec hi(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const RealVec p = as_real(c.points[i]);
      RealVec diff(p);
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= c.center[k];
      out.max_center_distance_ratio = std::max(out.max_center_distance_ratio, norm2(diff) / scale);
      const RealVec y = frame * std::span<const double>(p);
      for (std::size_t k = 0; k < y.size(); ++k) {
        lo[k] = std::min(lo[k], y[k]);
        hi[k] = std::max(hi[k], y[k]);
      }
    }
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (hi[k] - lo[k] > c.half_widths[k]) out.box_contains_differences = false;
  }
  return out;
}

namespace reference {

CapDecomposition assign_points_brute(const LatticeShell& shell, const std::vector<CapCenter>& net,
                                     BoxConstants box) {
  std::vector<int> owner(shell.points.size(), 0);
  for (std::size_t i = 0; i < shell.points.size(); ++i) {
    const RealVec p = as_real(shell.points[i]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < net.size(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = p[k] - net[c].center[k];
        s += t * t;
      }
      if (s < best) {
        best = s;
        owner[i] = static_cast<int>(c);
      }
    }
  }
  return build_decomposition(shell, net, box, owner);
}

}  // namespace reference

}  // namespace shellcap
