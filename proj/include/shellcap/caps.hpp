#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "shellcap/lattice.hpp"
#include "shellcap/linalg.hpp"

namespace shellcap {

struct CapCenter {
  RealVec center;  // on the mid-surface sqrt(Q) = lambda
  RealVec normal;  // center / |center|_2
};

/// Box R_theta: normal half-thickness c1 * delta, tangential half-width
/// c2 * sqrt(lambda * delta).
struct BoxConstants {
  double c1 = 8.0;
  double c2 = 2.0;
};

struct Cap {
  int id = 0;
  RealVec center;
  RealVec normal;
  PointSet points;
  /// Half-widths of R_theta along (normal, tangent, ..., tangent).
  RealVec half_widths;

  std::size_t n_theta() const { return points.size(); }
};

struct CapDecomposition {
  QuadraticForm form;
  ShellSpec spec;
  BoxConstants box;
  std::vector<Cap> caps;
  /// j -> ids of caps in C_j; only caps with N_theta >= 1 are classified.
  std::map<int, std::vector<int>> classes;
  int j_max = 0;

  /// (sqrt(lambda delta))^{d-1} delta, the expected points per cap.
  double mean_count() const;
  std::size_t total_points() const;
};

/// Maximum number of net directions before NetTooLarge.
inline constexpr std::size_t kMaxNetSize = 100'000'000;

/// Deterministic direction net: the grid of side M = ceil(2 sqrt(lambda/delta))
/// on the surface of [-1,1]^d, normalized; centers scaled to sqrt(Q) = lambda.
std::vector<CapCenter> build_cap_net(const QuadraticForm& q, const ShellSpec& spec);
std::size_t cap_net_size(int d, double lambda, double delta);

/// Nearest-center (Voronoi) assignment, ties to the smallest cap id.
CapDecomposition assign_points(const LatticeShell& shell, const std::vector<CapCenter>& net,
                               BoxConstants box = {});

/// Dyadic class index of a cap with n points; 0 when n does not exceed the mean.
int cap_class(std::size_t n, double mean);

struct ClassHistogram {
  std::map<int, std::size_t> counts;  // j -> #C_j
  std::size_t net_size = 0;
  /// net_size / (lambda/delta)^{(d-1)/2}; the trivial bound on #C.
  double net_size_ratio = 0.0;
};

ClassHistogram classify(const CapDecomposition& decomp);

struct CapTheoremRow {
  int j = 0;
  std::size_t count = 0;
  /// Smallest k >= 1 with (sqrt(delta lambda))^k delta 2^j > K.
  std::optional<int> k0;
  /// k0 lies in {1, ..., d-1}.
  bool in_regime = false;
  double bound = 0.0;  // (2^{j/k0} delta)^{-d}
  double ratio = 0.0;  // count / bound
};

struct CapTheoremAudit {
  double K = 4.0;
  std::vector<CapTheoremRow> rows;
  double max_ratio = 0.0;
  /// #C_j = 0 for every j with 2^j >= K / delta.
  bool cmax_ok = true;
  /// delta > lambda^{-(d-1)/(d+1)}.
  bool delta_in_range = false;
};

/// Smallest k >= 1 with (delta lambda)^{k/2} delta 2^j > K; nullopt when
/// delta lambda <= 1.
std::optional<int> optimal_k(double lambda, double delta, int j, double K);

/// Rows for every j up to j_max with 2^j > K. With strict set, throws
/// RegimeViolation when a row has no k in {1, ..., d-1}.
CapTheoremAudit verify_cap_theorem(const CapDecomposition& decomp, double K, bool strict = false);

struct CapGeometryCheck {
  double max_center_distance_ratio = 0.0;  // max |p - x_theta| / sqrt(lambda delta)
  bool box_contains_differences = true;
  double max_trivial_ratio = 0.0;  // max N_theta / (sqrt(lambda delta))^{d-1}
};

CapGeometryCheck check_cap_geometry(const CapDecomposition& decomp);

namespace reference {

/// Brute-force nearest center over the whole net.
CapDecomposition assign_points_brute(const LatticeShell& shell, const std::vector<CapCenter>& net,
                                     BoxConstants box = {});

}  // namespace reference

}  // namespace shellcap
