#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shellcap/caps.hpp"
#include "shellcap/linalg.hpp"

namespace shellcap {

/// Box norm |x|_theta = max_i |(frame x)_i| / half_widths_i; its unit ball is
/// the box R_theta.
class ThetaNorm {
 public:
  ThetaNorm(Matrix frame, RealVec half_widths);
  static ThetaNorm axis_box(RealVec half_widths);
  static ThetaNorm for_cap(const Cap& cap);

  int dim() const { return static_cast<int>(half_widths_.size()); }
  const Matrix& frame() const { return frame_; }
  const RealVec& half_widths() const { return half_widths_; }
  /// A with A R_theta = [-1, 1]^d.
  const Matrix& box_map() const { return box_map_; }

  double operator()(std::span<const double> x) const;
  double operator()(std::span<const std::int64_t> x) const;

 private:
  Matrix frame_;
  RealVec half_widths_;
  Matrix box_map_;
};

double theta_norm(const ThetaNorm& norm, std::span<const double> x);

inline constexpr std::size_t kSearchBudget = 10'000'000;

struct Minima {
  RealVec values;             // M_1 <= ... <= M_d
  std::vector<IntVec> witnesses;  // independent vectors attaining them
  bool exact = true;          // false on the reduction-only path (d > 4)
};

/// Successive minima of Z^d in the theta-norm. Exact for d <= 4 (pruned
/// enumeration); for 5 <= d <= 8 the theta-norms of an LLL basis, flagged
/// inexact. Throws SearchBudgetExceeded past kSearchBudget nodes.
Minima successive_minima(const ThetaNorm& norm, std::size_t budget = kSearchBudget);

/// Z^d basis adapted to the minima: span(x1..xi) contains the first i minima
/// witnesses and is primitive, so every lattice vector with norm below
/// M_{i+1} is an integer combination of x1..xi. Size-reduced in the theta-norm.
std::vector<IntVec> reduced_basis(const ThetaNorm& norm, std::size_t budget = kSearchBudget);

/// Basis built from given independent witnesses (exposed for testing).
std::vector<IntVec> adapted_basis(const std::vector<IntVec>& witnesses, const ThetaNorm& norm);

/// r_theta = #{i : M_i <= 1}.
int cap_rank(const ThetaNorm& norm, std::size_t budget = kSearchBudget);
int rank_from_minima(const RealVec& minima);

/// Exact determinant of a square integer matrix (rows); throws Overflow if
/// the result leaves int64.
std::int64_t exact_determinant(const std::vector<IntVec>& rows);

/// Generalized cross product of d-1 integer d-vectors:
/// v_i = (-1)^{i+1} * (minor deleting column i). Exact; throws Overflow for
/// inputs with a coordinate of magnitude >= 2^20 or a result outside int64.
IntVec wedge_vector(const std::vector<IntVec>& vectors);

/// Integer points of Z^d with |x|_theta <= radius (including 0).
std::size_t count_in_box(const ThetaNorm& norm, double radius = 1.0,
                         std::size_t budget = kSearchBudget);

struct Step2Audit {
  double size_ratio = 0.0;
  double angle_ratio = 0.0;
};

struct CapLattice {
  int cap_id = 0;
  Minima minima;
  std::vector<IntVec> basis;
  int r_theta = 0;
  IntVec wedge;
  std::int64_t basis_det = 0;
  std::size_t box_count = 0;  // #(Z^d cap R_theta)
  /// prod M_i * prod half_widths; Minkowski places it in [1/d!, 1].
  double minkowski_product = 0.0;
  /// box_count * prod_{i <= r} M_i.
  double step1_ratio = 0.0;
  std::optional<Step2Audit> step2;
};

/// Step-2 inequalities as ratios of measured to predicted size.
/// Throws RankOutOfRange unless 1 <= r_theta < d.
Step2Audit audit_step2(const Cap& cap, const ShellSpec& spec, const CapLattice& lat);

/// Full per-cap analysis; the Step-2 audit is filled when 1 <= r_theta < d.
CapLattice analyze_cap(const Cap& cap, const ShellSpec& spec, std::size_t budget = kSearchBudget);

/// analyze_cap over every populated cap, parallel over caps, ordered by id.
std::vector<CapLattice> analyze_caps(const CapDecomposition& decomp,
                                     std::size_t budget = kSearchBudget);

/// LLL reduction (rows are basis vectors) in the metric x^T G y.
std::vector<IntVec> lll_reduce(std::vector<IntVec> basis, const Matrix& gram, double factor = 0.99);

}  // namespace shellcap
