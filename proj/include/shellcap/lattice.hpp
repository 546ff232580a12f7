#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shellcap/quadform.hpp"

namespace shellcap {

enum class Cutoff { Sharp, SmoothBump };

/// Shell S_{lambda,delta}. Sharp uses the half-open convention
/// lambda - delta <= sqrt(Q(n)) < lambda + delta so adjacent shells tile.
struct ShellSpec {
  double lambda = 1.0;
  double delta = 0.5;
  Cutoff cutoff = Cutoff::Sharp;
};

/// Smooth bump: 1 on [-1/2, 1/2], 0 outside (-1, 1), C-infinity in between.
double bump(double t);

/// Flat storage for integer points of a fixed dimension.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const std::int64_t> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  void push_back(std::span<const std::int64_t> p) { coords_.insert(coords_.end(), p.begin(), p.end()); }
  void append(const PointSet& other) {
    coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
  }
  void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }

  /// Lexicographic sort (first coordinate most significant).
  void sort_lex();
  bool operator==(const PointSet& other) const = default;

 private:
  int dim_ = 0;
  std::vector<std::int64_t> coords_;
};

struct LatticeShell {
  ShellSpec spec;
  QuadraticForm form;
  PointSet points;
  /// Per-point bump weights in (0, 1]; empty for Sharp shells.
  std::vector<double> weights;
  /// Points whose membership was decided by exact rational evaluation because
  /// they fell inside the floating-point guard band.
  std::size_t exact_resolutions = 0;
};

/// Integer points of the shell, sorted lexicographically. Enumeration prunes
/// with the Cholesky factor (Fincke-Pohst) over x_d, ..., x_1 and parallelizes
/// over the outermost coordinate; output is independent of the thread count.
/// Throws Overflow when coordinates could leave the safe integer range.
LatticeShell enumerate_shell(const QuadraticForm& q, const ShellSpec& spec);

/// N(lambda) = #{n : Q(n) < lambda^2}, exact.
std::int64_t count_ball(const QuadraticForm& q, double lambda);

/// P(lambda) = N(lambda) - Vol(B_1) lambda^d.
double error_term(const QuadraticForm& q, double lambda);

/// N(lambda + delta) - N(lambda - delta); equals the Sharp shell cardinality.
std::int64_t shell_count_sharp(const QuadraticForm& q, double lambda, double delta);

struct ErrorRow {
  double lambda = 0.0;
  std::int64_t count = 0;
  double error = 0.0;
  /// |P(lambda)| / lambda^{d - 2d/(d+1)}.
  double normalized = 0.0;
};

/// One row per lambda, in input order (which must be ascending).
std::vector<ErrorRow> sweep_error(const QuadraticForm& q, std::span<const double> lambdas);

/// Landau exponent d - 2d/(d+1) for the error term.
double landau_error_exponent(int d);

namespace reference {

/// Serial full box scan; the oracle for enumerate_shell.
LatticeShell enumerate_shell_box(const QuadraticForm& q, const ShellSpec& spec);
std::int64_t count_ball_box(const QuadraticForm& q, double lambda);

}  // namespace reference

}  // namespace shellcap
