#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>

#include "shellcap/lattice.hpp"
#include "shellcap/linalg.hpp"
#include "shellcap/quadform.hpp"

namespace shellcap {

/// Finitely supported Fourier coefficients f(x) = sum_k a_k e^{2 pi i k.x}.
/// Zero amplitudes are never stored; iteration order is lexicographic.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<IntVec, std::complex<double>>& entries() const { return entries_; }

  /// Adds to the amplitude at k, erasing the entry if it cancels to zero.
  void add(const IntVec& k, std::complex<double> a);
  void set(const IntVec& k, std::complex<double> a);
  std::int64_t max_abs_freq() const;
  bool nonnegative() const;

  static CoefficientVector unit_on(const PointSet& points);

 private:
  int dim_ = 0;
  std::map<IntVec, std::complex<double>> entries_;
};

struct AxisPoint {
  double lambda = 0.0;
  RealVec xi0;  // Q(xi0) = 1, outward normal along e_d
};

/// The point of {Q = 1} with normal e_d, dilated so that lambda xi0^d = n.
AxisPoint find_axis_lambda(const QuadraticForm& q, std::int64_t n);

enum class Taper { SharpIndicator, FejerProduct };

struct KnappSpec {
  RealVec xi0;
  std::int64_t n = 1;
  double c = 0.25;
  Taper taper = Taper::SharpIndicator;
};

KnappSpec make_knapp_spec(const QuadraticForm& q, std::int64_t n, Taper taper = Taper::SharpIndicator);

struct KnappResult {
  CoefficientVector coeffs;
  double lambda = 0.0;
  double c_used = 0.0;
  /// Cuboid points still outside the shell after the halving budget.
  std::size_t dropped = 0;
  /// No lattice point in the cuboid; coeffs is the singleton at the nearest point.
  bool empty_cuboid = false;
};

/// Cuboid |xi^i - lambda xi0^i| < c sqrt(lambda delta) (i < d),
/// |xi^d - n| < c delta. c is halved (at most 10 times) until every cuboid
/// point lies within delta/2 of the surface; points that still fail the
/// strict shell test are dropped and counted.
KnappResult knapp_coefficients(const QuadraticForm& q, double lambda, double delta, const KnappSpec& spec);

struct RadialResult {
  CoefficientVector coeffs;
  double lambda = 0.0;
  bool empty_shell = false;
};

/// Unit coefficients on the sharp shell.
RadialResult radial_coefficients(const QuadraticForm& q, double lambda, double delta);

/// Scans lambda over [n-1, n+1] in steps of delta/2 and keeps the first
/// lambda with the largest shell count.
double optimize_radial_lambda(const QuadraticForm& q, std::int64_t n, double delta);

/// (1 + lambda delta)^{(d-1)/2 (1/2 - 1/p)}; p may be infinite.
double knapp_predicted_ratio(int d, double p, double lambda, double delta);

}  // namespace shellcap
