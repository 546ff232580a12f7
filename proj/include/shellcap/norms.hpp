#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shellcap/extremal.hpp"
#include "shellcap/quadform.hpp"

namespace shellcap {

enum class NormMethod { Exact2, ExactInf, EnergyEven, QuadratureExact, GridApprox };

std::string to_string(NormMethod m);

struct NormResult {
  double value = 0.0;
  NormMethod method = NormMethod::Exact2;
  double error_bound = 0.0;  // 0 for exact methods
  int oversample = 0;        // grid methods only
  std::vector<std::int64_t> grid;  // per-axis grid lengths, grid methods only
};

inline constexpr std::size_t kMaxEnergySupport = 30'000;
inline constexpr double kMaxGridPoints = 2147483648.0;  // 2^31

NormResult l2_norm(const CoefficientVector& c);
/// sum a_k, attained at x = 0; throws NegativeCoefficient otherwise.
NormResult linf_nonneg(const CoefficientVector& c);
/// ||f||_4^4 as the sum of |pair-sum amplitudes|^2.
double l4_fourth(const CoefficientVector& c);
NormResult l4_energy(const CoefficientVector& c);

/// L^p norm from samples of f on a uniform grid, one length per axis after
/// recentering the frequencies (modulation leaves |f| unchanged). Even
/// integer p with M_i >= p h_i + 1 (h_i the recentered half-extent) is
/// tagged QuadratureExact; otherwise GridApprox, with the error bound taken
/// as the change against a grid of half the oversampling. p may be infinite.
NormResult lp_norm_grid(const CoefficientVector& c, double p, int oversample = 4);

/// Smallest length >= n whose prime factors are in {2, 3, 5, 7}.
std::int64_t fast_length(std::int64_t n);

/// ||f||_p / ||f||_2 with the cheapest exact method available: pair-sum
/// energy for p = 4 when N^2 does not exceed the quadrature grid size,
/// quadrature otherwise.
struct NormRatio {
  double ratio = 0.0;
  NormMethod method = NormMethod::Exact2;
  double error_bound = 0.0;  // relative
};
NormRatio norm_ratio(const CoefficientVector& c, double p);

enum class FamilyKind { Knapp, Radial, SingleCap, RandomSigns };

struct Family {
  FamilyKind kind = FamilyKind::Radial;
  int trials = 0;
  std::uint64_t seed = 0;
};

std::string to_string(const Family& f);
/// "knapp,radial,singlecap,random:TRIALS:SEED"; throws InvalidFamilies.
std::vector<Family> parse_families(const std::string& text);

struct FamilyRow {
  Family family;
  double ratio = 0.0;
  NormMethod method = NormMethod::Exact2;
  double error_bound = 0.0;
  std::size_t support = 0;
};

struct OpNormLower {
  double best_ratio = 0.0;
  std::string witness;
  std::vector<FamilyRow> rows;  // in family order
};

/// Lower bounds for ||P_{lambda,delta}||_{2->p} from coefficient vectors
/// supported in the shell. Knapp here is the set of shell points within
/// c sqrt(lambda delta) (c = 1/4) of lambda xi0 in the tangential
/// coordinates, so it is valid at any lambda. Empty family lists throw
/// InvalidFamilies.
OpNormLower opnorm_lower(const QuadraticForm& q, double lambda, double delta, double p,
                         const std::vector<Family>& families);

namespace reference {

/// f(x) by direct summation.
std::complex<double> evaluate(const CoefficientVector& c, std::span<const double> x);
/// Same grid and method tagging as lp_norm_grid, evaluated point by point.
NormResult lp_norm_direct(const CoefficientVector& c, double p, int oversample = 4);
/// Serial pair-sum energy with a single ordered map.
double l4_fourth_serial(const CoefficientVector& c);

}  // namespace reference

}  // namespace shellcap
