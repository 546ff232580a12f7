#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shellcap {

/// Exponents of the projector problem at (d, p); p = inf is 1/p = 0.
struct ExponentSet {
  int d = 3;
  double p = 4.0;
  double sigma = 0.0;
  double p_st = 0.0;
  double p_star = 0.0;  // inf for d = 2
  double p_tilde_inv = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> e_p;  // d >= 3 only
};

ExponentSet exponents(int d, double p);

enum class Dominant { Knapp, Radial };
std::string to_string(Dominant t);

struct ConjectureValue {
  double value = 0.0;
  double knapp_term = 0.0;
  double radial_term = 0.0;
  Dominant dominant = Dominant::Knapp;
};

/// (lambda delta)^{(d-1)/2 (1/2 - 1/p)} + lambda^{sigma/2} delta^{1/2}.
/// Throws RangeViolation for delta < 1/lambda.
ConjectureValue conjecture_rhs(int d, double p, double lambda, double delta);

/// Euclidean benchmark: lambda^{sigma/2} delta^{1/2} for p >= p_ST, else
/// lambda^{(d-1)/2 (1/2-1/p)} delta^{(d+1)/2 (1/2-1/p)}.
double euclid_rhs(int d, double p, double lambda, double delta);

enum class Variant { Full, Simple };

inline constexpr double kDefaultEpsilon = 0.01;

/// Right-hand side of the main theorem. Throws RangeViolation unless
/// p >= p_ST and delta > lambda^{-(d-1)/(d+1)}.
double thm_main_rhs(int d, double p, double lambda, double delta, Variant variant,
                    double epsilon = kDefaultEpsilon);

enum class Theorem { ThmPST, ThmLargeDelta, CorPStar, ThmD3 };
std::string to_string(Theorem t);

struct Coverage {
  std::vector<Theorem> covered;  // in enum order
  std::map<std::string, double> thresholds;  // lambda-exponents of delta
  bool landau_ok = false;  // delta > lambda^{-(d-1)/(d+1)}
};

/// Which results certify the conjecture at (d, p, lambda, delta). All
/// comparisons are made on log(delta)/log(lambda). Requires lambda > 1.
Coverage coverage(int d, double p, double lambda, double delta);

/// Exponent t such that the large-delta theorem needs delta > lambda^t.
double large_delta_exponent(int d, double p);
/// min of the two d = 3 exponents (before the delta >= lambda^{-1/2} cap).
double d3_min_exponent(double p);

/// Square of a 2 -> p norm: the L^{p'} -> L^p bound for the squared cutoff.
double duality_square(double norm_2_to_p);

struct KnownExponent {
  std::string label;
  int num = 0;
  int den = 1;
  std::string log_power;  // e.g. "18627/8320", empty when none
  std::string source;
  double value() const { return static_cast<double>(num) / den; }
};

struct ErrorExponentTable {
  int d = 2;
  KnownExponent conjectured;
  KnownExponent best_known;
};

ErrorExponentTable known_error_exponents(int d, bool rational);

struct Fit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log x, log y). Throws DegenerateInput for fewer than
/// three samples, repeated x, or non-positive values.
Fit fit_exponent(std::span<const std::pair<double, double>> samples);

/// lambda-exponent of the bound for P_{lambda,1/lambda} with p >= p_ST:
/// d/(d+1) (alpha/2 + d beta/2 - sqrt(alpha beta)).
double eigenfunction_exponent(int d, double p);

struct BoundReport {
  int d = 3;
  double p = 4.0;
  double lambda = 0.0;
  double delta = 0.0;
  ExponentSet exps;
  ConjectureValue conjecture;
  double euclid = 0.0;
  std::optional<double> thm_main;         // empty when out of range
  std::optional<double> thm_main_simple;  // empty when out of range
  Coverage cov;
  double epsilon = kDefaultEpsilon;
};

BoundReport bound_report(int d, double p, double lambda, double delta, double epsilon = kDefaultEpsilon);

}  // namespace shellcap
