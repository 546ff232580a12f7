#include "shellcap/bounds.hpp"

#include <cmath>
#include <limits>

#include "shellcap/error.hpp"

namespace shellcap {

namespace {

constexpr double kTol = 1e-12;

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void check_dp(int d, double p) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "d must be >= 2");
  if (!(p >= 2.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 2");
}

void check_lambda_delta(double lambda, double delta) {
  if (!(lambda > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda and delta must be positive");
}

}  // namespace

ExponentSet exponents(int d, double p) {
  check_dp(d, p);
  const double ip = inv(p);
  ExponentSet e;
  e.d = d;
  e.p = p;
  e.sigma = d - 1 - 2.0 * d * ip;
  e.p_st = 2.0 * (d + 1) / (d - 1);
  e.p_star = d == 2 ? std::numeric_limits<double>::infinity() : 2.0 * d / (d - 2);
  e.p_tilde_inv = (d - 3) / (2.0 * (d - 1));
  e.alpha = 1.0 - 2.0 * ip;
  e.beta = 1.0 - e.p_st * ip;
  if (d >= 3) e.e_p = (d + 1.0) / (d - 1.0) * (ip - 1.0 / e.p_st) / (ip - e.p_tilde_inv);
  return e;
}

std::string to_string(Dominant t) { return t == Dominant::Knapp ? "Knapp" : "Radial"; }

ConjectureValue conjecture_rhs(int d, double p, double lambda, double delta) {
  check_dp(d, p);
  check_lambda_delta(lambda, delta);
  if (lambda * delta < 1.0 - kTol) throw Error(ErrorKind::RangeViolation, "conjecture needs delta >= 1/lambda");
  const ExponentSet e = exponents(d, p);
  ConjectureValue c;
  c.knapp_term = std::pow(lambda * delta, 0.5 * (d - 1) * (0.5 - inv(p)));
  c.radial_term = std::pow(lambda, e.sigma / 2.0) * std::sqrt(delta);
  c.value = c.knapp_term + c.radial_term;
  c.dominant = c.knapp_term >= c.radial_term ? Dominant::Knapp : Dominant::Radial;
  return c;
}

double euclid_rhs(int d, double p, double lambda, double delta) {
  check_dp(d, p);
  check_lambda_delta(lambda, delta);
  const ExponentSet e = exponents(d, p);
  if (p >= e.p_st) return std::pow(lambda, e.sigma / 2.0) * std::sqrt(delta);
  const double s = 0.5 - inv(p);
  return std::pow(lambda, 0.5 * (d - 1) * s) * std::pow(delta, 0.5 * (d + 1) * s);
}

double thm_main_rhs(int d, double p, double lambda, double delta, Variant variant, double epsilon) {
  check_dp(d, p);
  check_lambda_delta(lambda, delta);
  const ExponentSet e = exponents(d, p);
  if (p < e.p_st * (1.0 - kTol)) throw Error(ErrorKind::RangeViolation, "main theorem needs p >= p_ST");
  if (!(lambda > 1.0) || !(std::log(delta) / std::log(lambda) > -(d - 1.0) / (d + 1.0)))
    throw Error(ErrorKind::RangeViolation, "main theorem needs delta > lambda^{-(d-1)/(d+1)}");
  const double a = e.alpha, b = e.beta;
  const double dl = delta * lambda, ld = lambda / delta;
  const double leading = std::pow(lambda, e.sigma / 2.0) * std::sqrt(delta);
  const double le = std::pow(lambda, epsilon);
  const double pre = le * std::pow(dl, d * a / 4.0) * std::pow(ld, d * b / 4.0);
  const double last = le * std::pow(dl, d * a / 4.0) * std::pow(ld, -a / 4.0) * std::pow(delta, -d * b / 2.0);
  if (variant == Variant::Full) {
    double sum = 0.0;
    for (int k = 1; k <= d - 1; ++k) {
      if (!(std::pow(dl, (k - 1) / 2.0) * delta < 1.0)) continue;
      sum += std::pow(dl, -k * a / 4.0) * std::pow(ld, -d * b / (4.0 * k));
    }
    return leading + pre * sum + last;
  }
  double total = leading + last;
  const double omit = (a - d * b) / (a + d * b);
  if (!(std::log(delta) / std::log(lambda) > omit))
    total += pre * std::exp(-0.5 * std::sqrt(d * a * b * std::log(dl) * std::log(ld)));
  return total;
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::ThmPST: return "ThmPST";
    case Theorem::ThmLargeDelta: return "ThmLargeDelta";
    case Theorem::CorPStar: return "CorPStar";
    case Theorem::ThmD3: return "ThmD3";
  }
  return "?";
}

double large_delta_exponent(int d, double p) {
  const double ip = inv(p);
  const double pst = 2.0 * (d + 1) / (d - 1);
  return -((d - 1) - (d * pst - 2.0) * ip) / ((d + 1) - (d * pst + 2.0) * ip);
}

double d3_min_exponent(double p) {
  const double ip = inv(p);
  const double a = -(3.0 - 8.0 * ip) / (5.0 - 8.0 * ip);
  const double b = -(8.0 * ip - 1.0) / (5.0 - 16.0 * ip);
  return std::min(a, b);
}

Coverage coverage(int d, double p, double lambda, double delta) {
  check_dp(d, p);
  check_lambda_delta(lambda, delta);
  if (!(lambda > 1.0)) throw Error(ErrorKind::InvalidArgument, "coverage needs lambda > 1");
  const ExponentSet e = exponents(d, p);
  const double t = std::log(delta) / std::log(lambda);
  Coverage c;
  c.thresholds["conjecture_min"] = -1.0;
  c.thresholds["landau"] = -(d - 1.0) / (d + 1.0);
  c.thresholds["hickman_resolvent"] = -1.0 / 3.0 - d / (3.0 * (21.0 * d * d - d - 24.0));
  c.thresholds["resolvent_improvement"] = -1.0 + 2.0 * d / (5.0 * d - 4.0);
  c.landau_ok = t > c.thresholds["landau"] + kTol;
  const bool above_st = p >= e.p_st * (1.0 - kTol);
  if (above_st) c.thresholds["thm_large_delta"] = large_delta_exponent(d, p);
  if (d >= 3) c.thresholds["cor_p_star"] = -1.0 / (2.0 * d - 1.0);
  if (d == 3 && above_st) c.thresholds["thm_d3"] = std::max(d3_min_exponent(p), -0.5);

  if (!above_st && t >= -1.0 - kTol) c.covered.push_back(Theorem::ThmPST);
  if (above_st && t > c.thresholds["thm_large_delta"] + kTol) c.covered.push_back(Theorem::ThmLargeDelta);
  if (d >= 3 && std::abs(p - e.p_star) <= kTol * e.p_star && t >= c.thresholds["cor_p_star"] - kTol)
    c.covered.push_back(Theorem::CorPStar);
  if (d == 3 && above_st && t >= c.thresholds["thm_d3"] - kTol) c.covered.push_back(Theorem::ThmD3);
  return c;
}

double duality_square(double norm_2_to_p) {
  if (!(norm_2_to_p >= 0.0)) throw Error(ErrorKind::InvalidArgument, "norm must be >= 0");
  return norm_2_to_p * norm_2_to_p;
}

ErrorExponentTable known_error_exponents(int d, bool rational) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "d must be >= 2");
  ErrorExponentTable t;
  t.d = d;
  switch (d) {
    case 2:
      t.conjectured = {"conjectured", 1, 2, "", "Gauss circle conjecture (up to lambda^eps)"};
      t.best_known = {"best_known", 131, 208, "18627/8320", "Huxley 2003"};
      break;
    case 3:
      t.conjectured = {"conjectured", 1, 1, "", "Nowak 2014 (up to lambda^eps)"};
      t.best_known = rational ? KnownExponent{"best_known", 21, 16, "", "Chamizo-Cristobal-Ubis (rational forms)"}
                              : KnownExponent{"best_known", 231, 158, "", "Guo 2012"};
      break;
    case 4:
      t.conjectured = {"conjectured", 2, 1, "", "sharp up to the log power for the identity form"};
      t.best_known = {"best_known", 2, 1, "2/3", "Walfisz 1960"};
      break;
    default:
      t.conjectured = {"conjectured", d - 2, 1, "", "sharp for multiples of rational forms"};
      t.best_known = {"best_known", d - 2, 1, "", "Kraetzel 2000"};
      break;
  }
  return t;
}

Fit fit_exponent(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) throw Error(ErrorKind::DegenerateInput, "need at least 3 samples");
  const double n = static_cast<double>(samples.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : samples) {
    if (!(x > 0.0) || !(y > 0.0)) throw Error(ErrorKind::DegenerateInput, "samples must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : samples) {
    const double u = std::log(x) - mx, v = std::log(y) - my;
    sxx += u * u;
    sxy += u * v;
    syy += v * v;
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j)
      if (samples[i].first == samples[j].first) throw Error(ErrorKind::DegenerateInput, "repeated x value");
  Fit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

double eigenfunction_exponent(int d, double p) {
  const ExponentSet e = exponents(d, p);
  if (p < e.p_st * (1.0 - kTol)) throw Error(ErrorKind::RangeViolation, "needs p >= p_ST");
  const double root = e.beta <= 0.0 ? 0.0 : std::sqrt(e.alpha * e.beta);
  return d / (d + 1.0) * (0.5 * e.alpha + 0.5 * d * e.beta - root);
}

BoundReport bound_report(int d, double p, double lambda, double delta, double epsilon) {
  BoundReport r;
  r.d = d;
  r.p = p;
  r.lambda = lambda;
  r.delta = delta;
  r.epsilon = epsilon;
  r.exps = exponents(d, p);
  r.conjecture = conjecture_rhs(d, p, lambda, delta);
  r.euclid = euclid_rhs(d, p, lambda, delta);
  try {
    r.thm_main = thm_main_rhs(d, p, lambda, delta, Variant::Full, epsilon);
    r.thm_main_simple = thm_main_rhs(d, p, lambda, delta, Variant::Simple, epsilon);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RangeViolation) throw;
  }
  r.cov = coverage(d, p, lambda, delta);
  return r;
}

}  // namespace shellcap
