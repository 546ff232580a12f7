#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "shellcap/error.hpp"
#include "shellcap/gon.hpp"
#include "shellcap/parallel.hpp"

using namespace shellcap;

namespace {

Cap random_cap(std::mt19937_64& rng, int d, double lambda, double delta) {
  std::normal_distribution<double> g;
  Cap c;
  c.normal.resize(static_cast<std::size_t>(d));
  for (auto& x : c.normal) x = g(rng);
  const double n = norm2(c.normal);
  for (auto& x : c.normal) x /= n;
  c.center = c.normal;
  for (auto& x : c.center) x *= lambda;
  c.half_widths.assign(static_cast<std::size_t>(d), 2.0 * std::sqrt(lambda * delta));
  c.half_widths[0] = 8.0 * delta;
  return c;
}

/// Rank of integer vectors by Gaussian elimination in long double.
int rank_of(std::vector<oracle::Point> rows) {
  if (rows.empty()) return 0;
  const std::size_t d = rows[0].size();
  std::vector<std::vector<long double>> m;
  for (const auto& r : rows) m.emplace_back(r.begin(), r.end());
  int rank = 0;
  for (std::size_t col = 0; col < d && rank < static_cast<int>(m.size()); ++col) {
    std::size_t piv = static_cast<std::size_t>(rank);
    for (std::size_t i = piv; i < m.size(); ++i)
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    if (std::abs(m[piv][col]) < 1e-9L) continue;
    std::swap(m[piv], m[static_cast<std::size_t>(rank)]);
    for (std::size_t i = static_cast<std::size_t>(rank) + 1; i < m.size(); ++i) {
      const long double f = m[i][col] / m[static_cast<std::size_t>(rank)][col];
      for (std::size_t j = col; j < d; ++j) m[i][j] -= f * m[static_cast<std::size_t>(rank)][j];
    }
    ++rank;
  }
  return rank;
}

/// Brute-force minima: scan the box that contains radius * R_theta.
std::vector<double> brute_minima(const ThetaNorm& norm, double radius) {
  const int d = norm.dim();
  double extent = 0.0;
  for (double h : norm.half_widths()) extent += h * h;
  const auto b = static_cast<std::int64_t>(std::ceil(radius * std::sqrt(extent))) + 1;
  std::vector<std::pair<double, oracle::Point>> cands;
  oracle::box(d, b, [&](const oracle::Point& x) {
    if (std::all_of(x.begin(), x.end(), [](auto v) { return v == 0; })) return;
    const double v = norm(std::span<const std::int64_t>(x));
    if (v <= radius) cands.emplace_back(v, x);
  });
  std::sort(cands.begin(), cands.end());
  std::vector<oracle::Point> chosen;
  std::vector<double> out;
  for (const auto& [v, x] : cands) {
    auto trial = chosen;
    trial.push_back(x);
    if (rank_of(trial) == static_cast<int>(trial.size())) {
      chosen = trial;
      out.push_back(v);
      if (static_cast<int>(out.size()) == d) break;
    }
  }
  return out;
}

std::int64_t idot(const IntVec& a, const IntVec& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("theta-norm of the axis box") {
  const auto n = ThetaNorm::axis_box({1.0, 2.0, 4.0});
  const double x[3] = {0.5, -2.0, 1.0};
  CHECK(n(std::span<const double>(x)) == doctest::Approx(1.0));
  const auto m = successive_minima(ThetaNorm::axis_box({1.0, 1.0, 1.0}));
  for (double v : m.values) CHECK(v == doctest::Approx(1.0));
  CHECK(m.exact);
  const auto basis = reduced_basis(ThetaNorm::axis_box({1.0, 1.0, 1.0}));
  for (const auto& v : basis) {
    int nonzero = 0;
    for (auto c : v) nonzero += c != 0 && std::abs(c) == 1;
    CHECK(nonzero == 1);
  }
  CHECK(std::abs(exact_determinant(basis)) == 1);
  CHECK(cap_rank(ThetaNorm::axis_box({1.0, 1.0, 1.0})) == 3);
}

TEST_CASE("wedge vector examples") {
  CHECK(wedge_vector({{1, 0, 0}, {0, 1, 0}}) == IntVec{0, 0, 1});
  CHECK(wedge_vector({{1, 1, 0}, {0, 1, 1}}) == IntVec{1, -1, 1});
  CHECK(wedge_vector({{3, 4}}) == IntVec{4, -3});
  CHECK(wedge_vector({{1, 2, 3}, {2, 4, 6}}) == IntVec{0, 0, 0});
  CHECK_THROWS_AS(wedge_vector({{1 << 20, 0, 0}, {0, 1, 0}}), Error);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> u(-1000, 1000);
  for (int t = 0; t < 50; ++t) {
    std::vector<IntVec> vs(3, IntVec(4));
    for (auto& v : vs)
      for (auto& c : v) c = u(rng);
    const IntVec w = wedge_vector(vs);
    for (const auto& v : vs) CHECK(idot(v, w) == 0);
  }
}

TEST_CASE("exact determinant with wide intermediates") {
  const std::int64_t a = std::int64_t{1} << 30;
  // L * U with unit diagonals; entries near 2^60, determinant 1.
  const std::vector<IntVec> l{{1, 0, 0}, {a, 1, 0}, {a, a, 1}};
  const std::vector<IntVec> u{{1, a, a}, {0, 1, a}, {0, 0, 1}};
  std::vector<IntVec> m(3, IntVec(3, 0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) m[i][j] += l[i][k] * u[k][j];
  CHECK(exact_determinant(m) == 1);
  CHECK(exact_determinant({{2, 1}, {1, 1}}) == 1);
  CHECK(exact_determinant({{0, 1}, {1, 0}}) == -1);
  CHECK(exact_determinant({{1, 2}, {2, 4}}) == 0);
  const std::int64_t big = std::int64_t{1} << 40;
  CHECK_THROWS_AS(exact_determinant({{big, 0}, {0, big}}), Error);
}

TEST_CASE("successive minima agree with brute force on random caps") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ul(5.0, 30.0), ud(0.05, 0.6);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 2;
    const Cap cap = random_cap(rng, d, ul(rng), ud(rng));
    const ThetaNorm norm = ThetaNorm::for_cap(cap);
    const Minima m = successive_minima(norm);
    REQUIRE(m.values.size() == static_cast<std::size_t>(d));
    const auto brute = brute_minima(norm, m.values.back() * (1.0 + 1e-9));
    REQUIRE(brute.size() == static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) CHECK(m.values[i] == doctest::Approx(brute[i]).epsilon(1e-9));
    // Minkowski's second theorem for a box.
    double prod = 1.0, hw = 1.0;
    for (int i = 0; i < d; ++i) {
      prod *= m.values[i];
      hw *= cap.half_widths[i];
    }
    CHECK(prod * hw >= 1.0 / std::tgamma(d + 1.0) - 1e-9);
    CHECK(prod * hw <= 1.0 + 1e-9);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("adapted basis: unimodular and nested spans") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ul(10.0, 80.0), ud(0.05, 0.5);
  for (int t = 0; t < 40; ++t) {
    const Cap cap = random_cap(rng, 3, ul(rng), ud(rng));
    const ThetaNorm norm = ThetaNorm::for_cap(cap);
    const Minima m = successive_minima(norm);
    const auto basis = adapted_basis(m.witnesses, norm);
    CHECK(std::abs(exact_determinant(basis)) == 1);
    // w1 parallel to x1; w1, w2 orthogonal to x1 ^ x2.
    const IntVec v = wedge_vector({basis[0], basis[1]});
    CHECK(idot(v, m.witnesses[0]) == 0);
    CHECK(idot(v, m.witnesses[1]) == 0);
    const IntVec c = {basis[0][1] * m.witnesses[0][2] - basis[0][2] * m.witnesses[0][1],
                      basis[0][2] * m.witnesses[0][0] - basis[0][0] * m.witnesses[0][2],
                      basis[0][0] * m.witnesses[0][1] - basis[0][1] * m.witnesses[0][0]};
    CHECK(c == IntVec{0, 0, 0});
  }
}

TEST_CASE("count_in_box against brute force") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Cap cap = random_cap(rng, 3, 20.0 + t, 0.3);
    const ThetaNorm norm = ThetaNorm::for_cap(cap);
    std::size_t brute = 0;
    double extent = 0.0;
    for (double h : norm.half_widths()) extent += h * h;
    const auto b = static_cast<std::int64_t>(std::ceil(std::sqrt(extent))) + 1;
    oracle::box(3, b, [&](const oracle::Point& x) {
      if (norm(std::span<const std::int64_t>(x)) <= 1.0 + 1e-12) ++brute;
    });
    CHECK(count_in_box(norm) == brute);
  }
}

TEST_CASE("rank and the Step-2 precondition") {
  CHECK(rank_from_minima({0.5, 0.9, 1.5}) == 2);
  CHECK(rank_from_minima({1.0, 1.0}) == 2);
  const ShellSpec spec{10.0, 0.5, Cutoff::Sharp};
  Cap cap;
  cap.normal = {0.0, 0.0, 1.0};
  cap.center = {0.0, 0.0, 10.0};
  for (double w : {1.5, 0.4}) {
    cap.half_widths = {w, w, w};
    const CapLattice lat = analyze_cap(cap, spec);
    CHECK(lat.r_theta == (w > 1.0 ? 3 : 0));
    CHECK_FALSE(lat.step2.has_value());
    CHECK_THROWS_AS(audit_step2(cap, spec, lat), Error);
  }
}

TEST_CASE("LLL shortens a skewed basis") {
  const auto b = lll_reduce({{1, 0}, {1000, 1}}, Matrix::identity(2));
  for (const auto& v : b) CHECK(std::max(std::abs(v[0]), std::abs(v[1])) <= 1);
}

TEST_CASE("reduction-only path in d = 5") {
  const auto m = successive_minima(ThetaNorm::axis_box({1.0, 2.0, 0.5, 1.0, 3.0}));
  CHECK_FALSE(m.exact);
  CHECK(m.values.size() == 5);
  CHECK(std::is_sorted(m.values.begin(), m.values.end()));
  CHECK_THROWS_AS(successive_minima(ThetaNorm::axis_box(RealVec(9, 1.0))), Error);
}

TEST_CASE("search budget") {
  CHECK_THROWS_AS(count_in_box(ThetaNorm::axis_box({30.0, 30.0, 30.0}), 1.0, 100), Error);
}

TEST_CASE("cap analysis over a decomposition: exact wedges, determinism") {
  const double lambda = 60.0;
  const ShellSpec spec{lambda, 1.0 / std::sqrt(lambda), Cutoff::Sharp};
  const auto q = identity_form(3);
  const auto decomp = assign_points(enumerate_shell(q, spec), build_cap_net(q, spec));
  set_threads(1);
  const auto a = analyze_caps(decomp);
  set_threads(8);
  const auto b = analyze_caps(decomp);
  set_threads(0);
  REQUIRE(a.size() == b.size());
  REQUIRE_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cap_id == b[i].cap_id);
    CHECK(a[i].basis == b[i].basis);
    CHECK(a[i].minima.values == b[i].minima.values);
    CHECK(std::abs(a[i].basis_det) == 1);
    for (int k = 0; k < 2; ++k) CHECK(idot(a[i].wedge, a[i].basis[static_cast<std::size_t>(k)]) == 0);
    CHECK(a[i].minkowski_product >= 1.0 / 6.0 - 1e-9);
    CHECK(a[i].minkowski_product <= 1.0 + 1e-9);
  }
}
