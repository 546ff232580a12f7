#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "shellcap/error.hpp"
#include "shellcap/lattice.hpp"
#include "shellcap/parallel.hpp"

using namespace shellcap;

namespace {

std::vector<oracle::Point> as_points(const PointSet& ps) {
  std::vector<oracle::Point> out;
  for (std::size_t i = 0; i < ps.size(); ++i) out.emplace_back(ps[i].begin(), ps[i].end());
  return out;
}

QuadraticForm random_form(std::mt19937_64& rng, int d, bool integer) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_int_distribution<int> ui(-1, 1);
  Matrix m = Matrix::identity(d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = integer ? 2 + ui(rng) + 1 : 1.0 + std::abs(u(rng)) * 2;
    for (int j = i + 1; j < d; ++j) {
      const double v = integer ? (ui(rng) == 1 ? 1.0 : 0.0) : u(rng);
      m(i, j) = m(j, i) = v;
    }
  }
  for (int i = 0; i < d; ++i) m(i, i) += d;  // diagonal dominance
  return make_form(d, m);
}

}  // namespace

TEST_CASE("enumerate_shell: small examples against the box-scan oracle") {
  const auto id2 = identity_form(2);
  const auto s = enumerate_shell(id2, {5.0, 0.01, Cutoff::Sharp});
  CHECK(s.points.size() == 12);
  CHECK(as_points(s.points) ==
        oracle::shell_points(oracle::identity_coeffs(2), 2, 6, 4.99L * 4.99L, 5.01L * 5.01L));

  CHECK(enumerate_shell(id2, {0.5, 0.4, Cutoff::Sharp}).points.empty());

  const auto s3 = enumerate_shell(identity_form(3), {std::sqrt(3.0), 0.01, Cutoff::Sharp});
  CHECK(s3.points.size() == 8);
  for (std::size_t i = 0; i < s3.points.size(); ++i)
    for (auto c : s3.points[i]) CHECK(std::abs(c) == 1);
}

TEST_CASE("count_ball: Gauss circle values") {
  const auto id2 = identity_form(2);
  const auto coeffs = oracle::identity_coeffs(2);
  CHECK(count_ball(id2, 1.5) == 9);
  CHECK(count_ball(id2, 5.0) == 69);
  CHECK(count_ball(id2, 5.001) == 81);
  CHECK(oracle::ball_count(coeffs, 2, 6, 25.0L) == 69);
  CHECK(oracle::ball_count(coeffs, 2, 6, 5.001L * 5.001L) == 81);

  const auto id3 = identity_form(3);
  CHECK(count_ball(id3, 2.0005) == 33);
  CHECK(oracle::ball_count(oracle::identity_coeffs(3), 3, 3, 2.0005L * 2.0005L) == 33);
}

TEST_CASE("error_term") {
  const auto id2 = identity_form(2);
  CHECK(error_term(id2, 5.0) == doctest::Approx(69 - 25 * std::numbers::pi));
  CHECK(error_term(id2, 0.1) == doctest::Approx(1 - std::numbers::pi * 0.01));
  const double l = 2.0005;
  CHECK(error_term(identity_form(3), l) ==
        doctest::Approx(33 - 4.0 * std::numbers::pi / 3.0 * l * l * l));
  CHECK_THROWS_AS(count_ball(id2, -1.0), Error);
}

TEST_CASE("shell_count_sharp") {
  const auto id2 = identity_form(2);
  CHECK(shell_count_sharp(id2, 5.0, 0.01) == 12);
  CHECK(shell_count_sharp(id2, 5.0, 4.999) == 304);
  CHECK(count_ball(id2, 9.999) == 305);
  CHECK(oracle::ball_count(oracle::identity_coeffs(2), 2, 10, 9.999L * 9.999L) == 305);
  CHECK(shell_count_sharp(id2, 0.5, 0.4) == 0);
  CHECK_THROWS_AS(shell_count_sharp(id2, 1.0, 1.0), Error);
}

TEST_CASE("sweep_error") {
  const auto id2 = identity_form(2);
  const double one[] = {5.0};
  auto rows = sweep_error(id2, one);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].count == 69);
  const double two[] = {1.5, 5.0};
  rows = sweep_error(id2, two);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].count == 9);
  CHECK(rows[1].count == 69);
  CHECK(rows[1].normalized == doctest::Approx(std::abs(rows[1].error) / std::pow(5.0, 2.0 / 3.0)));
  CHECK(sweep_error(id2, {}).empty());
  const double desc[] = {5.0, 1.0};
  CHECK_THROWS_AS(sweep_error(id2, desc), Error);
}

TEST_CASE("pruned enumeration equals the naive box scan point for point") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ul(1.0, 30.0);
  for (int trial = 0; trial < 24; ++trial) {
    const int d = 2 + trial % 3;
    const bool integer = trial % 2 == 0;
    const auto q = random_form(rng, d, integer);
    double lambda = ul(rng);
    if (d == 4) lambda = std::min(lambda, 9.0);
    const double delta = std::min(0.9 * lambda, std::uniform_real_distribution<double>(0.05, 2.0)(rng));
    const ShellSpec spec{lambda, delta, Cutoff::Sharp};
    const auto fast = enumerate_shell(q, spec);
    const auto slow = reference::enumerate_shell_box(q, spec);
    CHECK(fast.points == slow.points);
    CHECK(fast.points.size() == static_cast<std::size_t>(shell_count_sharp(q, lambda, delta)));
    CHECK(count_ball(q, lambda) == reference::count_ball_box(q, lambda));
  }
}

TEST_CASE("integer forms match the exact integer oracle, including boundary radii") {
  // 2x^2 + 2xy + 3y^2 takes the values 2, 3, 7, 8, ... exactly at the radii.
  Matrix m(2, 2);
  m(0, 0) = 2;
  m(0, 1) = m(1, 0) = 1;
  m(1, 1) = 3;
  const auto q = make_form(2, m);
  const std::vector<std::int64_t> coeffs = {2, 1, 1, 3};
  for (double r2 : {2.0, 3.0, 7.0, 8.0, 12.0, 27.0, 48.0}) {
    const double lambda = std::sqrt(r2);
    // lambda^2 is not exactly r2 in floating point, so compare against the
    // oracle on the exact double value.
    const long double lam = lambda;
    CHECK(count_ball(q, lambda) == oracle::ball_count(coeffs, 2, 10, lam * lam));
  }
}

TEST_CASE("shell symmetry, monotone counting and partition identity") {
  const auto q = identity_form(3);
  std::int64_t prev = 0;
  for (double l = 0.5; l < 12.0; l += 0.37) {
    const auto n = count_ball(q, l);
    CHECK(n >= prev);
    prev = n;
    const auto s = enumerate_shell(q, {l, 0.3 * l, Cutoff::Sharp});
    const auto pts = as_points(s.points);
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      oracle::Point neg;
      bool zero = true;
      for (auto c : s.points[i]) {
        neg.push_back(-c);
        zero = zero && c == 0;
      }
      if (!zero) ++nonzero;
      CHECK(std::binary_search(pts.begin(), pts.end(), neg));
    }
    CHECK(nonzero % 2 == 0);
    CHECK(static_cast<std::int64_t>(s.points.size()) == shell_count_sharp(q, l, 0.3 * l));
  }
}

TEST_CASE("adjacent half-open shells tile exactly") {
  const auto q = identity_form(2);
  const auto a = enumerate_shell(q, {4.5, 0.5, Cutoff::Sharp});  // [4, 5)
  const auto b = enumerate_shell(q, {5.5, 0.5, Cutoff::Sharp});  // [5, 6)
  CHECK(a.points.size() + b.points.size() ==
        static_cast<std::size_t>(count_ball(q, 6.0) - count_ball(q, 4.0)));
}

TEST_CASE("smooth bump cutoff") {
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(0.5) == 1.0);
  CHECK(bump(-1.0) == 0.0);
  CHECK(bump(0.75) == doctest::Approx(0.5));
  CHECK(bump(0.9) > 0.0);
  CHECK(bump(0.9) < bump(0.6));

  const auto q = identity_form(2);
  const auto s = enumerate_shell(q, {20.0, 1.0, Cutoff::SmoothBump});
  REQUIRE(s.weights.size() == s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const double r = std::sqrt(q.eval_int(s.points[i]));
    CHECK(std::abs(r - 20.0) <= 1.0);
    CHECK(s.weights[i] > 0.0);
    CHECK(s.weights[i] <= 1.0);
  }
}

TEST_CASE("enumeration is identical for every thread count") {
  const auto q = identity_form(3);
  set_threads(1);
  const auto a = enumerate_shell(q, {25.0, 0.5, Cutoff::Sharp});
  set_threads(8);
  const auto b = enumerate_shell(q, {25.0, 0.5, Cutoff::Sharp});
  set_threads(0);
  CHECK(a.points == b.points);
}

TEST_CASE("Landau consistency of the error term") {
  const auto q = identity_form(2);
  for (int k = 0; k <= 11; ++k) {
    const double l = std::ldexp(1.0, k);
    CHECK(std::abs(error_term(q, l)) <= 10.0 * std::pow(l, 2.0 / 3.0));
  }
}

TEST_CASE("overflow guard") {
  const auto q = identity_form(2);
  CHECK_THROWS_AS(count_ball(q, 1e13), Error);
}
