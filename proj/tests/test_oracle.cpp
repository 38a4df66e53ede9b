#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "tacnode/finite_kernel.hpp"
#include "tacnode/oracle.hpp"

using namespace tacnode;
using namespace tacnode::oracle;
using finite::FiniteModel;
using finite::GapMode;

namespace {

double in(long n, double x) { return boost::math::cyl_bessel_i(double(n), x); }

}  // namespace

TEST_CASE("Karlin-McGregor weights") {
  FiniteModel m0{0.5, 0};
  for (long y = -3; y <= 3; ++y) CHECK(km_weight(m0, {y}) == doctest::Approx(in(y, 1.0) * in(y, 1.0)).epsilon(1e-14));
  FiniteModel m1{1.0, 1};
  double w = km_weight(m1, {-1, 0, 1});
  CHECK(w > 0.0);
  // 3x3 determinant of I_{y_i + j - 1 - m}(2) by hand
  double a[3][3];
  long ys[3] = {-1, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = in(ys[i] + j - 1, 2.0);
  double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  CHECK(w == doctest::Approx(det * det).epsilon(1e-12));
  CHECK_THROWS_AS(km_weight(m1, {0, 0, 1}), DomainError);
  CHECK_THROWS_AS(km_weight(m1, {0, 1}), DomainError);
}

TEST_CASE("windows and guards") {
  FiniteModel model{1.0, 1};
  EnumerationWindow win = default_window(model, 1e-12);
  CHECK(win.hi - win.lo >= 2 * 9);
  CHECK(win.boundary_mass_bound < 1e-12);
  CHECK(boundary_mass(model, win.lo - 3, win.hi + 3) < win.boundary_mass_bound);
  EnumerationWindow small{-2, 2, 0.0};
  CHECK_THROWS_AS(brute_gap(model, small, {0}, GapMode::holes), DomainError);
  FiniteModel big{1.0, 1};
  EnumerationWindow wide{-40, 40, 0.0};
  CHECK_THROWS_AS(brute_gap_two_time(big, wide, -0.1, 0.1, {0}, {0}, GapMode::holes), DomainError);
  FiniteModel five{0.5, 2};
  CHECK_THROWS_AS(brute_gap_two_time(five, default_window(five), -0.1, 0.1, {0}, {0}, GapMode::holes), DomainError);
}

TEST_CASE("single-time enumeration") {
  FiniteModel model{0.5, 0};
  EnumerationWindow win = default_window(model);
  CHECK(brute_gap(model, win, {}, GapMode::particles) == 1.0);
  double num = 0.0, den = 0.0;
  for (long y = -40; y <= 40; ++y) {
    double v = in(y, 1.0) * in(y, 1.0);
    den += v;
    if (y != 0) num += v;
  }
  CHECK(std::abs(brute_gap(model, win, {0}, GapMode::particles) - num / den) < 1e-13);
  // one walker: no hole at 0 means the walker sits at 0
  CHECK(std::abs(brute_gap(model, win, {0}, GapMode::holes) - (1.0 - num / den)) < 1e-13);
  FiniteModel m1{1.0, 1};
  EnumerationWindow w1 = default_window(m1);
  double g = brute_gap(m1, w1, {0, 1}, GapMode::holes);
  CHECK(g > 0.0);
  CHECK(g < 1.0);
}

TEST_CASE("one-point function equals the kernel diagonal") {
  for (long m : {0L, 1L}) {
    FiniteModel model{1.0, m};
    finite::FiniteSystem sys(model);
    EnumerationWindow win = default_window(model);
    for (long x = -3; x <= 3; ++x) CHECK(std::abs(one_point(model, win, x) - sys.particle_kernel(x, x)) < 1e-8);
  }
}

TEST_CASE("two-time enumeration: marginals and continuity") {
  FiniteModel model{0.5, 0};
  EnumerationWindow win = default_window(model, 1e-12, {-0.3, 0.3});
  CHECK(brute_gap_two_time(model, win, -0.1, 0.1, {}, {}, GapMode::holes) == 1.0);
  // with no condition on slice 2 the slice-1 marginal is the one-time law
  EnumerationWindow w0 = default_window(model, 1e-12, {0.0, 0.2});
  CHECK(std::abs(brute_gap_two_time(model, w0, 0.0, 0.2, {0, 1}, {}, GapMode::particles) -
                 brute_gap(model, w0, {0, 1}, GapMode::particles)) < 1e-8);
  // nearly equal times: the event on E1 u E2 at one time
  double eps = 1e-3;
  double two = brute_gap_two_time(model, w0, -eps, 0.0, {0}, {1}, GapMode::particles);
  double one = brute_gap(model, w0, {0, 1}, GapMode::particles);
  CHECK(std::abs(two - one) < 1e-3);
}

TEST_CASE("Toeplitz determinants") {
  CHECK(toeplitz_h(0.5, 1) == doctest::Approx(std::exp(-1.0) * in(0, 2.0)).epsilon(1e-14));
  double prev = 0.0;
  for (long n = 1; n < 14; ++n) {
    double h = toeplitz_h(1.0, n);
    CHECK(h > prev);
    prev = h;
  }
  CHECK(toeplitz_h(1.0, 14) / toeplitz_h(1.0, 13) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(toeplitz_h(1.0, 0), DomainError);
}

TEST_CASE("A-matrix identity: sum_x phi_k phi_l = I_{k-l}(4t)") {
  double t = 1.0;
  long m = 1;
  for (long k = 1; k <= 3; ++k)
    for (long l = 1; l <= 3; ++l) {
      double s = 0.0;
      for (long x = -60; x <= 60; ++x) s += in(x + k - 1 - m, 2 * t) * in(x + l - 1 - m, 2 * t);
      CHECK(std::abs(s - in(k - l, 4 * t)) < 1e-10 * in(0, 4 * t));
    }
}

TEST_CASE("orthogonal polynomials on the circle") {
  double t = 1.0;
  std::vector<std::vector<double>> p;
  for (int k = 0; k <= 4; ++k) p.push_back(opuc_coefficients(t, k));
  for (int k = 0; k <= 4; ++k)
    for (int l = 0; l <= 4; ++l) {
      cplx ip = oracle_ref::circle_mean(
          [&](cplx z) {
            return std::exp(2 * t * (z + 1.0 / z)) * polynomial_value(p[k], z) * polynomial_value(p[l], 1.0 / z) / z;
          },
          1.0, 256);
      CHECK(std::abs(ip - (k == l ? 1.0 : 0.0)) < 1e-10);
    }
  // Christoffel-Darboux
  int n = 4;
  cplx z = std::polar(1.0, 0.7), w = std::polar(1.0, -1.9);
  cplx lhs = 0.0;
  for (int l = 0; l < n; ++l) lhs += polynomial_value(p[l], 1.0 / z) * polynomial_value(p[l], w);
  cplx rhs = (std::pow(z, -n) * polynomial_value(p[n], z) * std::pow(w, n) * polynomial_value(p[n], 1.0 / w) -
              polynomial_value(p[n], 1.0 / z) * polynomial_value(p[n], w)) /
             (1.0 - w / z);
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("polynomials from the Fredholm determinant") {
  FiniteModel model{1.0, 1};
  CHECK(opuc_check(model, 3, std::polar(1.0, std::numbers::pi / 3)) < 1e-8);
  for (long n : {1L, 2L, 5L})
    for (double th : {0.3, 2.5}) CHECK(opuc_check(model, n, std::polar(1.0, th)) < 1e-8);
  CHECK_THROWS_AS(opuc_check(model, 3, 0.5), DomainError);
}
