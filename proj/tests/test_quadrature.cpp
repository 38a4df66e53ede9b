#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tacnode/quadrature.hpp"
#include "tacnode/specfun.hpp"

using namespace tacnode;
using namespace tacnode::quad;

TEST_CASE("circle integral of 1/z is 1") {
  ContourSpec spec;
  spec.radius = 1.0;
  spec.points = 8;
  cplx v = circle_integral([](cplx z) { return 1.0 / z; }, spec, {});
  CHECK(std::abs(v - 1.0) < 1e-15);
}

TEST_CASE("circle rule reproduces Bessel coefficients") {
  for (auto [n, t] : {std::pair{3, 1.0}, {0, 2.5}, {-2, 0.7}}) {
    auto fi = [&](cplx z) { return std::exp(t * (z + 1.0 / z)) / std::pow(z, n + 1); };
    auto fj = [&](cplx z) { return std::exp(t * (z - 1.0 / z)) / std::pow(z, n + 1); };
    ContourSpec spec;
    spec.points = 32;
    cplx vi = circle_integral(fi, spec, {1e-14, 1e-14});
    cplx vj = circle_integral(fj, spec, {1e-14, 1e-14});
    CHECK(std::abs(vi.real() - specfun::bessel_i(n, 2 * t)) < 1e-13 * specfun::bessel_i(0, 2 * t));
    CHECK(std::abs(vi.imag()) < 1e-13);
    CHECK(std::abs(vj.real() - specfun::bessel_j(n, 2 * t)) < 1e-13);
  }
}

TEST_CASE("circle trapezoid converges spectrally") {
  auto f = [](cplx z) { return std::exp(2.0 * (z - 1.0 / z)) / (z * z * z); };
  double exact = specfun::bessel_j(2, 4.0);
  double prev = 1.0;
  for (int n : {8, 12, 16, 20}) {
    double err = std::abs(circle_rule(1.0, n).integrate(f).real() - exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("circle_integral reports non-convergence") {
  ContourSpec spec;
  spec.radius = 1.0;
  spec.points = 4;
  // pole at distance 1e-3 from the contour cannot be resolved with 16 points
  auto f = [](cplx z) { return 1.0 / (z - 0.999); };
  CHECK_THROWS_AS(circle_integral(f, spec, {1e-14, 1e-14}), ConvergenceError);
}

TEST_CASE("Gauss-Legendre exactness and weights") {
  for (int n : {1, 2, 5, 16, 64}) {
    QuadRule r = gauss_legendre(n, -1.0, 1.0);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(std::abs(wsum - 2.0) < 1e-13);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double got = r.integrate([&](double x) { return std::pow(x, d); });
      double exact = (d % 2) ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(got - exact) < 1e-13);
    }
  }
  QuadRule r = gauss_legendre(8, 0.0, 1.0);
  CHECK(std::abs(r.integrate([](double x) { return std::exp(x); }) - (std::exp(1.0) - 1.0)) < 1e-15);
  QuadRule c = composite_gauss_legendre(8, 0.0, 3.0, 3);
  CHECK(c.size() == 24);
  CHECK(std::abs(c.integrate([](double x) { return std::exp(x); }) - (std::exp(3.0) - 1.0)) < 1e-13);
  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), DomainError);
}

TEST_CASE("semi-infinite rule") {
  QuadRule r = semi_infinite_rule(32, 0.0, 1.0);
  CHECK(std::abs(r.integrate([](double x) { return std::exp(-x); }) - 1.0) < 1e-14);
  QuadRule ai = semi_infinite_rule(64, 0.0, 0.5);
  double v = ai.integrate([](double x) { return specfun::airy_ai(std::min(x, 200.0)); });
  CHECK(std::abs(v - 1.0 / 3.0) < 1e-8);
  QuadRule ai2 = semi_infinite_rule(128, 0.0, 0.5);
  double v2 = ai2.integrate([](double x) { return specfun::airy_ai(std::min(x, 200.0)); });
  CHECK(std::abs(v2 - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("vertical line integral reproduces Airy functions") {
  ContourSpec spec;
  spec.offset = 1.0;
  spec.points = 16;
  Tolerance tol{1e-12, 1e-12};
  for (double x : {-1.0, 0.0, 1.0, 2.0}) {
    cplx v = vertical_line_integral([&](cplx u) { return std::exp(u * u * u / 3.0 - u * x); }, spec, tol);
    CHECK(std::abs(v.real() - specfun::airy_ai(x)) < 1e-12);
    CHECK(std::abs(v.imag()) < 1e-13);
  }
  double s = 0.3, x = -0.5;
  cplx v = vertical_line_integral(
      [&](cplx u) { return std::exp(u * u * u / 3.0 + s * u * u - u * x); }, spec, tol);
  CHECK(std::abs(v.real() - specfun::airy_ai_shift(s, x)) < 1e-9);
  // offset independence
  spec.offset = 0.6;
  spec.half_height = 9.0;
  cplx w = vertical_line_integral([&](cplx u) { return std::exp(u * u * u / 3.0 - u); }, spec, tol);
  CHECK(std::abs(w.real() - specfun::airy_ai(1.0)) < 1e-10);
}

TEST_CASE("vertical line integral detects a large tail") {
  ContourSpec spec;
  spec.offset = 1.0;
  spec.half_height = 2.0;
  CHECK_THROWS_AS(vertical_line_integral([](cplx u) { return std::exp(u * u * u / 3.0); }, spec, {}),
                  TailError);
  spec.half_height = 0.0;
  spec.offset = -1.0;
  CHECK_THROWS_AS(vertical_line_integral([](cplx u) { return std::exp(u * u * u / 3.0); }, spec, {}),
                  TailError);
}

TEST_CASE("rules are deterministic") {
  QuadRule a = gauss_legendre(37, -2.0, 5.0), b = gauss_legendre(37, -2.0, 5.0);
  CHECK(a.nodes == b.nodes);
  CHECK(a.weights == b.weights);
}

TEST_CASE("interchanging nested circle contours picks up the diagonal residue") {
  auto F = [](cplx z, cplx w) { return (1.0 + z * z * w) / (z * (3.0 - w) * (3.0 - z)); };
  auto nested = [&](double rz, double rw, bool w_outer) {
    ContourRule cz = circle_rule(rz, 128), cw = circle_rule(rw, 128);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < cz.size(); ++i)
      for (std::size_t j = 0; j < cw.size(); ++j) {
        cplx z = cz.nodes[i], w = cw.nodes[j];
        acc += cz.weights[i] * cw.weights[j] * F(z, w) / (w - z);
      }
    (void)w_outer;
    return acc;
  };
  cplx lhs = nested(0.9, 1.1, true);   // w encloses z
  cplx rhs = nested(1.1, 0.9, false);  // z encloses w
  cplx diag = circle_rule(1.0, 128).integrate([&](cplx z) { return F(z, z); });
  CHECK(std::abs(lhs - (rhs + diag)) < 1e-10);
}
