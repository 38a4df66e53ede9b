#pragma once

#include <functional>
#include <vector>

#include "tacnode/core.hpp"

namespace tacnode::quad {

enum class RuleKind { circle, segment, semi_infinite, vertical_line };

// Rule on a real range: sum_i weights[i] f(nodes[i]) approximates the integral.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::segment;

  std::size_t size() const { return nodes.size(); }
  double integrate(const std::function<double(double)>& f) const;
  void append(const QuadRule& other);
};

// Rule on a complex contour. The weights already contain dz / (2 pi i), so
// sum_i weights[i] f(nodes[i]) approximates (1/2 pi i) \int f(z) dz.
struct ContourRule {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
  RuleKind kind = RuleKind::circle;

  std::size_t size() const { return nodes.size(); }
  cplx integrate(const std::function<cplx(cplx)>& f) const;
};

// Circle |z| = radius, or vertical line Re u = offset truncated at
// |Im u| <= half_height (0 selects a Gaussian-floor default).
struct ContourSpec {
  double radius = 1.0;
  double offset = 0.5;
  double half_height = 0.0;
  int points = 64;

  void validate() const;
};

QuadRule gauss_legendre(int order, double a, double b);
QuadRule composite_gauss_legendre(int order, double a, double b, int panels);
// Panels of width at most max_width, each with the given order.
QuadRule panel_rule(int order, double a, double b, double max_width);

// [a, inf) via x = a - log(1 - u) / decay with Gauss-Legendre in u.
QuadRule semi_infinite_rule(int order, double a, double decay);

ContourRule circle_rule(double radius, int points);

// Re u = offset, |Im u| <= half_height, Gauss-Legendre panels of height at
// most panel_height.
ContourRule vertical_line_rule(double offset, double half_height, int panel_order,
                               double panel_height = 1.0);

// Height at which exp(-rate y^2) has fallen below floor.
double gaussian_half_height(double rate, double floor = 1e-18);

// Trapezoid rule on the circle with the node count doubled until two
// successive values agree; ConvergenceError after two failed doublings.
cplx circle_integral(const std::function<cplx(cplx)>& f, const ContourSpec& spec, const Tolerance& tol);

// (1/2 pi i) \int_{offset + i R} f(u) du for f with Gaussian decay along the
// line. TailError when the discarded tails may exceed tol.abs_tol.
cplx vertical_line_integral(const std::function<cplx(cplx)>& f, const ContourSpec& spec,
                            const Tolerance& tol);

}  // namespace tacnode::quad
