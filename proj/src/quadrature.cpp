#include "tacnode/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace tacnode::quad {

namespace {

struct ReferenceRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

ReferenceRule compute_reference(int n) {
  ReferenceRule r;
  r.x.resize(n);
  r.w.resize(n);
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        // one more derivative evaluation at the converged node
        p0 = 1.0;
        p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        break;
      }
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n & 1) r.x[n / 2] = 0.0;
  return r;
}

const ReferenceRule& reference(int n) {
  static std::map<int, ReferenceRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_reference(n)).first;
  return it->second;
}

void check_order(int order) {
  if (order < 1 || order > 4096) throw DomainError("quadrature order must be in [1, 4096]");
}

}  // namespace

double QuadRule::integrate(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  return acc;
}

void QuadRule::append(const QuadRule& other) {
  nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

cplx ContourRule::integrate(const std::function<cplx(cplx)>& f) const {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  return acc;
}

void ContourSpec::validate() const {
  if (!(radius > 0.0)) throw DomainError("contour radius must be positive");
  if (!(half_height >= 0.0)) throw DomainError("contour half_height must be non-negative");
  if (points < 2) throw DomainError("contour needs at least two points");
}

QuadRule gauss_legendre(int order, double a, double b) {
  check_order(order);
  if (!(b > a)) throw DomainError("gauss_legendre: need a < b");
  const ReferenceRule& ref = reference(order);
  QuadRule r;
  r.kind = RuleKind::segment;
  r.nodes.resize(order);
  r.weights.resize(order);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    r.nodes[i] = c + h * ref.x[i];
    r.weights[i] = h * ref.w[i];
  }
  return r;
}

QuadRule composite_gauss_legendre(int order, double a, double b, int panels) {
  if (panels < 1) throw DomainError("composite_gauss_legendre: need at least one panel");
  QuadRule r;
  r.kind = RuleKind::segment;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double hi = (p + 1 == panels) ? b : lo + h;
    r.append(gauss_legendre(order, lo, hi));
  }
  return r;
}

QuadRule panel_rule(int order, double a, double b, double max_width) {
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
  return composite_gauss_legendre(order, a, b, panels);
}

QuadRule semi_infinite_rule(int order, double a, double decay) {
  if (!(decay > 0.0)) throw DomainError("semi_infinite_rule: decay must be positive");
  QuadRule base = gauss_legendre(order, 0.0, 1.0);
  QuadRule r;
  r.kind = RuleKind::semi_infinite;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double u = base.nodes[i];
    r.nodes[i] = a - std::log1p(-u) / decay;
    r.weights[i] = base.weights[i] / (decay * (1.0 - u));
  }
  return r;
}

ContourRule circle_rule(double radius, int points) {
  if (!(radius > 0.0) || points < 1) throw DomainError("circle_rule: bad radius or point count");
  ContourRule r;
  r.kind = RuleKind::circle;
  r.nodes.resize(points);
  r.weights.resize(points);
  for (int j = 0; j < points; ++j) {
    cplx z = std::polar(radius, 2.0 * std::numbers::pi * j / points);
    r.nodes[j] = z;
    r.weights[j] = z / double(points);
  }
  return r;
}

ContourRule vertical_line_rule(double offset, double half_height, int panel_order, double panel_height) {
  if (!(half_height > 0.0)) throw DomainError("vertical_line_rule: half_height must be positive");
  QuadRule ys = panel_rule(panel_order, -half_height, half_height, panel_height);
  ContourRule r;
  r.kind = RuleKind::vertical_line;
  r.nodes.resize(ys.size());
  r.weights.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    r.nodes[i] = cplx(offset, ys.nodes[i]);
    r.weights[i] = ys.weights[i] / (2.0 * std::numbers::pi);
  }
  return r;
}

double gaussian_half_height(double rate, double floor) {
  if (!(rate > 0.0)) throw TailError("integrand does not decay along the vertical line");
  return std::sqrt(-std::log(floor) / rate);
}

cplx circle_integral(const std::function<cplx(cplx)>& f, const ContourSpec& spec, const Tolerance& tol) {
  spec.validate();
  int n = spec.points;
  cplx prev = circle_rule(spec.radius, n).integrate(f);
  for (int attempt = 0; attempt < 2; ++attempt) {
    n *= 2;
    cplx cur = circle_rule(spec.radius, n).integrate(f);
    if (tol.accepts(std::abs(cur - prev), std::abs(cur))) return cur;
    prev = cur;
  }
  throw ConvergenceError("circle_integral: no agreement after doubling the node count twice");
}

cplx vertical_line_integral(const std::function<cplx(cplx)>& f, const ContourSpec& spec, const Tolerance& tol) {
  spec.validate();
  double height = spec.half_height > 0.0 ? spec.half_height : gaussian_half_height(spec.offset);
  int order = std::max(8, std::min(spec.points, 32));
  ContourRule rule = vertical_line_rule(spec.offset, height, order, 0.5);
  cplx value = rule.integrate(f);

  // Estimate the Gaussian rate from |f| at the two ends and bound the tails.
  double tail = 0.0;
  for (double sgn : {-1.0, 1.0}) {
    double y1 = sgn * height, y0 = sgn * 0.875 * height;
    double f1 = std::abs(f(cplx(spec.offset, y1)));
    if (f1 == 0.0) continue;
    double f0 = std::abs(f(cplx(spec.offset, y0)));
    double rate = std::log(f0 / f1) / (y1 * y1 - y0 * y0);
    if (!(rate > 0.0))
      throw TailError("vertical_line_integral: integrand is not decaying at the truncation height");
    tail += f1 / (2.0 * rate * height) / (2.0 * std::numbers::pi);
  }
  if (tail > tol.abs_tol)
    throw TailError("vertical_line_integral: discarded tail " + std::to_string(tail) + " exceeds tolerance");
  return value;
}

}  // namespace tacnode::quad
