#include "tacnode/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tacnode::fredholm {

namespace {

double det_one_minus(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m.rows(), m.cols()) - m;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

double det_of(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

}  // namespace

double det_discrete(const DiscreteKernelSection& section) {
  if (section.entries.rows() != section.entries.cols())
    throw DomainError("det_discrete: section must be square");
  return det_one_minus(section.entries);
}

double det_discrete_converged(const std::function<double(long, long)>& entry, long start, long initial_size,
                              const Tolerance& tol, long max_size) {
  long size = std::max(1L, initial_size);
  auto build = [&](long n) {
    Eigen::MatrixXd m(n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) m(i, j) = entry(start + i, start + j);
    return det_one_minus(m);
  };
  double prev = build(size);
  while (size + 8 <= max_size) {
    size += 8;
    double cur = build(size);
    if (tol.accepts(cur - prev, cur)) return cur;
    prev = cur;
  }
  throw ConvergenceError("det_discrete_converged: section did not stabilise up to size " +
                         std::to_string(max_size));
}

std::vector<double> resolve_discrete(const DiscreteKernelSection& section, const std::vector<double>& rhs) {
  long n = section.size();
  if (static_cast<long>(rhs.size()) != n) throw DomainError("resolve_discrete: rhs length mismatch");
  if (n == 0) return {};
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - section.entries;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!(lu.rcond() > 1e-14)) throw SingularSystemError("resolve_discrete: 1 - M is numerically singular");
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n);
  Eigen::VectorXd x = lu.solve(b);
  // one step of iterative refinement
  x += lu.solve(b - a * x);
  double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  double residual = (a * x - b).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-12 * scale))
    throw ConvergenceError("resolve_discrete: residual " + std::to_string(residual) + " above 1e-12");
  return std::vector<double>(x.data(), x.data() + n);
}

quad::QuadRule region_rule(const Region& region, int order) {
  quad::QuadRule rule;
  for (const Interval& iv : region) {
    if (!(iv.hi > iv.lo)) throw DomainError("region intervals must have lo < hi");
    rule.append(quad::gauss_legendre(order, iv.lo, iv.hi));
  }
  return rule;
}

NystromSystem build_nystrom(const RealKernel& kernel, const Region& region, int order, bool symmetric) {
  NystromSystem sys;
  sys.rule = region_rule(region, order);
  sys.symmetrized = symmetric;
  long n = static_cast<long>(sys.rule.size());
  sys.matrix = Eigen::MatrixXd::Identity(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      double k = kernel(sys.rule.nodes[i], sys.rule.nodes[j]);
      double w = symmetric ? std::sqrt(sys.rule.weights[i] * sys.rule.weights[j]) : sys.rule.weights[j];
      sys.matrix(i, j) -= w * k;
    }
  }
  return sys;
}

double det_continuum(const RealKernel& kernel, const Region& region, int order, const Tolerance& tol,
                     bool symmetric) {
  if (region.empty()) return 1.0;
  double prev = det_of(build_nystrom(kernel, region, order, symmetric).matrix);
  for (int attempt = 0; attempt < 2; ++attempt) {
    order *= 2;
    double cur = det_of(build_nystrom(kernel, region, order, symmetric).matrix);
    if (tol.accepts(cur - prev, cur)) return cur;
    prev = cur;
  }
  throw ConvergenceError("det_continuum: no agreement after doubling the order twice");
}

ResolventFunction::ResolventFunction(RealKernel kernel, std::function<double(double)> rhs, quad::QuadRule rule,
                                     std::vector<double> node_values)
    : kernel_(std::move(kernel)), rhs_(std::move(rhs)), rule_(std::move(rule)), values_(std::move(node_values)) {}

double ResolventFunction::operator()(double x) const {
  double acc = rhs_(x);
  for (std::size_t j = 0; j < rule_.size(); ++j) acc += rule_.weights[j] * kernel_(x, rule_.nodes[j]) * values_[j];
  return acc;
}

ResolventFunction resolve_continuum(const RealKernel& kernel, const Region& region,
                                    const std::function<double(double)>& rhs, int order) {
  NystromSystem sys = build_nystrom(kernel, region, order, false);
  long n = static_cast<long>(sys.rule.size());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
  if (n > 0 && !(lu.rcond() > 1e-14)) throw SingularSystemError("resolve_continuum: 1 - K is numerically singular");
  Eigen::VectorXd b(n);
  for (long i = 0; i < n; ++i) b(i) = rhs(sys.rule.nodes[i]);
  Eigen::VectorXd x = n > 0 ? Eigen::VectorXd(lu.solve(b)) : Eigen::VectorXd(b);
  return ResolventFunction(kernel, rhs, sys.rule, std::vector<double>(x.data(), x.data() + n));
}

void GapRegion::validate() const {
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (!std::isfinite(slices[i].time)) throw DomainError("gap region: non-finite time");
    if (i > 0 && !(slices[i].time > slices[i - 1].time))
      throw DomainError("gap region: slice times must be strictly increasing");
    if (const auto* sites = std::get_if<std::vector<long>>(&slices[i].sites)) {
      for (std::size_t k = 1; k < sites->size(); ++k)
        if (!((*sites)[k] > (*sites)[k - 1])) throw DomainError("gap region: sites must be strictly increasing");
    } else {
      const Region& reg = std::get<Region>(slices[i].sites);
      for (std::size_t k = 0; k < reg.size(); ++k) {
        if (!(reg[k].hi > reg[k].lo)) throw DomainError("gap region: intervals need lo < hi");
        if (k > 0 && !(reg[k].lo >= reg[k - 1].hi))
          throw DomainError("gap region: intervals must be ordered and disjoint");
      }
    }
  }
}

bool GapRegion::empty() const {
  for (const GapSlice& s : slices) {
    if (const auto* sites = std::get_if<std::vector<long>>(&s.sites)) {
      if (!sites->empty()) return false;
    } else if (!std::get<Region>(s.sites).empty()) {
      return false;
    }
  }
  return true;
}

namespace {

double extended_det(const ExtendedKernelMatrix& kernel, const GapRegion& region, int order) {
  std::vector<SpaceTimePoint> points;
  std::vector<double> weights;
  for (const GapSlice& s : region.slices) {
    const Region* reg = std::get_if<Region>(&s.sites);
    if (!reg) throw DomainError("det_continuum_extended: slices must carry intervals");
    quad::QuadRule rule = region_rule(*reg, order);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      points.push_back({s.time, rule.nodes[i]});
      weights.push_back(rule.weights[i]);
    }
  }
  if (points.empty()) return 1.0;
  Eigen::MatrixXd k = kernel(points);
  long n = static_cast<long>(points.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) a(i, j) -= std::sqrt(weights[i] * weights[j]) * k(i, j);
  return det_of(a);
}

}  // namespace

double det_continuum_extended(const ExtendedKernelMatrix& kernel, const GapRegion& region, int order,
                              const Tolerance& tol) {
  region.validate();
  if (region.empty()) return 1.0;
  double prev = extended_det(kernel, region, order);
  for (int attempt = 0; attempt < 2; ++attempt) {
    order *= 2;
    double cur = extended_det(kernel, region, order);
    if (tol.accepts(cur - prev, cur)) return cur;
    prev = cur;
  }
  throw ConvergenceError("det_continuum_extended: no agreement after doubling the order twice");
}

}  // namespace tacnode::fredholm
