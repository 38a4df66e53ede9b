#pragma once

#include <Eigen/Dense>
#include <functional>
#include <variant>
#include <vector>

#include "tacnode/core.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode::fredholm {

// Finite section of a kernel on {start, start+1, ..., start+size-1}.
struct DiscreteKernelSection {
  long start = 0;
  Eigen::MatrixXd entries;

  long size() const { return static_cast<long>(entries.rows()); }
};

// det(1 - M) by pivoted LU.
double det_discrete(const DiscreteKernelSection& section);

// det(1 - K) on {start, start+1, ...}: the section grows by 8 rows until two
// successive determinants agree to tol, starting from initial_size.
double det_discrete_converged(const std::function<double(long, long)>& entry, long start,
                              long initial_size, const Tolerance& tol, long max_size = 4096);

// Solves (1 - M) x = rhs; residual checked to 1e-12 (relative to |rhs|).
std::vector<double> resolve_discrete(const DiscreteKernelSection& section, const std::vector<double>& rhs);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
using Region = std::vector<Interval>;
using RealKernel = std::function<double(double, double)>;

// Gauss-Legendre nodes of the given order on every interval of the region.
quad::QuadRule region_rule(const Region& region, int order);

struct NystromSystem {
  quad::QuadRule rule;
  Eigen::MatrixXd matrix;  // 1 - W^{1/2} K W^{1/2} or 1 - K W
  bool symmetrized = true;
};

NystromSystem build_nystrom(const RealKernel& kernel, const Region& region, int order, bool symmetric = true);

// det(1 - K) on L^2(region); the order is doubled until two successive values
// agree to tol (ConvergenceError after two failed doublings).
double det_continuum(const RealKernel& kernel, const Region& region, int order, const Tolerance& tol,
                     bool symmetric = true);

// Solution f of f - K f = rhs on the region, extended off the nodes by the
// Nystrom interpolation formula.
class ResolventFunction {
 public:
  ResolventFunction(RealKernel kernel, std::function<double(double)> rhs, quad::QuadRule rule,
                    std::vector<double> node_values);

  double operator()(double x) const;
  const quad::QuadRule& rule() const { return rule_; }
  const std::vector<double>& node_values() const { return values_; }

 private:
  RealKernel kernel_;
  std::function<double(double)> rhs_;
  quad::QuadRule rule_;
  std::vector<double> values_;
};

ResolventFunction resolve_continuum(const RealKernel& kernel, const Region& region,
                                    const std::function<double(double)>& rhs, int order);

// Union of (time, site set) or (time, real intervals) slices.
struct GapSlice {
  double time = 0.0;
  std::variant<std::vector<long>, Region> sites;
};

struct GapRegion {
  std::vector<GapSlice> slices;

  // times strictly increasing, site lists strictly increasing, intervals ordered
  void validate() const;
  bool empty() const;
};

// A point of a multi-time region: time and (discrete or continuous) position.
struct SpaceTimePoint {
  double time = 0.0;
  double x = 0.0;
};

// Builds the kernel matrix K(p_i, p_j) for a list of points.
using ExtendedKernelMatrix = std::function<Eigen::MatrixXd(const std::vector<SpaceTimePoint>&)>;

// det(1 - K) over a continuous multi-time region, Nystrom with the given
// order per interval; order doubling as in det_continuum.
double det_continuum_extended(const ExtendedKernelMatrix& kernel, const GapRegion& region, int order,
                              const Tolerance& tol);

}  // namespace tacnode::fredholm
