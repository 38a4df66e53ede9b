#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "tacnode/bessel_table.hpp"
#include "tacnode/core.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode::finite {

// 2m+1 non-intersecting walkers started and ended at -m..m, observed at time
// t. theta is the decay rate assumed when sizing truncated sections.
struct FiniteModel {
  double t = 1.0;
  long m = 0;
  double theta = 1.0;
  Tolerance tol{1e-12, 1e-10};

  long n() const { return 2 * m + 1; }
  void validate() const;
};

// The kernel K(0)_{k,l} = sum_{a>=0} J_{k+a+1}(4t) J_{l+a+1}(4t) restricted
// to {n, n+1, ...}, with the solution Q of Q = g + K(0) Q, g_k = J_{k+1}(4t).
class BesselSection {
 public:
  BesselSection(std::shared_ptr<const BesselTauTable> j4, long n, double theta, const Tolerance& tol);

  long start() const { return n_; }
  long size() const { return static_cast<long>(q_.size()); }
  double t() const { return 0.5 * j4_->T(); }
  const BesselTauTable& j4() const { return *j4_; }

  // det(1 - K(0)) on {n, n+1, ...}
  double hn0() const { return hn0_; }
  const Eigen::MatrixXd& k0() const { return k0_; }
  // Q_n, ..., Q_{n+size-1}
  const std::vector<double>& q() const { return q_; }
  // U_a = sum_{k>=n} Q_k J_{k+1+a}(4t), a = 0, 1, ...
  const std::vector<double>& u() const { return u_; }

  double k0_entry(long k, long l) const;

  // S_n(y) = -sum_a (-1/y)^a U_a; S_n(z^{-1}) is s_of(1/z).
  cplx s_of(cplx y) const;
  // T_n(y) = sum_{k>=1} Q_{n+k-1} (-y)^k
  cplx t_of(cplx y) const;
  // R_n(y) = S_n(y) + e^{2t(y - 1/y)} (-y)^n T_n(y)
  cplx r_of(cplx y) const;

 private:
  std::shared_ptr<const BesselTauTable> j4_;
  long n_;
  double hn0_ = 1.0;
  Eigen::MatrixXd k0_;
  std::vector<double> q_;
  std::vector<double> u_;
};

// Q_start, Q_start+1, ... (truncated where the entries are negligible)
struct QVector {
  long start = 0;
  std::vector<double> values;
};

struct STR {
  cplx s;  // S_n(z^{-1})
  cplx t;  // T_n(z^{-1})
  cplx r;  // R_n(z^{-1})
};

struct ABC {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct ExtendedKernelValue {
  // right-hand side of the extended kernel formula: the kernel with the
  // (-1)^x e^{4t} conjugation and the H_{n+1}/H_n factor removed
  double reduced = 0.0;
  double raw = 0.0;      // the hole kernel itself
  double h_ratio = 1.0;  // H_{n+1}(0) / H_n(0)
};

enum class GapMode { particles, holes };

class FiniteSystem {
 public:
  explicit FiniteSystem(const FiniteModel& model);

  const FiniteModel& model() const { return model_; }
  long n() const { return model_.n(); }
  const BesselSection& section() const { return section_; }
  const BesselTauTable& j2() const { return *j2_; }

  double k0_entry(long k, long l) const { return section_.k0_entry(k, l); }
  // H_{n_index}(0) for any index (independent section)
  double hn0(long n_index) const;
  double h_ratio() const { return h_ratio_; }
  QVector q_vector() const { return {section_.start(), section_.q()}; }

  STR s_t_r(cplx z) const;

  ABC abc_static(long x) const;
  ABC abc_extended(double tau, long x) const;

  ExtendedKernelValue kernel_ext(double t1, long x1, double t2, long x2) const;

  // E_1..E_4 of the double contour representation at (z, w)
  std::array<cplx, 4> e_terms(cplx z, cplx w) const;

  // reduced value from the double contour representation: z on |z| = 0.9,
  // w on |w| = 1.1, trapezoid rules doubled from `points` until stable
  double kernel_contour(double t1, long x1, double t2, long x2, int points = 128) const;

  // K_m(x, y) = delta_{xy} - hole kernel at t1 = t2 = 0
  double particle_kernel(long x, long y) const;

  double gap_probability(const fredholm::GapRegion& region, GapMode mode = GapMode::holes) const;

 private:
  struct Profile;
  Profile profile(double tau) const;
  double c_value(const BesselTauTable& tab4, long x) const;
  double reduced_value(const Profile& p1, const Profile& p2, const BesselTauTable& tab4, double t1, long x1,
                       double t2, long x2) const;
  FiniteModel model_;
  std::shared_ptr<const BesselTauTable> j4_;
  std::shared_ptr<const BesselTauTable> j2_;
  BesselSection section_;
  double h_ratio_ = 1.0;
};

}  // namespace tacnode::finite
