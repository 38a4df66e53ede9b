#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tacnode/core.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode::limit {

// The tacnode limit at pressure sigma. The resolvent Q lives on
// [sigma_tilde, sigma_tilde + span] with sigma_tilde = 2^{2/3} sigma.
struct TacnodeModel {
  double sigma = 0.0;
  int q_order = 64;
  double span = 12.0;
  // offset is delta of the double contour form; the other fields are unused
  quad::ContourSpec contour{1.0, 0.5, 0.0, 64};
  Tolerance tol{1e-10, 1e-8};

  double sigma_tilde() const;
  double cutoff() const { return sigma_tilde() + span; }
  void validate() const;
};

struct ScaledPoint {
  double s = 0.0;
  double xi = 0.0;
};

// Airy kernel int_0^inf Ai(x + l) Ai(y + l) dl by quadrature, checked by
// doubling the order.
double airy_kernel(double x, double y);
// (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y), with the Taylor expansion near the
// diagonal.
double airy_kernel_closed(double x, double y);

// GUE edge distribution: det(1 - K_Ai) on [s, s + 12].
double tracy_widom_f2(double s, int order = 64, const Tolerance& tol = {1e-12, 1e-10});

// Q = (1 - chi K_Ai chi)^{-1} chi Ai as a Nystrom extension.
class QResolvent {
 public:
  QResolvent(const TacnodeModel& model, int order);
  double operator()(double kappa) const;
  const quad::QuadRule& rule() const { return fn_.rule(); }
  const std::vector<double>& node_values() const { return fn_.node_values(); }
  // slope of -log|Q| over the last third of the support
  double decay_rate() const { return decay_; }
  double residual(double kappa) const;

 private:
  double lo_;
  double hi_;
  fredholm::ResolventFunction fn_;
  double decay_ = 0.0;
};

struct ABValue {
  double a = 0.0;
  double b = 0.0;
};

class TacnodeSystem {
 public:
  explicit TacnodeSystem(const TacnodeModel& model);
  ~TacnodeSystem();

  const TacnodeModel& model() const { return model_; }
  const QResolvent& q() const { return *q_; }

  // P(alpha) = int Q(mu) Ai(mu + alpha) dmu
  double p_function(double alpha) const;

  ABValue script_ab(double s, double xi) const;
  double script_c(double s, double xi) const;
  // (P-hat(u), Q-hat(u)); StripError outside the certified strips
  std::pair<cplx, cplx> laplace_pq(cplx u) const;
  cplx p_hat(cplx u) const;
  cplx q_hat(cplx u) const;

  // heat term + C + the gamma integrals of A/B products
  double kernel_airy_form(const ScaledPoint& p1, const ScaledPoint& p2) const;
  // the same for all pairs of points, sharing per-point work
  Eigen::MatrixXd kernel_airy_matrix(const std::vector<ScaledPoint>& points) const;
  // only the heat term and the two undressed Airy terms
  double kernel_bare(const ScaledPoint& p1, const ScaledPoint& p2) const;

  // double contour form; delta <= 0 selects model.contour.offset
  cplx kernel_contour_complex(const ScaledPoint& p1, const ScaledPoint& p2, double delta = 0.0) const;
  double kernel_contour_form(const ScaledPoint& p1, const ScaledPoint& p2, double delta = 0.0) const;

  // det(1 - K^ext) over slices of real intervals (times are the s values)
  double gap_probability(const fredholm::GapRegion& region, int order = 16) const;

 private:
  struct GammaRules;
  struct Profile;
  struct ContourSet;
  GammaRules gamma_rules(double xi_max) const;
  Profile profile(const GammaRules& rules, double s, double xi) const;
  double pair_value(const GammaRules& rules, const Profile& left, const Profile& right, const ScaledPoint& p1,
                    const ScaledPoint& p2) const;
  const ContourSet& contours(double delta) const;

  TacnodeModel model_;
  std::unique_ptr<QResolvent> q_;
  quad::QuadRule alpha_rule_;  // coarse rule on [0, span] for A and C
  std::vector<double> p_alpha_;
  quad::QuadRule alpha_dense_;  // panels for P-hat
  std::vector<double> p_dense_;
  quad::QuadRule kappa_dense_;  // panels for Q-hat
  std::vector<double> q_dense_;
  double p_decay_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::unique_ptr<ContourSet>> contour_cache_;
};

struct ProbeRow {
  double t = 0.0;
  long m = 0;
  long x1 = 0;
  long x2 = 0;
  double t1 = 0.0;
  double t2 = 0.0;
  double finite_value = 0.0;  // t^{1/3} reduced / (H_{n+1}(0)/H_n(0))
  double limit_value = 0.0;
  double error = 0.0;
};

// m = round(2t + sigma t^{1/3}), x_i = round(xi_i t^{1/3}), t_i = s_i t^{2/3}
std::vector<ProbeRow> convergence_probe(const TacnodeSystem& system, const ScaledPoint& p1, const ScaledPoint& p2,
                                        const std::vector<double>& t_list, double theta = 1.0);
// errors non-increasing along the table, each step allowed to grow by slack
bool non_increasing(const std::vector<ProbeRow>& rows, double slack = 0.1);

}  // namespace tacnode::limit
