#include "tacnode/limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tacnode/finite_kernel.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode::limit {

namespace {

const double kCbrt2 = std::cbrt(2.0);
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// wedge contours for the double integrals: ray length and panel layout
constexpr double kRayLength = 7.0;
constexpr double kRayPanel = 0.5;
constexpr int kRayOrder = 16;

double airy_shift(double s, double x) { return specfun::detail::airy_shift_fast(s, x); }

double log_abs(double v) { return std::log(std::max(std::abs(v), 1e-300)); }

}  // namespace

double TacnodeModel::sigma_tilde() const { return std::pow(2.0, 2.0 / 3.0) * sigma; }

void TacnodeModel::validate() const {
  if (!std::isfinite(sigma)) throw DomainError("TacnodeModel: sigma must be finite");
  if (q_order < 8) throw DomainError("TacnodeModel: q_order must be at least 8");
  if (!(span >= 8.0)) throw DomainError("TacnodeModel: cutoff must be at least sigma_tilde + 8");
  if (!(contour.offset > 0.0)) throw DomainError("TacnodeModel: contour offset must be positive");
  // the shifted Airy arguments reach about -sigma - 16
  if (sigma < -12.0) throw DomainError("TacnodeModel: sigma below -12 leaves the Airy window");
  tol.validate();
}

double airy_kernel_closed(double x, double y) {
  auto [ax, dx] = specfun::detail::airy_pair(x);
  double d = y - x;
  if (std::abs(d) < 1e-4) {
    double diag = dx * dx - x * ax * ax;
    return diag - d * ax * ax / 2.0 - d * d / 6.0 * (ax * dx + x * x * ax * ax - x * dx * dx);
  }
  auto [ay, dy] = specfun::detail::airy_pair(y);
  return (ax * dy - dx * ay) / (x - y);
}

double airy_kernel(double x, double y) {
  if (x < specfun::kAiryLowerLimit || y < specfun::kAiryLowerLimit)
    throw DomainError("airy_kernel: arguments below the Airy window");
  double split = std::max(0.0, -std::min(x, y)) + 6.0;
  auto integrate = [&](double width, int tail_order) {
    quad::QuadRule r = quad::panel_rule(16, 0.0, split, width);
    r.append(quad::semi_infinite_rule(tail_order, split, 0.5));
    CompensatedSum acc;
    for (std::size_t i = 0; i < r.size(); ++i)
      acc.add(r.weights[i] * specfun::detail::airy_pair(x + r.nodes[i]).first *
              specfun::detail::airy_pair(y + r.nodes[i]).first);
    return acc.value();
  };
  double coarse = integrate(1.0, 48);
  double fine = integrate(0.5, 96);
  if (std::abs(fine - coarse) > 1e-12 * std::max(1.0, std::abs(fine)))
    throw ConvergenceError("airy_kernel: refinement check failed");
  return fine;
}

double tracy_widom_f2(double s, int order, const Tolerance& tol) {
  if (!std::isfinite(s) || s < -20.0) throw DomainError("tracy_widom_f2: s must be finite and >= -20");
  return fredholm::det_continuum(airy_kernel_closed, {{s, s + 12.0}}, order, tol);
}

QResolvent::QResolvent(const TacnodeModel& model, int order)
    : lo_(model.sigma_tilde()),
      hi_(model.cutoff()),
      fn_(fredholm::resolve_continuum(
          airy_kernel_closed, {{model.sigma_tilde(), model.cutoff()}},
          [](double k) { return specfun::detail::airy_pair(k).first; }, order)) {
  for (double v : fn_.node_values())
    if (!std::isfinite(v)) throw SingularSystemError("q_function: non-finite node value");
  double a = lo_ + 2.0 * (hi_ - lo_) / 3.0;
  decay_ = (log_abs(fn_(a)) - log_abs(fn_(hi_))) / (hi_ - a);
}

double QResolvent::operator()(double kappa) const {
  if (kappa < lo_) return 0.0;
  if (kappa > hi_) return specfun::detail::airy_pair(kappa).first;  // kernel term below the truncation
  return fn_(kappa);
}

double QResolvent::residual(double kappa) const {
  quad::QuadRule r = quad::panel_rule(16, lo_, hi_, 0.5);
  CompensatedSum acc;
  for (std::size_t i = 0; i < r.size(); ++i) acc.add(r.weights[i] * airy_kernel_closed(kappa, r.nodes[i]) * fn_(r.nodes[i]));
  return std::abs(fn_(kappa) - specfun::detail::airy_pair(kappa).first - acc.value());
}

// ---- Airy form ----

struct TacnodeSystem::GammaRules {
  quad::QuadRule pos;  // [0, L]
  quad::QuadRule neg;  // [-L, 0]
};

struct TacnodeSystem::Profile {
  // at gamma >= 0: A(s, xi - g), A(s, -xi - g), B(s, xi - g), B(s, -xi - g)
  std::vector<double> ap, am, bp, bm;
  // at gamma <= 0: B(s, xi - g), B(s, -xi - g)
  std::vector<double> np, nm;
};

struct TacnodeSystem::ContourSet {
  quad::ContourRule r1, r2, l1, l2;  // right wedges at delta, 2 delta; left at -delta, -2 delta
  std::vector<cplx> p_r1, p_r2;      // 1 - P(u)
  std::vector<cplx> p_l1, p_l2;      // 1 - P(-v)
  std::vector<cplx> q_r1;            // Q(-v)
  std::vector<cplx> q_l1;            // Q(u)
  Eigen::MatrixXcd c1, c2, c3, c4;   // 1/(u - v) for the four terms
};

namespace {

// Right wedge: d + r e^{+-i pi/3}; left wedge: d + r e^{+-2 i pi/3}. Both are
// traversed upwards like the vertical line they replace.
quad::ContourRule wedge_rule(double d, bool right) {
  quad::QuadRule rs = quad::panel_rule(kRayOrder, 0.0, kRayLength, kRayPanel);
  double theta = right ? std::numbers::pi / 3.0 : 2.0 * std::numbers::pi / 3.0;
  cplx up = std::polar(1.0, theta), down = std::conj(up);
  cplx inv = 1.0 / cplx(0.0, kTwoPi);
  quad::ContourRule c;
  c.kind = quad::RuleKind::vertical_line;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    c.nodes.push_back(d + rs.nodes[i] * down);
    c.weights.push_back(-rs.weights[i] * down * inv);
    c.nodes.push_back(d + rs.nodes[i] * up);
    c.weights.push_back(rs.weights[i] * up * inv);
  }
  return c;
}

Eigen::MatrixXcd cauchy(const quad::ContourRule& u, const quad::ContourRule& v) {
  Eigen::MatrixXcd c(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) c(i, j) = 1.0 / (u.nodes[i] - v.nodes[j]);
  return c;
}

}  // namespace

TacnodeSystem::TacnodeSystem(const TacnodeModel& model) : model_(model) {
  model_.validate();
  q_ = std::make_unique<QResolvent>(model_, model_.q_order);
  alpha_rule_ = quad::gauss_legendre(model_.q_order, 0.0, model_.span);
  p_alpha_.resize(alpha_rule_.size());
  for (std::size_t i = 0; i < alpha_rule_.size(); ++i) p_alpha_[i] = p_function(alpha_rule_.nodes[i]);
  alpha_dense_ = quad::panel_rule(16, 0.0, model_.span, 0.5);
  p_dense_.resize(alpha_dense_.size());
  for (std::size_t i = 0; i < alpha_dense_.size(); ++i) p_dense_[i] = p_function(alpha_dense_.nodes[i]);
  kappa_dense_ = quad::panel_rule(16, model_.sigma_tilde(), model_.cutoff(), 0.5);
  q_dense_.resize(kappa_dense_.size());
  for (std::size_t i = 0; i < kappa_dense_.size(); ++i) q_dense_[i] = (*q_)(kappa_dense_.nodes[i]);
  double a = 2.0 * model_.span / 3.0;
  p_decay_ = (log_abs(p_function(a)) - log_abs(p_function(model_.span))) / (model_.span - a);
}

TacnodeSystem::~TacnodeSystem() = default;

double TacnodeSystem::p_function(double alpha) const {
  const quad::QuadRule& r = q_->rule();
  const std::vector<double>& qv = q_->node_values();
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += r.weights[i] * qv[i] * specfun::detail::airy_pair(r.nodes[i] + alpha).first;
  return acc;
}

ABValue TacnodeSystem::script_ab(double s, double xi) const {
  double sigma = model_.sigma;
  ABValue out;
  double a = airy_shift(s, sigma - xi);
  for (std::size_t i = 0; i < alpha_rule_.size(); ++i)
    a += alpha_rule_.weights[i] * p_alpha_[i] * airy_shift(s, kCbrt2 * alpha_rule_.nodes[i] + sigma - xi);
  out.a = a;
  const quad::QuadRule& r = q_->rule();
  const std::vector<double>& qv = q_->node_values();
  double b = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) b += r.weights[i] * qv[i] * airy_shift(s, kCbrt2 * r.nodes[i] - sigma + xi);
  out.b = b;
  return out;
}

double TacnodeSystem::script_c(double s, double xi) const {
  double sp = s / (kCbrt2 * kCbrt2);
  double shift = xi / kCbrt2;
  auto g = [&](double y) {
    double v = airy_shift(sp, y);
    for (std::size_t i = 0; i < alpha_rule_.size(); ++i)
      v += alpha_rule_.weights[i] * p_alpha_[i] * airy_shift(sp, alpha_rule_.nodes[i] + y);
    return v;
  };
  const quad::QuadRule& r = q_->rule();
  const std::vector<double>& qv = q_->node_values();
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += r.weights[i] * qv[i] * (g(r.nodes[i] + shift) + g(r.nodes[i] - shift));
  return acc / kCbrt2;
}

cplx TacnodeSystem::p_hat(cplx u) const {
  if (!(u.real() * kCbrt2 > -p_decay_))
    throw StripError("laplace_pq: Re u outside the strip of P-hat");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < alpha_dense_.size(); ++i)
    acc += alpha_dense_.weights[i] * p_dense_[i] * std::exp(-alpha_dense_.nodes[i] * kCbrt2 * u);
  return -acc;
}

cplx TacnodeSystem::q_hat(cplx u) const {
  if (!(u.real() * kCbrt2 < q_->decay_rate()))
    throw StripError("laplace_pq: Re u outside the strip of Q-hat");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < kappa_dense_.size(); ++i)
    acc += kappa_dense_.weights[i] * q_dense_[i] * std::exp(kappa_dense_.nodes[i] * kCbrt2 * u);
  return acc;
}

std::pair<cplx, cplx> TacnodeSystem::laplace_pq(cplx u) const { return {p_hat(u), q_hat(u)}; }

TacnodeSystem::GammaRules TacnodeSystem::gamma_rules(double xi_max) const {
  double len = std::max(2.0, 12.0 + xi_max - model_.sigma);
  GammaRules g;
  g.pos = quad::panel_rule(16, 0.0, len, 2.0);
  g.neg = quad::panel_rule(16, -len, 0.0, 2.0);
  return g;
}

TacnodeSystem::Profile TacnodeSystem::profile(const GammaRules& rules, double s, double xi) const {
  Profile p;
  for (double g : rules.pos.nodes) {
    ABValue plus = script_ab(s, xi - g), minus = script_ab(s, -xi - g);
    p.ap.push_back(plus.a);
    p.am.push_back(minus.a);
    p.bp.push_back(plus.b);
    p.bm.push_back(minus.b);
  }
  for (double g : rules.neg.nodes) {
    p.np.push_back(script_ab(s, xi - g).b);
    p.nm.push_back(script_ab(s, -xi - g).b);
  }
  return p;
}

double TacnodeSystem::pair_value(const GammaRules& rules, const Profile& l, const Profile& r, const ScaledPoint& p1,
                                 const ScaledPoint& p2) const {
  CompensatedSum acc;
  for (std::size_t i = 0; i < rules.pos.size(); ++i) {
    double v = l.ap[i] * r.ap[i] + l.am[i] * r.am[i] - l.ap[i] * r.bp[i] - l.am[i] * r.bm[i] - l.bp[i] * r.ap[i] -
               l.bm[i] * r.am[i];
    acc.add(rules.pos.weights[i] * v);
  }
  for (std::size_t i = 0; i < rules.neg.size(); ++i)
    acc.add(-rules.neg.weights[i] * (l.np[i] * r.np[i] + l.nm[i] * r.nm[i]));
  acc.add(script_c(p1.s - p2.s, p1.xi - p2.xi));
  if (p2.s < p1.s) acc.add(-specfun::heat_kernel(p1.s - p2.s, p1.xi, p2.xi));
  return acc.value();
}

double TacnodeSystem::kernel_airy_form(const ScaledPoint& p1, const ScaledPoint& p2) const {
  GammaRules rules = gamma_rules(std::max(std::abs(p1.xi), std::abs(p2.xi)));
  return pair_value(rules, profile(rules, p1.s, p1.xi), profile(rules, -p2.s, p2.xi), p1, p2);
}

Eigen::MatrixXd TacnodeSystem::kernel_airy_matrix(const std::vector<ScaledPoint>& points) const {
  double xi_max = 0.0;
  for (const ScaledPoint& p : points) xi_max = std::max(xi_max, std::abs(p.xi));
  GammaRules rules = gamma_rules(xi_max);
  std::size_t n = points.size();
  std::vector<Profile> left(n), right(n);
  parallel_for(n, [&](std::size_t i) {
    left[i] = profile(rules, points[i].s, points[i].xi);
    right[i] = profile(rules, -points[i].s, points[i].xi);
  });
  Eigen::MatrixXd k(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) k(i, j) = pair_value(rules, left[i], right[j], points[i], points[j]);
  });
  return k;
}

double TacnodeSystem::kernel_bare(const ScaledPoint& p1, const ScaledPoint& p2) const {
  GammaRules rules = gamma_rules(std::max(std::abs(p1.xi), std::abs(p2.xi)));
  double sigma = model_.sigma;
  CompensatedSum acc;
  for (std::size_t i = 0; i < rules.pos.size(); ++i) {
    double g = rules.pos.nodes[i];
    double v = airy_shift(p1.s, sigma - p1.xi + g) * airy_shift(-p2.s, sigma - p2.xi + g) +
               airy_shift(p1.s, sigma + p1.xi + g) * airy_shift(-p2.s, sigma + p2.xi + g);
    acc.add(rules.pos.weights[i] * v);
  }
  if (p2.s < p1.s) acc.add(-specfun::heat_kernel(p1.s - p2.s, p1.xi, p2.xi));
  return acc.value();
}

// ---- double contour form ----

const TacnodeSystem::ContourSet& TacnodeSystem::contours(double delta) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = contour_cache_.find(delta);
  if (it != contour_cache_.end()) return *it->second;
  auto set = std::make_unique<ContourSet>();
  set->r1 = wedge_rule(delta, true);
  set->r2 = wedge_rule(2.0 * delta, true);
  set->l1 = wedge_rule(-delta, false);
  set->l2 = wedge_rule(-2.0 * delta, false);
  for (cplx u : set->r1.nodes) {
    set->p_r1.push_back(1.0 - p_hat(u));
    set->q_r1.push_back(q_hat(-u));
  }
  for (cplx u : set->r2.nodes) set->p_r2.push_back(1.0 - p_hat(u));
  for (cplx u : set->l1.nodes) {
    set->p_l1.push_back(1.0 - p_hat(-u));
    set->q_l1.push_back(q_hat(u));
  }
  for (cplx u : set->l2.nodes) set->p_l2.push_back(1.0 - p_hat(-u));
  set->c1 = cauchy(set->r1, set->l1);
  set->c2 = cauchy(set->r2, set->r1);
  set->c3 = cauchy(set->l1, set->l2);
  set->c4 = cauchy(set->l1, set->r1);
  auto& slot = contour_cache_[delta];
  slot = std::move(set);
  return *slot;
}

cplx TacnodeSystem::kernel_contour_complex(const ScaledPoint& p1, const ScaledPoint& p2, double delta) const {
  if (delta <= 0.0) delta = model_.contour.offset;
  if (!(delta <= 1.0)) throw DomainError("kernel_contour_form: delta must lie in (0, 1]");
  const ContourSet& cs = contours(delta);
  double sigma = model_.sigma;

  // u side: e^{eps u^3/3 - sigma u + s1 u^2 + sign xi1 u}; v side: the reciprocal
  // of e^{eps v^3/3 - sigma v + s2 v^2 + sign xi2 v}
  auto u_vec = [&](const quad::ContourRule& c, const std::vector<cplx>& f, double eps, double sign) {
    Eigen::VectorXcd a(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      cplx u = c.nodes[i];
      a(i) = c.weights[i] * f[i] * std::exp(eps * u * u * u / 3.0 - sigma * u + p1.s * u * u + sign * p1.xi * u);
    }
    return a;
  };
  auto v_vec = [&](const quad::ContourRule& c, const std::vector<cplx>& f, double eps, double sign) {
    Eigen::VectorXcd b(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      cplx v = c.nodes[i];
      b(i) = c.weights[i] * f[i] * std::exp(-(eps * v * v * v / 3.0 - sigma * v + p2.s * v * v + sign * p2.xi * v));
    }
    return b;
  };
  // the ray ends sit where the integrand has died out
  auto tail_check = [](const Eigen::VectorXcd& x) {
    double peak = x.cwiseAbs().maxCoeff();
    double end = std::max(std::abs(x(x.size() - 1)), std::abs(x(x.size() - 2)));
    if (end > 1e-15 * std::max(1.0, peak)) throw TailError("kernel_contour_form: wedge contour too short");
  };
  auto term = [&](const quad::ContourRule& cu, const std::vector<cplx>& fu, double eu, const quad::ContourRule& cv,
                  const std::vector<cplx>& fv, double ev, const Eigen::MatrixXcd& c) {
    cplx total = 0.0;
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXcd a = u_vec(cu, fu, eu, sign), b = v_vec(cv, fv, ev, sign);
      tail_check(a);
      tail_check(b);
      total += a.cwiseProduct(c * b).sum();
    }
    return total;
  };

  cplx k = term(cs.r1, cs.p_r1, 1.0, cs.l1, cs.p_l1, 1.0, cs.c1);
  k -= term(cs.r2, cs.p_r2, 1.0, cs.r1, cs.q_r1, -1.0, cs.c2);
  k -= term(cs.l1, cs.q_l1, -1.0, cs.l2, cs.p_l2, 1.0, cs.c3);
  k += term(cs.l1, cs.q_l1, -1.0, cs.r1, cs.q_r1, -1.0, cs.c4);
  k += script_c(p1.s - p2.s, p1.xi - p2.xi);
  if (p2.s < p1.s) k -= specfun::heat_kernel(p1.s - p2.s, p1.xi, p2.xi);
  return k;
}

double TacnodeSystem::kernel_contour_form(const ScaledPoint& p1, const ScaledPoint& p2, double delta) const {
  cplx k = kernel_contour_complex(p1, p2, delta);
  if (std::abs(k.imag()) > 1e-9) throw ConvergenceError("kernel_contour_form: imaginary part above 1e-9");
  return k.real();
}

double TacnodeSystem::gap_probability(const fredholm::GapRegion& region, int order) const {
  for (const fredholm::GapSlice& s : region.slices)
    if (!std::holds_alternative<fredholm::Region>(s.sites))
      throw DomainError("gap_probability_tacnode: slices must carry real intervals");
  auto kernel = [&](const std::vector<fredholm::SpaceTimePoint>& pts) {
    std::vector<ScaledPoint> sp;
    sp.reserve(pts.size());
    for (const auto& p : pts) sp.push_back({p.time, p.x});
    return kernel_airy_matrix(sp);
  };
  Tolerance tol{std::max(model_.tol.abs_tol, 1e-9), std::max(model_.tol.rel_tol, 1e-8)};
  return fredholm::det_continuum_extended(kernel, region, order, tol);
}

// ---- finite-t comparison ----

std::vector<ProbeRow> convergence_probe(const TacnodeSystem& system, const ScaledPoint& p1, const ScaledPoint& p2,
                                        const std::vector<double>& t_list, double theta) {
  double limit_value = system.kernel_airy_form(p1, p2);
  double sigma = system.model().sigma;
  std::vector<ProbeRow> rows;
  for (double t : t_list) {
    if (!(t > 0.0)) throw DomainError("convergence_probe: t must be positive");
    double c = std::cbrt(t);
    ProbeRow row;
    row.t = t;
    row.m = std::lround(2.0 * t + sigma * c);
    row.x1 = std::lround(p1.xi * c);
    row.x2 = std::lround(p2.xi * c);
    row.t1 = p1.s * c * c;
    row.t2 = p2.s * c * c;
    if (!(std::abs(row.t1) < t && std::abs(row.t2) < t)) throw DomainError("convergence_probe: |t_i| must be below t");
    finite::FiniteModel fm;
    fm.t = t;
    fm.m = row.m;
    fm.theta = theta;
    finite::FiniteSystem fs(fm);
    finite::ExtendedKernelValue v = fs.kernel_ext(row.t1, row.x1, row.t2, row.x2);
    row.finite_value = c * v.reduced / v.h_ratio;
    row.limit_value = limit_value;
    row.error = std::abs(row.finite_value - limit_value);
    rows.push_back(row);
  }
  return rows;
}

bool non_increasing(const std::vector<ProbeRow>& rows, double slack) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].error > (1.0 + slack) * rows[i - 1].error) return false;
  return true;
}

}  // namespace tacnode::limit
