#include "tacnode/finite_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tacnode/specfun.hpp"

namespace tacnode::finite {

void FiniteModel::validate() const {
  if (!std::isfinite(t) || t < 0.25) throw DomainError("finite model: t must be finite and >= 0.25");
  if (m < 0) throw DomainError("finite model: m must be nonnegative");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("finite model: theta must be positive");
  tol.validate();
}

namespace {

// K(0) on {n, ..., n+size-1} via K_{k,l} = J_{k+1} J_{l+1} + K_{k+1,l+1};
// the last row and column are summed directly.
Eigen::MatrixXd build_k0(const BesselTauTable& j4, long n, long size) {
  Eigen::MatrixXd k(size, size);
  if (size == 0) return k;
  auto direct = [&](long a, long b) {
    double s = 0.0;
    long count = j4.hi() - std::max(a, b);
    for (long c = 0; c < count; ++c) s += j4(a + c + 1) * j4(b + c + 1);
    return s;
  };
  long last = size - 1;
  for (long i = 0; i < size; ++i) {
    k(i, last) = direct(n + i, n + last);
    k(last, i) = k(i, last);
  }
  // fill backwards along diagonals from the last row and column
  for (long r = 1; r <= last; ++r)
    for (long c = 1; c <= last; ++c) {
      long i = last - r, j = last - c;
      k(i, j) = j4(n + i + 1) * j4(n + j + 1) + k(i + 1, j + 1);
    }
  return k;
}

}  // namespace

BesselSection::BesselSection(std::shared_ptr<const BesselTauTable> j4, long n, double theta, const Tolerance& tol)
    : j4_(std::move(j4)), n_(n) {
  if (n < 0) throw DomainError("Bessel section: start index must be nonnegative");
  double t = 0.5 * j4_->T();
  // rows beyond the table's top order vanish identically
  long cap = std::max(0L, j4_->hi() - n);
  long size = static_cast<long>(std::ceil(12.0 / theta * std::cbrt(2.0 * t))) +
              std::max(0L, static_cast<long>(std::ceil(4.0 * t)) - n);
  size = std::min(std::max(size, 1L), cap);

  auto det_of = [&](long s) { return fredholm::det_discrete({n, build_k0(*j4_, n, s)}); };
  double det = det_of(size);
  while (size < cap) {
    long next = std::min(size + 8, cap);
    double d = det_of(next);
    size = next;
    bool stable = tol.accepts(d - det, d);
    det = d;
    if (stable) break;
  }
  hn0_ = det;
  k0_ = build_k0(*j4_, n, size);
  std::vector<double> g(size);
  for (long i = 0; i < size; ++i) g[i] = (*j4_)(n + i + 1);
  q_ = fredholm::resolve_discrete({n, k0_}, g);

  long ulen = std::max(0L, j4_->hi() - n);
  u_.assign(ulen, 0.0);
  for (long a = 0; a < ulen; ++a) {
    double s = 0.0;
    for (long i = 0; i < size; ++i) s += q_[i] * (*j4_)(n + i + 1 + a);
    u_[a] = s;
  }
}

double BesselSection::k0_entry(long k, long l) const {
  double s = 0.0;
  long top = j4_->hi();
  long lo = std::max({0L, j4_->lo() - k - 1, j4_->lo() - l - 1});
  for (long a = lo; k + a + 1 <= top && l + a + 1 <= top; ++a) s += (*j4_)(k + a + 1) * (*j4_)(l + a + 1);
  return s;
}

cplx BesselSection::s_of(cplx y) const {
  if (u_.empty()) return 0.0;
  cplx r = -1.0 / y;
  cplx acc = 0.0;
  for (std::size_t a = u_.size(); a-- > 0;) acc = acc * r + u_[a];
  return -acc;
}

cplx BesselSection::t_of(cplx y) const {
  if (q_.empty()) return 0.0;
  cplx r = -y;
  cplx acc = 0.0;
  for (std::size_t k = q_.size(); k-- > 0;) acc = acc * r + q_[k];
  return acc * r;
}

cplx BesselSection::r_of(cplx y) const {
  double t = this->t();
  return s_of(y) + std::exp(2.0 * t * (y - 1.0 / y)) * std::pow(-y, static_cast<int>(n_)) * t_of(y);
}

FiniteSystem::FiniteSystem(const FiniteModel& model)
    : model_((model.validate(), model)),
      j4_(std::make_shared<BesselTauTable>(2.0 * model.t, 0.0)),
      j2_(std::make_shared<BesselTauTable>(model.t, 0.0)),
      section_(j4_, model.n(), model.theta, model.tol) {
  BesselSection next(j4_, model.n() + 1, model.theta, model.tol);
  h_ratio_ = next.hn0() / section_.hn0();
}

double FiniteSystem::hn0(long n_index) const {
  if (n_index < 0) throw DomainError("hn0: index must be nonnegative");
  if (n_index == n()) return section_.hn0();
  return BesselSection(j4_, n_index, model_.theta, model_.tol).hn0();
}

STR FiniteSystem::s_t_r(cplx z) const {
  if (z == 0.0) throw DomainError("s_t_r: z must be nonzero");
  cplx y = 1.0 / z;
  // T_n(z^{-1}) is a power series in 1/z with coefficients decaying like
  // Q; it is only trusted for moderately small |1/z|
  if (std::abs(z) < 0.5) throw ConvergenceError("s_t_r: |z| below 0.5, series for T_n not trusted");
  return {section_.s_of(y), section_.t_of(y), section_.r_of(y)};
}

struct FiniteSystem::Profile {
  long lo = 0;  // A and B are stored for arguments lo, lo+1, ...
  std::vector<double> a;
  std::vector<double> b;
  double av(long j) const {
    long i = j - lo;
    return (i < 0 || i >= static_cast<long>(a.size())) ? 0.0 : a[i];
  }
  double bv(long j) const {
    long i = j - lo;
    return (i < 0 || i >= static_cast<long>(b.size())) ? 0.0 : b[i];
  }
  long hi() const { return lo + static_cast<long>(a.size()) - 1; }
};

FiniteSystem::Profile FiniteSystem::profile(double tau) const {
  BesselTauTable local;
  const BesselTauTable* tab = j2_.get();
  if (tau != 0.0) {
    local = BesselTauTable(model_.t, tau);
    tab = &local;
  }
  const auto& q = section_.q();
  const auto& u = section_.u();
  long m = model_.m, n = this->n();
  long K = static_cast<long>(q.size()), L = static_cast<long>(u.size());
  // supports: A(j) needs m+1-j+a in [lo, hi] for some a < L; B(j) needs
  // k-m+j in [lo, hi] for some k in [n, n+K)
  long lo = std::min(m + 1 - tab->hi(), tab->lo() - (n - m) - std::max(K - 1, 0L));
  long hi = std::max(m + 1 - tab->lo() + std::max(L - 1, 0L), tab->hi() - (n - m));
  Profile p;
  p.lo = lo;
  p.a.assign(hi - lo + 1, 0.0);
  p.b.assign(hi - lo + 1, 0.0);
  for (long j = lo; j <= hi; ++j) {
    double s = (*tab)(m + 1 - j);
    for (long a = 0; a < L; ++a) s += u[a] * (*tab)(m + 1 + a - j);
    double r = 0.0;
    for (long i = 0; i < K; ++i) r += q[i] * (*tab)(n + i - m + j);
    p.a[j - lo] = s;
    p.b[j - lo] = r;
  }
  return p;
}

double FiniteSystem::c_value(const BesselTauTable& tab4, long x) const {
  const auto& q = section_.q();
  const auto& u = section_.u();
  long n = this->n();
  long L = static_cast<long>(u.size());
  auto v = [&](long j) {
    double s = 0.0;
    for (long a = 0; a < L; ++a) s += tab4(a + j + 1) * u[a];
    return s;
  };
  CompensatedSum acc;
  for (std::size_t i = 0; i < q.size(); ++i) {
    long k = n + static_cast<long>(i);
    acc.add(q[i] * (tab4(k + 1 + x) + tab4(k + 1 - x) + v(k + x) + v(k - x)));
  }
  return acc.value();
}

ABC FiniteSystem::abc_static(long x) const {
  Profile p = profile(0.0);
  return {p.av(x), p.bv(x), c_value(*j4_, x)};
}

ABC FiniteSystem::abc_extended(double tau, long x) const {
  if (!(std::abs(tau) < model_.t)) throw DomainError("abc_extended: |tau| must be below t");
  if (tau == 0.0) return abc_static(x);
  Profile p = profile(tau);
  BesselTauTable tab4(2.0 * model_.t, tau);
  return {p.av(x), p.bv(x), c_value(tab4, x)};
}

double FiniteSystem::reduced_value(const Profile& p1, const Profile& p2, const BesselTauTable& tab4, double t1,
                                   long x1, double t2, long x2) const {
  double value = 0.0;
  if (t2 < t1) value -= specfun::transition_prob(t1 - t2, x1, x2) * h_ratio_;
  value += c_value(tab4, x1 - x2);

  long reach = std::max(std::labs(x1), std::labs(x2));
  CompensatedSum acc;
  long c_max = reach - std::min(p1.lo, p2.lo);
  for (long c = 0; c <= c_max; ++c) {
    double a1p = p1.av(x1 - c), a1m = p1.av(-x1 - c);
    double b1p = p1.bv(x1 - c), b1m = p1.bv(-x1 - c);
    double a2p = p2.av(x2 - c), a2m = p2.av(-x2 - c);
    double b2p = p2.bv(x2 - c), b2m = p2.bv(-x2 - c);
    acc.add(a1p * a2p + a1m * a2m - a1p * b2p - a1m * b2m - b1p * a2p - b1m * a2m);
  }
  long c_min = -reach - std::max(p1.hi(), p2.hi());
  for (long c = -1; c >= c_min; --c)
    acc.add(-(p1.bv(x1 - c) * p2.bv(x2 - c) + p1.bv(-x1 - c) * p2.bv(-x2 - c)));
  return value + acc.value();
}

ExtendedKernelValue FiniteSystem::kernel_ext(double t1, long x1, double t2, long x2) const {
  double t = model_.t;
  if (!(std::abs(t1) < t) || !(std::abs(t2) < t)) throw DomainError("kernel_ext: times must lie in (-t, t)");
  Profile p1 = profile(t1);
  Profile p2 = profile(-t2);
  BesselTauTable local;
  const BesselTauTable* tab4 = j4_.get();
  if (t1 != t2) {
    local = BesselTauTable(2.0 * t, t1 - t2);
    tab4 = &local;
  }
  ExtendedKernelValue out;
  out.h_ratio = h_ratio_;
  out.reduced = reduced_value(p1, p2, *tab4, t1, x1, t2, x2);
  double sign = ((x1 - x2) % 2 == 0) ? 1.0 : -1.0;
  out.raw = out.reduced / h_ratio_ * sign * std::exp(4.0 * (t1 - t2));
  return out;
}

std::array<cplx, 4> FiniteSystem::e_terms(cplx z, cplx w) const {
  double t = model_.t;
  int m = static_cast<int>(model_.m);
  const BesselSection& s = section_;
  cplx ez = std::exp(t * (z - 1.0 / z)), ew = std::exp(t * (w - 1.0 / w));
  cplx one_s_z = 1.0 - s.s_of(1.0 / z), one_s_w = 1.0 - s.s_of(w);
  cplx e1 = ez / ew * std::pow(z / w, m) * one_s_z * one_s_w;
  cplx e2 = -ez * ew * std::pow(-z, m) * std::pow(-w, m + 1) * one_s_z * s.t_of(w);
  cplx e3 = -1.0 / (ez * ew) * std::pow(-z, -m - 1) * std::pow(-w, -m) * s.t_of(1.0 / z) * one_s_w;
  cplx e4 = -ez / ew * std::pow(z / w, m) * s.t_of(z) * s.t_of(1.0 / w);
  return {e1, e2, e3, e4};
}

namespace {

constexpr double kInnerRadius = 0.9;
constexpr double kOuterRadius = 1.1;

}  // namespace

double FiniteSystem::kernel_contour(double t1, long x1, double t2, long x2, int points) const {
  double t = model_.t;
  if (!(std::abs(t1) < t) || !(std::abs(t2) < t)) throw DomainError("kernel_contour: times must lie in (-t, t)");
  if (points < 8) throw DomainError("kernel_contour: at least 8 points");

  // The integrand is a sum of separable terms a(z) b(w) / (z - w): the E_i
  // factor and the two-term bracket both split in z and w.
  auto integral = [&](int npts) {
    quad::ContourRule zr = quad::circle_rule(kInnerRadius, npts);
    quad::ContourRule wr = quad::circle_rule(kOuterRadius, npts);
    const BesselSection& s = section_;
    int m = static_cast<int>(model_.m);
    auto factors_z = [&](cplx z) {
      cplx ez = std::exp(t * (z - 1.0 / z));
      cplx one_s = 1.0 - s.s_of(1.0 / z);
      std::array<cplx, 4> a{ez * std::pow(z, m) * one_s, -ez * std::pow(-z, m) * one_s,
                            -1.0 / ez * std::pow(-z, -m - 1) * s.t_of(1.0 / z), -ez * std::pow(z, m) * s.t_of(z)};
      cplx p1 = std::pow(-z, -static_cast<int>(x1)) * std::exp(-t1 * (z + 1.0 / z + 2.0));
      cplx p2 = std::pow(-z, static_cast<int>(x2)) * std::exp(t2 * (z + 1.0 / z + 2.0));
      std::array<cplx, 8> out;
      for (int i = 0; i < 4; ++i) {
        out[2 * i] = a[i] * p1;
        out[2 * i + 1] = a[i] * p2;
      }
      return out;
    };
    auto factors_w = [&](cplx w) {
      cplx ew = std::exp(t * (w - 1.0 / w));
      cplx one_s = 1.0 - s.s_of(w);
      std::array<cplx, 4> b{one_s / ew * std::pow(w, -m), ew * std::pow(-w, m + 1) * s.t_of(w),
                            one_s / ew * std::pow(-w, -m), std::pow(w, -m) / ew * s.t_of(1.0 / w)};
      cplx q1 = std::pow(-w, static_cast<int>(x2 - 1)) * std::exp(t2 * (w + 1.0 / w + 2.0));
      cplx q2 = std::pow(-w, -static_cast<int>(x1) - 1) * std::exp(-t1 * (w + 1.0 / w + 2.0));
      std::array<cplx, 8> out;
      for (int i = 0; i < 4; ++i) {
        out[2 * i] = b[i] * q1;
        out[2 * i + 1] = b[i] * q2;
      }
      return out;
    };
    std::vector<std::array<cplx, 8>> fz(npts), fw(npts);
    for (int j = 0; j < npts; ++j) {
      fz[j] = factors_z(zr.nodes[j]);
      fw[j] = factors_w(wr.nodes[j]);
    }
    cplx total = 0.0;
    for (int j = 0; j < npts; ++j) {
      cplx row = 0.0;
      for (int k = 0; k < npts; ++k) {
        cplx inner = 0.0;
        for (int r = 0; r < 8; ++r) inner += fz[j][r] * fw[k][r];
        row += wr.weights[k] * inner / (zr.nodes[j] - wr.nodes[k]);
      }
      total += zr.weights[j] * row;
    }
    return total.real();
  };

  double prev = integral(points);
  double cur = prev;
  bool ok = false;
  for (int attempt = 0; attempt < 2; ++attempt) {
    points *= 2;
    cur = integral(points);
    if (model_.tol.accepts(cur - prev, cur)) {
      ok = true;
      break;
    }
    prev = cur;
  }
  if (!ok) throw ConvergenceError("kernel_contour: circle rules did not converge");

  double value = cur;
  if (t2 < t1) value -= specfun::transition_prob(t1 - t2, x1, x2) * h_ratio_;
  BesselTauTable local;
  const BesselTauTable* tab4 = j4_.get();
  if (t1 != t2) {
    local = BesselTauTable(2.0 * t, t1 - t2);
    tab4 = &local;
  }
  return value + c_value(*tab4, x1 - x2);
}

double FiniteSystem::particle_kernel(long x, long y) const {
  return (x == y ? 1.0 : 0.0) - kernel_ext(0.0, x, 0.0, y).raw;
}

double FiniteSystem::gap_probability(const fredholm::GapRegion& region, GapMode mode) const {
  region.validate();
  std::vector<std::pair<double, long>> points;
  for (const auto& slice : region.slices) {
    const auto* sites = std::get_if<std::vector<long>>(&slice.sites);
    if (!sites) throw DomainError("finite gap probability: slices must carry integer sites");
    if (!(std::abs(slice.time) < model_.t)) throw DomainError("finite gap probability: times must lie in (-t, t)");
    for (long x : *sites) points.emplace_back(slice.time, x);
  }
  long size = static_cast<long>(points.size());
  if (size == 0) return 1.0;

  std::map<double, Profile> left, right;
  std::map<double, BesselTauTable> c_tables;
  for (const auto& slice : region.slices) {
    left.emplace(slice.time, profile(slice.time));
    right.emplace(slice.time, profile(-slice.time));
  }
  for (const auto& s1 : region.slices)
    for (const auto& s2 : region.slices) {
      double d = s1.time - s2.time;
      if (d != 0.0 && !c_tables.count(d)) c_tables.emplace(d, BesselTauTable(2.0 * model_.t, d));
    }

  // entries of the conjugated kernel divided by the H ratio; the diagonal
  // conjugation leaves the determinant unchanged
  Eigen::MatrixXd kernel(size, size);
  parallel_for(static_cast<std::size_t>(size * size), [&](std::size_t idx) {
    long i = static_cast<long>(idx) / size, j = static_cast<long>(idx) % size;
    auto [ti, xi] = points[i];
    auto [tj, xj] = points[j];
    const BesselTauTable& tab4 = (ti == tj) ? *j4_ : c_tables.at(ti - tj);
    kernel(i, j) = reduced_value(left.at(ti), right.at(tj), tab4, ti, xi, tj, xj) / h_ratio_;
  });
  if (mode == GapMode::holes) return fredholm::det_discrete({0, kernel});
  return Eigen::PartialPivLU<Eigen::MatrixXd>(kernel).determinant();
}

}  // namespace tacnode::finite
