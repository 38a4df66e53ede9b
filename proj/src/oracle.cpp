#include "tacnode/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>

#include "tacnode/bessel_table.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode::oracle {

namespace {

// det of a small square matrix by partial pivoting in long double
long double small_det(std::vector<std::vector<long double>> a) {
  std::size_t n = a.size();
  long double det = 1.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (a[p][c] == 0.0L) return 0.0L;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

long double bessel_i_ld(long k, long double x) {
  k = std::labs(k);
  long double half = x / 2;
  long double term = 1.0L;
  for (long j = 1; j <= k; ++j) term *= half / j;
  long double sum = 0.0L;
  for (long j = 0; j < 100000; ++j) {
    sum += term;
    term *= half * half / ((j + 1.0L) * (j + 1.0L + k));
    if (term < 1e-24L * sum && j > 2 * half) break;
  }
  return sum;
}

// Calls visit(config) for every strictly increasing n-subset of [lo, hi].
void for_each_config(long lo, long hi, long n, const std::function<void(const std::vector<long>&)>& visit) {
  long w = hi - lo + 1;
  if (n > w) return;
  std::vector<long> idx(n);
  for (long i = 0; i < n; ++i) idx[i] = i;
  std::vector<long> config(n);
  for (;;) {
    for (long i = 0; i < n; ++i) config[i] = lo + idx[i];
    visit(config);
    long i = n - 1;
    while (i >= 0 && idx[i] == w - n + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (long j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(long w, long n) {
  if (n < 0 || n > w) return 0.0;
  double b = 1.0;
  for (long i = 1; i <= n; ++i) b = b * (w - n + i) / i;
  return b;
}

bool contains_all(const std::vector<long>& config, const std::vector<long>& sites) {
  for (long s : sites)
    if (!std::binary_search(config.begin(), config.end(), s)) return false;
  return true;
}

bool avoids(const std::vector<long>& config, const std::vector<long>& sites) {
  for (long s : sites)
    if (std::binary_search(config.begin(), config.end(), s)) return false;
  return true;
}

bool event(const std::vector<long>& config, const std::vector<long>& sites, finite::GapMode mode) {
  return mode == finite::GapMode::particles ? avoids(config, sites) : contains_all(config, sites);
}

void check_sites(const std::vector<long>& sites) {
  for (std::size_t i = 1; i < sites.size(); ++i)
    if (!(sites[i] > sites[i - 1])) throw DomainError("oracle: site sets must be strictly increasing");
}

void check_window(const finite::FiniteModel& model, const EnumerationWindow& window,
                  const std::vector<double>& times) {
  if (window.hi - window.lo + 1 < model.n()) throw DomainError("oracle: window narrower than the walker count");
  double bound = boundary_mass(model, window.lo, window.hi, times);
  if (!(bound < std::max(model.tol.abs_tol, 1e-12)))
    throw DomainError("oracle: window too small, boundary mass " + std::to_string(bound));
}

}  // namespace

double boundary_mass(const finite::FiniteModel& model, long lo, long hi, const std::vector<double>& times) {
  double t = model.t;
  long m = model.m;
  double norm = specfun::transition_prob(2.0 * t, 0, 0);
  double worst = 0.0;
  for (double tau : times) {
    if (!(std::abs(tau) < t)) throw DomainError("oracle: times must lie in (-t, t)");
    auto tail = [&](long d0) {
      // sum over d > d0 of p_{t+tau}(0, d) p_{t-tau}(d, 0)
      double s = 0.0;
      for (long d = std::max(d0 + 1, 0L);; ++d) {
        double term = specfun::transition_prob(t + tau, 0, d) * specfun::transition_prob(t - tau, d, 0);
        s += term;
        if (d > 2 * t + 10 && term < 1e-30 * std::max(s, 1e-300)) break;
        if (term == 0.0 && d > 2 * t + 10) break;
      }
      return s;
    };
    double mass = tail(hi - m) + tail(-m - lo);
    worst = std::max(worst, model.n() * mass / norm);
  }
  return worst;
}

EnumerationWindow default_window(const finite::FiniteModel& model, double tol, const std::vector<double>& times) {
  model.validate();
  long m = model.m;
  for (long d = 8; d < 400; ++d) {
    double bound = boundary_mass(model, -m - d, m + d, times);
    if (bound < tol) return {-m - d, m + d, bound};
  }
  throw ConvergenceError("oracle: no window with boundary mass below tolerance");
}

double km_weight(const finite::FiniteModel& model, const std::vector<long>& config) {
  long n = model.n();
  if (static_cast<long>(config.size()) != n) throw DomainError("km_weight: configuration must have n entries");
  check_sites(config);
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      a[i][j] = specfun::bessel_i(static_cast<int>(config[i] + j - model.m), 2.0 * model.t);
  long double d = small_det(a);
  return static_cast<double>(d * d);
}

double brute_gap(const finite::FiniteModel& model, const EnumerationWindow& window, const std::vector<long>& sites,
                 finite::GapMode mode) {
  model.validate();
  check_sites(sites);
  if (sites.empty()) return 1.0;
  check_window(model, window, {0.0});
  CompensatedSum total, hit;
  for_each_config(window.lo, window.hi, model.n(), [&](const std::vector<long>& config) {
    double w = km_weight(model, config);
    total.add(w);
    if (event(config, sites, mode)) hit.add(w);
  });
  if (!(total.value() > 0.0)) throw ConvergenceError("brute_gap: zero partition function");
  return hit.value() / total.value();
}

double one_point(const finite::FiniteModel& model, const EnumerationWindow& window, long x) {
  model.validate();
  check_window(model, window, {0.0});
  CompensatedSum total, hit;
  for_each_config(window.lo, window.hi, model.n(), [&](const std::vector<long>& config) {
    double w = km_weight(model, config);
    total.add(w);
    if (std::binary_search(config.begin(), config.end(), x)) hit.add(w);
  });
  return hit.value() / total.value();
}

double brute_gap_two_time(const finite::FiniteModel& model, const EnumerationWindow& window, double tau1,
                          double tau2, const std::vector<long>& sites1, const std::vector<long>& sites2,
                          finite::GapMode mode) {
  model.validate();
  double t = model.t;
  long n = model.n();
  if (n > 3) throw DomainError("brute_gap_two_time: at most 3 walkers");
  if (!(-t < tau1 && tau1 < tau2 && tau2 < t)) throw DomainError("brute_gap_two_time: need -t < tau1 < tau2 < t");
  check_sites(sites1);
  check_sites(sites2);
  if (sites1.empty() && sites2.empty()) return 1.0;
  check_window(model, window, {tau1, tau2});
  long w = window.hi - window.lo + 1;
  double configs = binomial(w, n);
  if (configs * configs > 1e7) throw DomainError("brute_gap_two_time: more than 1e7 configuration pairs");

  std::vector<std::vector<long>> all;
  for_each_config(window.lo, window.hi, n, [&](const std::vector<long>& c) { all.push_back(c); });
  std::vector<long> ends(n);
  for (long i = 0; i < n; ++i) ends[i] = model.m - i;  // m+1-i for i = 1..n

  auto det_p = [&](double time, const std::vector<long>& from, const std::vector<long>& to) {
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n));
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) a[i][j] = specfun::transition_prob(time, from[i], to[j]);
    return static_cast<double>(small_det(a));
  };
  std::vector<double> first(all.size()), last(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    first[i] = det_p(t + tau1, ends, all[i]);
    last[i] = det_p(t - tau2, all[i], ends);
  }
  CompensatedSum total, hit;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (first[i] == 0.0) continue;
    bool e1 = sites1.empty() || event(all[i], sites1, mode);
    for (std::size_t j = 0; j < all.size(); ++j) {
      double wgt = first[i] * det_p(tau2 - tau1, all[i], all[j]) * last[j];
      total.add(wgt);
      if (e1 && (sites2.empty() || event(all[j], sites2, mode))) hit.add(wgt);
    }
  }
  if (!(total.value() > 0.0)) throw ConvergenceError("brute_gap_two_time: zero partition function");
  return hit.value() / total.value();
}

double toeplitz_h(double t, long n_index) {
  if (n_index < 1) throw DomainError("toeplitz_h: n must be at least 1");
  if (!(t >= 0.0)) throw DomainError("toeplitz_h: t must be nonnegative");
  std::vector<long double> moments(2 * n_index - 1);
  for (long k = 0; k < n_index; ++k) moments[k] = bessel_i_ld(k, 4.0L * t);
  std::vector<std::vector<long double>> a(n_index, std::vector<long double>(n_index));
  for (long i = 0; i < n_index; ++i)
    for (long j = 0; j < n_index; ++j) a[i][j] = moments[std::labs(i - j)];
  long double t_ld = t;
  return static_cast<double>(small_det(a) * std::exp(-4.0L * t_ld * t_ld));
}

std::vector<double> opuc_coefficients(double t, int k) {
  if (k < 0) throw DomainError("opuc_coefficients: degree must be nonnegative");
  auto mu = [&](long i, long j) { return bessel_i_ld(i - j, 4.0L * t); };
  auto moment_det = [&](int size) {
    std::vector<std::vector<long double>> a(size, std::vector<long double>(size));
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) a[i][j] = mu(i, j);
    return size == 0 ? 1.0L : small_det(a);
  };
  long double dk = moment_det(k), dk1 = moment_det(k + 1);
  long double diag = std::pow(mu(0, 0), static_cast<long double>(k + 1));
  if (!(dk1 > 1e-11L * diag)) throw ConvergenceError("opuc_coefficients: moment matrix ill-conditioned");
  long double scale = 1.0L / std::sqrt(dk * dk1);
  std::vector<double> coeff(k + 1);
  for (int row = 0; row <= k; ++row) {
    // cofactor of the entry z^row in the last column
    std::vector<std::vector<long double>> minor;
    for (int i = 0; i <= k; ++i) {
      if (i == row) continue;
      std::vector<long double> r(k);
      for (int j = 0; j < k; ++j) r[j] = mu(i, j);
      minor.push_back(std::move(r));
    }
    long double cof = (k == 0) ? 1.0L : small_det(minor);
    if ((row + k) % 2) cof = -cof;
    coeff[row] = static_cast<double>(cof * scale);
  }
  return coeff;
}

cplx polynomial_value(const std::vector<double>& coefficients, cplx z) {
  cplx acc = 0.0;
  for (std::size_t i = coefficients.size(); i-- > 0;) acc = acc * z + coefficients[i];
  return acc;
}

double opuc_check(const finite::FiniteModel& model, long n_index, cplx z) {
  model.validate();
  if (n_index < 0) throw DomainError("opuc_check: index must be nonnegative");
  if (std::abs(std::abs(z) - 1.0) > 1e-12) throw DomainError("opuc_check: z must lie on the unit circle");
  auto j4 = std::make_shared<BesselTauTable>(2.0 * model.t, 0.0);
  finite::BesselSection s0(j4, n_index, model.theta, model.tol);
  finite::BesselSection s1(j4, n_index + 1, model.theta, model.tol);
  cplx hz = s0.hn0() * (1.0 - s0.r_of(1.0 / z));
  cplx rhs = std::pow(z, static_cast<int>(n_index)) * std::exp(-2.0 * model.t / z) * hz / std::sqrt(s0.hn0() * s1.hn0());
  cplx lhs = polynomial_value(opuc_coefficients(model.t, static_cast<int>(n_index)), z);
  return std::abs(lhs - rhs);
}

}  // namespace tacnode::oracle
