// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tacnode/finite_kernel.hpp"
#include "tacnode/limit.hpp"
#include "tacnode/oracle.hpp"
#include "tacnode/specfun.hpp"

using namespace tacnode;
using finite::FiniteModel;
using finite::FiniteSystem;
using finite::GapMode;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. H_n(0) from the Fredholm determinant against the Toeplitz determinant
Outcome borodin_okounkov() {
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    FiniteSystem sys(FiniteModel{t, 0});
    for (long n = 1; n <= 8; ++n) worst = std::max(worst, std::abs(sys.hn0(n) - oracle::toeplitz_h(t, n)));
  }
  return {worst < 1e-10, fmt("max |H_n(0) - Toeplitz| = %.3e", worst)};
}

// 2. gap probabilities against Karlin-McGregor enumeration
Outcome karlin_mcgregor() {
  const std::vector<std::vector<long>> sets = {{0},     {1},       {-1},       {0, 1},    {-1, 1},
                                               {2, 3},  {-2, 0},   {-1, 0, 1}, {0, 2, 4}, {-3, -2, 3}};
  double worst = 0.0;
  for (long m : {0L, 1L})
    for (double t : {0.5, 1.0}) {
      FiniteModel model{t, m};
      FiniteSystem sys(model);
      oracle::EnumerationWindow win = oracle::default_window(model);
      for (const auto& e : sets)
        for (GapMode mode : {GapMode::particles, GapMode::holes}) {
          fredholm::GapRegion region{{{0.0, e}}};
          worst = std::max(worst, std::abs(sys.gap_probability(region, mode) - oracle::brute_gap(model, win, e, mode)));
        }
    }
  struct TwoTime {
    double tau1, tau2;
    std::vector<long> e1, e2;
    GapMode mode;
  };
  const std::vector<TwoTime> cases = {{-0.2, 0.2, {0}, {0}, GapMode::holes},
                                      {-0.1, 0.3, {0, 1}, {-1}, GapMode::particles},
                                      {0.0, 0.25, {-1, 0}, {1, 2}, GapMode::holes}};
  double worst2 = 0.0;
  FiniteModel model{0.5, 0};
  FiniteSystem sys(model);
  for (const auto& c : cases) {
    oracle::EnumerationWindow win = oracle::default_window(model, 1e-12, {c.tau1, c.tau2});
    fredholm::GapRegion region{{{c.tau1, c.e1}, {c.tau2, c.e2}}};
    double brute = oracle::brute_gap_two_time(model, win, c.tau1, c.tau2, c.e1, c.e2, c.mode);
    worst2 = std::max(worst2, std::abs(sys.gap_probability(region, c.mode) - brute));
  }
  return {worst < 1e-8 && worst2 < 1e-6,
          fmt("single-time max diff %.3e", worst) + fmt(", two-time max diff %.3e", worst2)};
}

// 3. K_m is a rank 2m+1 projection on the certified window
Outcome projection() {
  double trace_err = 0.0, idem = 0.0;
  for (auto [t, m] : {std::pair{0.5, 0L}, {1.0, 1L}, {2.0, 2L}}) {
    FiniteModel model{t, m};
    FiniteSystem sys(model);
    oracle::EnumerationWindow win = oracle::default_window(model, 1e-14);
    long size = win.hi - win.lo + 1;
    Eigen::MatrixXd k(size, size);
    for (long i = 0; i < size; ++i)
      for (long j = 0; j < size; ++j) k(i, j) = sys.particle_kernel(win.lo + i, win.lo + j);
    trace_err = std::max(trace_err, std::abs(k.trace() - double(2 * m + 1)));
    idem = std::max(idem, (k * k - k).lpNorm<Eigen::Infinity>());
  }
  return {trace_err < 1e-6 && idem < 1e-6, fmt("trace err %.3e", trace_err) + fmt(", |K^2 - K| %.3e", idem)};
}

// 4. Bessel-sum form against the double contour form at finite t
Outcome finite_dual_form() {
  FiniteSystem sys(FiniteModel{1.0, 1});
  double worst = 0.0;
  for (auto [t1, t2] : {std::pair{0.2, -0.3}, {-0.4, 0.1}})
    for (long x1 = -2; x1 <= 2; ++x1)
      for (long x2 = -2; x2 <= 2; ++x2)
        worst = std::max(worst, std::abs(sys.kernel_ext(t1, x1, t2, x2).reduced - sys.kernel_contour(t1, x1, t2, x2)));
  return {worst < 1e-8, fmt("max diff %.3e over 2 x 25 points", worst)};
}

// 5. Airy-integral form against the double contour form of the limit kernel
Outcome limit_dual_form() {
  double worst = 0.0, imag = 0.0;
  int count = 0;
  for (double sigma : {-1.0, 0.0, 1.0}) {
    limit::TacnodeModel m;
    m.sigma = sigma;
    limit::TacnodeSystem sys(m);
    for (double s1 : {-0.3, 0.0, 0.3})
      for (double s2 : {-0.3, 0.0, 0.3})
        for (double x1 : {-1.0, 0.0, 1.0})
          for (double x2 : {-1.0, 0.0, 1.0}) {
            limit::ScaledPoint p1{s1, x1}, p2{s2, x2};
            cplx c = sys.kernel_contour_complex(p1, p2);
            imag = std::max(imag, std::abs(c.imag()));
            worst = std::max(worst, std::abs(sys.kernel_airy_form(p1, p2) - c.real()));
            ++count;
          }
  }
  return {worst < 1e-6 && imag < 1e-9,
          fmt("max diff %.3e", worst) + fmt(", max |Im| %.3e", imag) + " over " + std::to_string(count) + " points"};
}

// 6. finite-t kernel converging to the limit kernel
Outcome convergence() {
  limit::TacnodeSystem sys(limit::TacnodeModel{});
  bool ok = true;
  std::string detail;
  for (auto [a, b] : {std::pair{0.0, 0.0}, {0.5, -0.5}}) {
    auto rows = limit::convergence_probe(sys, {0.0, a}, {0.0, b}, {20.0, 50.0, 100.0});
    bool mono = limit::non_increasing(rows, 0.1);
    bool small = rows.back().error < 0.1;
    ok = ok && mono && small;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s(xi=%g,%g) errors %.3e %.3e %.3e%s", detail.empty() ? "" : "; ", a, b,
                  rows[0].error, rows[1].error, rows[2].error, mono ? "" : " [not non-increasing]");
    detail += buf;
  }
  return {ok, detail};
}

// 7. H_n(0) near the edge against the GUE edge distribution
Outcome tracy_widom() {
  double t = 200.0, worst = 0.0;
  FiniteModel model{t, std::lround(2 * t)};
  FiniteSystem sys(model);
  std::string detail;
  for (double x : {-2.0, 0.0, 2.0}) {
    long n = static_cast<long>(std::ceil(4 * t + x * std::cbrt(2 * t)));
    double d = std::abs(sys.hn0(n) - limit::tracy_widom_f2(x));
    worst = std::max(worst, d);
    detail += fmt(detail.empty() ? "diffs %.3e" : " %.3e", d);
  }
  return {worst < 0.05, detail};
}

// 8. identities that hold exactly
Outcome identities() {
  std::vector<std::pair<std::string, double>> fails;
  auto need = [&](const std::string& name, double dev, double bound) {
    if (!(dev <= bound)) fails.push_back({name, dev});
  };
  FiniteSystem sys(FiniteModel{1.0, 1});
  const finite::BesselSection& s = sys.section();
  double cdev = 0.0;
  for (long x = 1; x <= 5; ++x) cdev = std::max(cdev, std::abs(sys.abc_static(x).c - sys.abc_static(-x).c));
  need("C(x) = C(-x)", cdev, 1e-12);

  // the bracket of C_2 at x = 0 is <Q, (K0 - 1) Q + g>, zero since Q solves (1 - K0) Q = g
  const auto& q = s.q();
  double bracket = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    long k = s.start() + long(i);
    double inner = specfun::bessel_j(int(k + 1), 4.0) - q[i];
    for (std::size_t j = 0; j < q.size(); ++j) inner += q[j] * sys.k0_entry(k, s.start() + long(j));
    bracket += q[i] * inner;
  }
  need("C_2 bracket at x = 0", std::abs(bracket), 1e-10);

  double inv = 0.0;
  for (auto [t1, t2] : {std::pair{0.0, 0.0}, {0.3, -0.2}})
    for (long x1 = -2; x1 <= 2; ++x1)
      for (long x2 = -2; x2 <= 2; ++x2)
        inv = std::max(inv, std::abs(sys.kernel_ext(t1, x1, t2, x2).reduced - sys.kernel_ext(-t2, -x2, -t1, -x1).reduced));
  need("involution", inv, 1e-10);

  double hnb = 0.0;
  long size = s.size() + 12;
  for (cplx z : {cplx(-1.0), std::polar(1.0, 1.0), std::polar(1.0, 2.0)}) {
    Eigen::MatrixXcd k = oracle_ref::kernel_z_section(1.0, s.start(), size, z, false);
    cplx direct = (Eigen::MatrixXcd::Identity(size, size) - k).determinant();
    hnb = std::max(hnb, std::abs(direct - s.hn0() * (1.0 - sys.s_t_r(z).r)));
  }
  need("H_n(z^{-1}) two paths", hnb, 1e-9);

  double toe = 0.0;
  for (double t : {0.5, 1.0}) {
    long m = 1;
    for (long k = 1; k <= 3; ++k)
      for (long l = 1; l <= 3; ++l) {
        CompensatedSum acc;
        for (long x = -80; x <= 80; ++x)
          acc.add(specfun::bessel_i(int(x + k - 1 - m), 2 * t) * specfun::bessel_i(int(x + l - 1 - m), 2 * t));
        double ref = specfun::bessel_i(int(k - l), 4 * t);
        toe = std::max(toe, std::abs(acc.value() - ref) / specfun::bessel_i(0, 4 * t));
      }
  }
  need("A-matrix Toeplitz identity", toe, 1e-10);

  double opuc = 0.0;
  FiniteModel om{1.0, 1};
  for (long n : {1L, 2L, 3L, 5L})
    for (double th : {0.3, 2.5}) opuc = std::max(opuc, oracle::opuc_check(om, n, std::polar(1.0, th)));
  need("polynomials from H_n", opuc, 1e-8);

  {
    double t = 1.0;
    int n = 4;
    std::vector<std::vector<double>> p;
    for (int k = 0; k <= n; ++k) p.push_back(oracle::opuc_coefficients(t, k));
    cplx z = std::polar(1.0, 0.7), w = std::polar(1.0, -1.9);
    cplx lhs = 0.0;
    for (int l = 0; l < n; ++l) lhs += oracle::polynomial_value(p[l], 1.0 / z) * oracle::polynomial_value(p[l], w);
    cplx rhs = (std::pow(z, -n) * oracle::polynomial_value(p[n], z) * std::pow(w, n) *
                    oracle::polynomial_value(p[n], 1.0 / w) -
                oracle::polynomial_value(p[n], 1.0 / z) * oracle::polynomial_value(p[n], w)) /
               (1.0 - w / z);
    need("Christoffel-Darboux", std::abs(lhs - rhs), 1e-9);
  }

  double ck = 0.0, norm = 0.0;
  for (auto [a, b] : {std::pair{0.5, 1.0}, {2.0, 0.3}}) {
    for (long x : {0L, 3L}) {
      CompensatedSum acc, tot;
      for (long y = -80; y <= 80; ++y) {
        acc.add(specfun::transition_prob(a, 0, y) * specfun::transition_prob(b, y, x));
        tot.add(specfun::transition_prob(a, 0, y));
      }
      ck = std::max(ck, std::abs(acc.value() - specfun::transition_prob(a + b, 0, x)));
      norm = std::max(norm, std::abs(tot.value() - 1.0));
    }
  }
  need("Chapman-Kolmogorov", ck, 1e-12);
  need("normalization of p_t", norm, 1e-12);

  double bound = 0.0;
  for (double t : {5.0, 50.0, 500.0}) {
    std::vector<double> j = specfun::bessel_j_sequence(static_cast<int>(6 * t), 2 * t);
    for (double v : j) bound = std::max(bound, std::cbrt(2 * t) * std::abs(v));
  }
  need("Bessel bound 0.785", bound, 0.785);

  if (fails.empty()) return {true, "10 identities hold" + fmt(" (Bessel bound max %.4f)", bound)};
  std::string d;
  for (auto& [n, v] : fails) d += n + fmt(" off by %.3e; ", v);
  return {false, d};
}

// 9. decoupling of the two groups at large sigma
Outcome decoupling() {
  limit::TacnodeModel m;
  m.sigma = 5.0;
  limit::TacnodeSystem sys(m);
  double dressed = 0.0, pieces = 0.0;
  for (double s1 : {-0.3, 0.0, 0.3})
    for (double s2 : {-0.3, 0.0, 0.3})
      for (double x1 : {-1.0, 0.0, 1.0})
        for (double x2 : {-1.0, 0.0, 1.0}) {
          limit::ScaledPoint p1{s1, x1}, p2{s2, x2};
          dressed = std::max(dressed, std::abs(sys.kernel_airy_form(p1, p2) - sys.kernel_bare(p1, p2)));
        }
  for (double s : {-0.3, 0.0, 0.3})
    for (double xi : {-1.0, 0.0, 1.0}) {
      limit::ABValue v = sys.script_ab(s, xi);
      pieces = std::max({pieces, std::abs(v.a - specfun::airy_ai_shift(s, 5.0 - xi)), std::abs(v.b),
                         std::abs(sys.script_c(2 * s, xi))});
    }
  return {dressed < 1e-4 && pieces < 1e-4,
          fmt("max |K - two-term kernel| %.3e", dressed) + fmt(", max dressed piece %.3e", pieces)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 Borodin-Okounkov identity", borodin_okounkov},
      {"AC2 Karlin-McGregor enumeration", karlin_mcgregor},
      {"AC3 projection property", projection},
      {"AC4 finite-t dual forms", finite_dual_form},
      {"AC5 limit kernel dual forms", limit_dual_form},
      {"AC6 scaling-limit convergence", convergence},
      {"AC7 Tracy-Widom limit", tracy_widom},
      {"AC8 identity suite", identities},
      {"AC9 decoupling at sigma=5", decoupling},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
