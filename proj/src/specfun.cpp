#include "tacnode/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tacnode::specfun {

namespace {

void check_bessel_range(int n, double x) {
  if (std::abs(n) > kMaxBesselOrder || !(std::abs(x) <= kMaxBesselArgument))
    throw DomainError("bessel_j: |n| and |x| must not exceed 50000 (n=" + std::to_string(n) +
                      ", x=" + std::to_string(x) + ")");
}

// Leading terms of the ascending series, used when x is too small for the
// recurrence to be scaled safely.
std::vector<double> small_argument_sequence(int max_order, double x) {
  std::vector<double> out(max_order + 1, 0.0);
  double half = 0.5 * x;
  double q = -half * half;
  for (int n = 0; n <= max_order; ++n) {
    double log_lead = n * std::log(std::abs(half)) - std::lgamma(n + 1.0);
    if (log_lead < -745.0) break;
    double lead = std::exp(log_lead);
    if (half < 0 && (n & 1)) lead = -lead;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 6; ++k) {
      term *= q / (k * double(n + k));
      sum += term;
    }
    out[n] = lead * sum;
  }
  return out;
}

}  // namespace

std::vector<double> bessel_j_sequence(int max_order, double x) {
  if (max_order < 0) throw DomainError("bessel_j_sequence: negative order");
  check_bessel_range(max_order, x);
  double ax = std::abs(x);
  if (ax == 0.0) {
    std::vector<double> out(max_order + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  if (ax < 1e-6) return small_argument_sequence(max_order, x);

  int start = std::max(max_order, static_cast<int>(std::ceil(ax))) + 20 +
              static_cast<int>(std::ceil(12.0 * std::cbrt(ax)));
  if (start & 1) ++start;

  constexpr double kBig = 1e250;
  constexpr double kShrink = 1e-250;
  std::vector<double> out(max_order + 1, 0.0);
  double jp1 = 0.0, j = 1.0;
  double sum = 2.0;
  for (int k = start; k >= 1; --k) {
    double jm1 = (2.0 * k / ax) * j - jp1;
    int idx = k - 1;
    if (idx <= max_order) out[idx] = jm1;
    if (idx > 0 && !(idx & 1)) sum += 2.0 * jm1;
    if (std::abs(jm1) > kBig) {
      jm1 *= kShrink;
      j *= kShrink;
      sum *= kShrink;
      for (int i = std::max(idx, 0); i <= max_order; ++i) out[i] *= kShrink;
    }
    jp1 = j;
    j = jm1;
  }
  sum += out[0];
  for (double& v : out) v /= sum;
  if (x < 0)
    for (int k = 1; k <= max_order; k += 2) out[k] = -out[k];
  return out;
}

double bessel_j(int n, double x) {
  check_bessel_range(n, x);
  int an = std::abs(n);
  double v = bessel_j_sequence(an, x)[an];
  return (n < 0 && (an & 1)) ? -v : v;
}

double bessel_i_scaled(int n, double x) {
  long an = std::labs(static_cast<long>(n));
  double ax = std::abs(x);
  if (ax == 0.0) return an == 0 ? 1.0 : 0.0;
  double sign = (x < 0 && (an & 1)) ? -1.0 : 1.0;

  // log of (x/2)^n / n!, an upper bound for log(e^{-x} I_n(x)) up to O(1)
  double log_lead = an * std::log(0.5 * ax) - std::lgamma(an + 1.0);
  if (log_lead - ax < -760.0 && an > 2.0 * ax) return 0.0;
  if (ax < 1e-6) {
    double q = 0.25 * ax * ax;
    return sign * std::exp(log_lead - ax) * (1.0 + q / (an + 1.0));
  }

  // Miller recurrence I_{k-1} = (2k/x) I_k + I_{k+1}, normalised with
  // I_0 + 2 sum_{k>=1} I_k = e^x so that the scaled values come out directly.
  long start = static_cast<long>(std::ceil(std::sqrt(double(an) * an + 80.0 * ax))) + 20;
  constexpr double kBig = 1e250;
  constexpr double kShrink = 1e-250;
  double ip1 = 0.0, cur = 1.0;
  double sum = 2.0;
  double result = 0.0;
  for (long k = start; k >= 1; --k) {
    double im1 = (2.0 * k / ax) * cur + ip1;
    if (k - 1 == an) result = im1;
    sum += (k - 1 > 0 ? 2.0 : 1.0) * im1;
    if (im1 > kBig) {
      im1 *= kShrink;
      cur *= kShrink;
      sum *= kShrink;
      result *= kShrink;
    }
    ip1 = cur;
    cur = im1;
  }
  return sign * result / sum;
}

double bessel_i(int n, double x) {
  double scaled = bessel_i_scaled(n, x);
  if (scaled == 0.0) return 0.0;
  double lv = std::log(std::abs(scaled)) + std::abs(x);
  if (lv > 709.0) throw DomainError("bessel_i: result overflows (x=" + std::to_string(x) + ")");
  return scaled * std::exp(std::abs(x));
}

double bessel_j_tau(int x, double tau, double t) {
  if (!(t > 0.0) || !(std::abs(tau) < t))
    throw DomainError("bessel_j_tau: requires |tau| < t");
  double arg = 2.0 * std::sqrt((t - tau) * (t + tau));
  double j = bessel_j(x, arg);
  if (j == 0.0) return 0.0;
  double lg = std::log(std::abs(j)) - 2.0 * tau + 0.5 * x * std::log((t + tau) / (t - tau));
  return std::copysign(std::exp(lg), j);
}

// ---------------------------------------------------------------------------
// Airy function.  For x >= 10 the asymptotic series is accurate to rounding.
// Below that, (Ai, Ai') are tabulated every 0.25 by stepping the Taylor
// series of y'' = x y leftwards from x = 10 (the stable direction for Ai)
// and evaluated by a short Taylor expansion from the nearest node.

namespace {

constexpr double kAsymptoticStart = 10.0;
constexpr double kAnchorStep = 0.25;
constexpr int kAnchorCount = 161;  // 10 down to -30

std::pair<double, double> airy_asymptotic(double x) {
  double zeta = (2.0 / 3.0) * x * std::sqrt(x);
  double u = 1.0, sa = 1.0, sd = 1.0;
  double inv = 1.0 / zeta;
  double pw = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 80; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
    double v = -u * (6.0 * k + 1.0) / (6.0 * k - 1.0);
    pw *= -inv;
    double ta = u * pw;
    if (std::abs(ta) > prev) break;
    sa += ta;
    sd += v * pw;
    prev = std::abs(ta);
    if (prev < 1e-18) break;
  }
  double e = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  double q = std::sqrt(std::sqrt(x));
  return {e / q * sa, -e * q * sd};
}

// Advances (y, y') of y'' = x y from x0 by h.
std::pair<double, double> airy_taylor(double x0, double y0, double d0, double h) {
  double am1 = 0.0;  // a_{k-1}
  double a0 = y0, a1 = d0;
  double y = a0 + a1 * h;
  double d = a1;
  double hk = h;  // h^{k-1} for the derivative, advanced below
  double scale = std::abs(y0) + std::abs(d0) * std::abs(h) + 1e-300;
  int small = 0;
  // a_{k+2} = (x0 a_k + a_{k-1}) / ((k+2)(k+1))
  double ak = a0, ak1 = a1;  // a_k, a_{k+1}
  am1 = 0.0;
  for (int k = 0; k < 120; ++k) {
    double ak2 = (x0 * ak + am1) / ((k + 2.0) * (k + 1.0));
    double dterm = (k + 2.0) * ak2 * hk;  // (k+2) a_{k+2} h^{k+1}
    hk *= h;
    double yterm = ak2 * hk;  // a_{k+2} h^{k+2}
    y += yterm;
    d += dterm;
    if (std::abs(yterm) + std::abs(dterm) * std::abs(h) < 1e-19 * scale) {
      if (++small == 3) break;
    } else {
      small = 0;
    }
    am1 = ak;
    ak = ak1;
    ak1 = ak2;
  }
  return {y, d};
}

struct AiryAnchors {
  std::array<double, kAnchorCount> ai{};
  std::array<double, kAnchorCount> dai{};
  AiryAnchors() {
    auto [y, d] = airy_asymptotic(kAsymptoticStart);
    ai[0] = y;
    dai[0] = d;
    for (int j = 1; j < kAnchorCount; ++j) {
      double x0 = kAsymptoticStart - (j - 1) * kAnchorStep;
      auto next = airy_taylor(x0, ai[j - 1], dai[j - 1], -kAnchorStep);
      ai[j] = next.first;
      dai[j] = next.second;
    }
  }
};

const AiryAnchors& anchors() {
  static const AiryAnchors table;
  return table;
}

}  // namespace

namespace detail {

std::pair<double, double> airy_pair(double x) {
  if (!(x >= kAiryLowerLimit))
    throw DomainError("airy: argument below -30 (x=" + std::to_string(x) + ")");
  if (x >= kAsymptoticStart) {
    if (x > kAiryUpperLimit) return {0.0, 0.0};
    return airy_asymptotic(x);
  }
  const auto& tab = anchors();
  long j = std::lround((kAsymptoticStart - x) / kAnchorStep);
  if (j < 0) j = 0;
  if (j >= kAnchorCount) j = kAnchorCount - 1;
  double xj = kAsymptoticStart - j * kAnchorStep;
  return airy_taylor(xj, tab.ai[j], tab.dai[j], x - xj);
}

double airy_shift_fast(double s, double x) {
  double ai = airy_pair(x + s * s).first;
  if (ai == 0.0) return 0.0;
  double ex = x * s + 2.0 * s * s * s / 3.0;
  if (ex < 700.0) return std::exp(ex) * ai;
  return std::copysign(std::exp(ex + std::log(std::abs(ai))), ai);
}

}  // namespace detail

namespace {
void check_airy_window(double x) {
  if (!(x >= kAiryLowerLimit && x <= kAiryUpperLimit))
    throw DomainError("airy: argument outside [-30, 200] (x=" + std::to_string(x) + ")");
}
}  // namespace

double airy_ai(double x) {
  check_airy_window(x);
  return detail::airy_pair(x).first;
}

double airy_ai_prime(double x) {
  check_airy_window(x);
  return detail::airy_pair(x).second;
}

double airy_ai_shift(double s, double x) {
  if (!std::isfinite(s) || !std::isfinite(x)) throw DomainError("airy_ai_shift: non-finite input");
  check_airy_window(x + s * s);
  return detail::airy_shift_fast(s, x);
}

double transition_prob(double t, long x, long y) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("transition_prob: t must be >= 0");
  long d = std::labs(x - y);
  if (t == 0.0) return d == 0 ? 1.0 : 0.0;
  if (d > std::numeric_limits<int>::max()) return 0.0;
  return bessel_i_scaled(static_cast<int>(d), 2.0 * t);
}

double heat_kernel(double s, double xi1, double xi2) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("heat_kernel: s must be > 0");
  double d = xi1 - xi2;
  return std::exp(-d * d / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s);
}

}  // namespace tacnode::specfun
