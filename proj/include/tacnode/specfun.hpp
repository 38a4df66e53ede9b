#pragma once

#include <utility>
#include <vector>

#include "tacnode/core.hpp"

namespace tacnode::specfun {

// A lattice point of the walk picture: time tau and integer position x.
struct LatticeSite {
  double tau = 0.0;
  long x = 0;
};

// Accuracy is guaranteed for |n|, |x| <= 5000; the recurrence itself is
// supported (and still accurate) up to these limits.
inline constexpr int kMaxBesselOrder = 50000;
inline constexpr double kMaxBesselArgument = 50000.0;
inline constexpr double kAiryLowerLimit = -30.0;
inline constexpr double kAiryUpperLimit = 200.0;

// J_n(x) by Miller backward recurrence.
double bessel_j(int n, double x);

// J_0(x), ..., J_{max_order}(x) from a single backward recurrence.
std::vector<double> bessel_j_sequence(int max_order, double x);

// I_n(x); throws DomainError when the value overflows a double.
double bessel_i(int n, double x);

// exp(-|x|) I_n(x), safe for large arguments.
double bessel_i_scaled(int n, double x);

// e^{-2 tau} ((t+tau)/(t-tau))^{x/2} J_x(2 sqrt(t^2 - tau^2)), |tau| < t.
double bessel_j_tau(int x, double tau, double t);

double airy_ai(double x);
double airy_ai_prime(double x);

// e^{x s + 2 s^3 / 3} Ai(x + s^2)
double airy_ai_shift(double s, double x);

// Continuous-time walk transition probability e^{-2t} I_{|x-y|}(2t).
double transition_prob(double t, long x, long y);

// Gaussian heat kernel (4 pi s)^{-1/2} exp(-(xi1-xi2)^2 / (4 s)), s > 0.
double heat_kernel(double s, double xi1, double xi2);

namespace detail {
// (Ai, Ai') without the window check on the right; zero beyond 200.
std::pair<double, double> airy_pair(double x);
// airy_ai_shift without argument validation, for inner quadrature loops.
double airy_shift_fast(double s, double x);
}  // namespace detail

}  // namespace tacnode::specfun
