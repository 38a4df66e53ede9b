#pragma once

#include <vector>

#include "tacnode/core.hpp"
#include "tacnode/finite_kernel.hpp"

// Brute-force ground truth for small systems: Karlin-McGregor enumeration,
// Toeplitz determinants and orthogonal polynomials on the unit circle.
namespace tacnode::oracle {

struct EnumerationWindow {
  long lo = 0;
  long hi = 0;
  double boundary_mass_bound = 0.0;
};

// Bound on the probability that some walker leaves [lo, hi] at one of the
// given times: n sum_{|d| > D} p_{t+tau}(0, d) p_{t-tau}(d, 0) / p_{2t}(0, 0),
// D the distance from the nearest start point to the window edge.
double boundary_mass(const finite::FiniteModel& model, long lo, long hi, const std::vector<double>& times = {0.0});

// [-m-D, m+D] with D >= 8 grown until the boundary mass is below tol.
EnumerationWindow default_window(const finite::FiniteModel& model, double tol = 1e-12,
                                 const std::vector<double>& times = {0.0});

// (det[I_{y_i+j-1-m}(2t)])^2 for a strictly increasing configuration y.
double km_weight(const finite::FiniteModel& model, const std::vector<long>& config);

// P(no particle in E) or P(no hole in E) at time 0 by enumeration.
double brute_gap(const finite::FiniteModel& model, const EnumerationWindow& window, const std::vector<long>& sites,
                 finite::GapMode mode);

// Two-time version at tau1 < tau2 with site sets E1, E2; n <= 3.
double brute_gap_two_time(const finite::FiniteModel& model, const EnumerationWindow& window, double tau1,
                          double tau2, const std::vector<long>& sites1, const std::vector<long>& sites2,
                          finite::GapMode mode);

// Probability that site x is occupied at time 0.
double one_point(const finite::FiniteModel& model, const EnumerationWindow& window, long x);

// e^{-4t^2} det[I_{i-j}(4t)]_{n x n}, in extended precision.
double toeplitz_h(double t, long n_index);

// Coefficients (constant term first) of the orthonormal polynomial P_k for
// the weight e^{2t(z + 1/z)} dz / (2 pi i z) on the unit circle.
std::vector<double> opuc_coefficients(double t, int k);
cplx polynomial_value(const std::vector<double>& coefficients, cplx z);

// |P_n(z) - z^n e^{-2t/z} H_n(z^{-1}) / sqrt(H_n(0) H_{n+1}(0))| with
// H_n(z^{-1}) = H_n(0)(1 - R_n(z^{-1})) from the Bessel section.
double opuc_check(const finite::FiniteModel& model, long n_index, cplx z);

}  // namespace tacnode::oracle
