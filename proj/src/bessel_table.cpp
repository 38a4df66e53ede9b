#include "tacnode/bessel_table.hpp"

#include <algorithm>
#include <cmath>

#include "tacnode/core.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode {

BesselTauTable::BesselTauTable(double T, double tau) : T_(T), tau_(tau) {
  if (!(T > 0.0) || !(std::abs(tau) < T)) throw DomainError("Bessel table needs |tau| < T");
  double arg = 2.0 * std::sqrt((T - tau) * (T + tau));
  double log_rho = std::log((T + tau) / (T - tau));
  double log_pref = -2.0 * tau;

  long n = static_cast<long>(std::ceil(arg)) + 30 + static_cast<long>(std::ceil(15.0 * std::cbrt(arg)));
  for (;;) {
    if (n > specfun::kMaxBesselOrder) throw DomainError("Bessel table: order range too large");
    std::vector<double> j = specfun::bessel_j_sequence(static_cast<int>(n), arg);
    values_.assign(2 * n + 1, 0.0);
    double peak = 0.0;
    for (long k = -n; k <= n; ++k) {
      long ak = std::labs(k);
      double v = j[ak];
      if (k < 0 && (ak & 1)) v = -v;
      if (v != 0.0) {
        double lg = std::log(std::abs(v)) + log_pref + 0.5 * k * log_rho;
        v = lg < -745.0 ? 0.0 : std::copysign(std::exp(lg), v);
      }
      values_[k + n] = v;
      peak = std::max(peak, std::abs(v));
    }
    double floor = 1e-30 * peak;
    // both ends must already be negligible, otherwise widen the range
    if (std::abs(values_.front()) < floor && std::abs(values_.back()) < floor) {
      long first = 0, last = 2 * n;
      while (first < last && std::abs(values_[first]) < floor) ++first;
      while (last > first && std::abs(values_[last]) < floor) --last;
      lo_ = first - n;
      hi_ = last - n;
      values_ = std::vector<double>(values_.begin() + first, values_.begin() + last + 1);
      return;
    }
    n = n + n / 2 + 16;
  }
}

}  // namespace tacnode
