#pragma once

#include <vector>

namespace tacnode {

// J^{(tau)}_j(2T) = e^{-2 tau} ((T+tau)/(T-tau))^{j/2} J_j(2 sqrt(T^2 - tau^2))
// for every integer order j. Orders outside [lo, hi] are below 1e-30 times
// the largest entry (beyond the argument the values decrease monotonically)
// and are returned as zero.
class BesselTauTable {
 public:
  BesselTauTable() = default;
  BesselTauTable(double T, double tau);

  double operator()(long j) const { return (j < lo_ || j > hi_) ? 0.0 : values_[j - lo_]; }
  long lo() const { return lo_; }
  long hi() const { return hi_; }
  double T() const { return T_; }
  double tau() const { return tau_; }

 private:
  double T_ = 0.0;
  double tau_ = 0.0;
  long lo_ = 0;
  long hi_ = -1;
  std::vector<double> values_;
};

}  // namespace tacnode
