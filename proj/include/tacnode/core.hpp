#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace tacnode {

using cplx = std::complex<double>;

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside the supported range (bad order, negative time, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure did not reach the requested accuracy.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// Truncating an infinite contour or range would discard too much.
class TailError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// A Laplace transform was requested outside its certified strip.
class StripError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;

  void validate() const;
  bool accepts(double difference, double scale) const;
};

// Number of worker threads for grid sweeps (TACNODE_LAB_THREADS caps it).
unsigned worker_count();

// Runs body(i) for i in [0, count). Each index is handled exactly once, so
// results written to slot i are independent of the thread layout.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Sums with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace tacnode
