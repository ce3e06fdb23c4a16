#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "maxlab/fnspace.hpp"

namespace maxlab {

struct OracleConfig {
  double radius_step = 1e-4;
  double radius_max_factor = 2.0;  // >= 2; scales how far past the support the scan goes
  double fd_step = 1e-5;
  std::uint64_t seed = 0;
};

struct OracleValue {
  double value = 0;
  /// Discretization bound: the exact supremum exceeds the scan maximum by at
  /// most this much (local Lipschitz bound of r -> average times the step).
  double discretization_bound = 0;
};

/// Double-precision view of a piecewise-linear function.  Deliberately a
/// separate code path from the exact engine: plain arrays, linear scans,
/// no shared arithmetic.
class OracleFn {
public:
  explicit OracleFn(const PiecewiseLinearFn& f);

  double eval(double x) const;
  double antiderivative(double x) const;
  double average(double x, double r) const;

  double support_lo() const { return bp_.front(); }
  double support_hi() const { return bp_.back(); }
  double sup_value() const { return sup_value_; }
  double sup_slope() const { return sup_slope_; }

  /// Dense radius scan: max of average(x, r) over r = k*step together with the
  /// r -> 0 value f(x).
  OracleValue maximal(double x, const OracleConfig& cfg) const;

  /// Two-parameter endpoint scan for the uncentered operator.
  double uncentered(double x, double endpoint_step, const OracleConfig& cfg) const;

private:
  std::vector<double> bp_, val_, slope_, prefix_;
  double sup_value_ = 0, sup_slope_ = 0;
};

OracleValue oracle_maximal(const PiecewiseLinearFn& f, double x, const OracleConfig& cfg);

/// Central finite difference of an arbitrary pointwise-computable map.
double oracle_derivative(const std::function<double(double)>& compute, double x,
                         const OracleConfig& cfg);

double oracle_uncentered(const PiecewiseLinearFn& f, double x, double endpoint_step,
                         const OracleConfig& cfg);

}  // namespace maxlab
