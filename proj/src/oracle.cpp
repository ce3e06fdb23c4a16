#include "maxlab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "maxlab/errors.hpp"

namespace maxlab {

OracleFn::OracleFn(const PiecewiseLinearFn& f) {
  const auto& bp = f.breakpoints();
  const auto& val = f.values();
  bp_.reserve(bp.size());
  val_.reserve(bp.size());
  for (std::size_t i = 0; i < bp.size(); ++i) {
    bp_.push_back(to_double(bp[i]));
    val_.push_back(to_double(val[i]));
    sup_value_ = std::max(sup_value_, std::fabs(val_.back()));
  }
  prefix_.assign(bp_.size(), 0.0);
  slope_.assign(bp_.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    double len = bp_[i + 1] - bp_[i];
    slope_[i] = (val_[i + 1] - val_[i]) / len;
    prefix_[i + 1] = prefix_[i] + 0.5 * (val_[i] + val_[i + 1]) * len;
    sup_slope_ = std::max(sup_slope_, std::fabs(slope_[i]));
  }
}

double OracleFn::eval(double x) const {
  if (x <= bp_.front() || x >= bp_.back()) return 0.0;
  auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - bp_.begin()) - 1;
  return val_[i] + slope_[i] * (x - bp_[i]);
}

double OracleFn::antiderivative(double x) const {
  if (x <= bp_.front()) return 0.0;
  if (x >= bp_.back()) return prefix_.back();
  auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - bp_.begin()) - 1;
  double dx = x - bp_[i];
  return prefix_[i] + val_[i] * dx + 0.5 * slope_[i] * dx * dx;
}

double OracleFn::average(double x, double r) const {
  return (antiderivative(x + r) - antiderivative(x - r)) / (2 * r);
}

OracleValue OracleFn::maximal(double x, const OracleConfig& cfg) const {
  if (cfg.radius_step <= 0) throw ValidationError("oracle radius step must be positive");
  const double support_len = bp_.back() - bp_.front();
  const double far_end = std::max(std::fabs(x - bp_.front()), std::fabs(x - bp_.back()));
  const double r_max = far_end + std::max(1.0, cfg.radius_max_factor) * std::max(support_len, 1e-9);

  double best = eval(x);  // the r -> 0 limit
  double best_r = 0.0;

  // Incremental scan: both window endpoints move monotonically, so the piece
  // indices only ever step forward/backward.
  const std::size_t n = bp_.size();
  long ir = 0, il = 0;
  {
    double t0 = x;
    ir = static_cast<long>(std::upper_bound(bp_.begin(), bp_.end(), t0) - bp_.begin()) - 1;
    il = ir;
  }
  auto F_at = [&](double t, long i) -> double {
    if (i < 0) return 0.0;
    if (i >= static_cast<long>(n) - 1) return prefix_.back();
    double dx = t - bp_[i];
    return prefix_[i] + val_[i] * dx + 0.5 * slope_[i] * dx * dx;
  };

  const long steps = static_cast<long>(std::ceil(r_max / cfg.radius_step));
  for (long k = 1; k <= steps; ++k) {
    double r = k * cfg.radius_step;
    double tr = x + r, tl = x - r;
    while (ir < static_cast<long>(n) - 1 && tr >= bp_[ir + 1]) ++ir;
    while (il >= 0 && tl < bp_[il]) --il;
    double avg = (F_at(tr, ir) - F_at(tl, il)) / (2 * r);
    if (avg > best) {
      best = avg;
      best_r = r;
    }
  }

  OracleValue out;
  out.value = best;
  double local = best_r > cfg.radius_step ? 2 * sup_value_ / best_r : sup_slope_;
  out.discretization_bound = cfg.radius_step * std::max(sup_slope_, local);
  return out;
}

double OracleFn::uncentered(double x, double endpoint_step, const OracleConfig& cfg) const {
  if (endpoint_step <= 0) throw ValidationError("oracle endpoint step must be positive");
  const double support_len = bp_.back() - bp_.front();
  const double reach = std::max(1.0, cfg.radius_max_factor) * std::max(support_len, 1e-9);
  const double lo = std::min(x, bp_.front()) - endpoint_step;
  const double hi = std::max(x, bp_.back()) + endpoint_step;
  (void)reach;

  double best = eval(x);
  const long na = static_cast<long>(std::ceil((x - lo) / endpoint_step));
  const long nb = static_cast<long>(std::ceil((hi - x) / endpoint_step));
  for (long i = 0; i <= na; ++i) {
    double a = x - i * endpoint_step;
    double Fa = antiderivative(a);
    for (long j = (i == 0 ? 1 : 0); j <= nb; ++j) {
      double b = x + j * endpoint_step;
      double avg = (antiderivative(b) - Fa) / (b - a);
      best = std::max(best, avg);
    }
  }
  return best;
}

OracleValue oracle_maximal(const PiecewiseLinearFn& f, double x, const OracleConfig& cfg) {
  return OracleFn(f).maximal(x, cfg);
}

double oracle_derivative(const std::function<double(double)>& compute, double x,
                         const OracleConfig& cfg) {
  if (cfg.fd_step <= 0) throw ValidationError("finite-difference step must be positive");
  return (compute(x + cfg.fd_step) - compute(x - cfg.fd_step)) / (2 * cfg.fd_step);
}

double oracle_uncentered(const PiecewiseLinearFn& f, double x, double endpoint_step,
                         const OracleConfig& cfg) {
  return OracleFn(f).uncentered(x, endpoint_step, cfg);
}

}  // namespace maxlab
