#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "maxlab/maxops.hpp"

namespace maxlab {

enum class DerivSource { luiro, m2_formula, f_prime, gap };
const char* to_string(DerivSource s);

/// Which operator a profile samples.
struct OperatorSpec {
  enum class Kind { centered, uncentered, local, short_range, long_range };
  Kind kind = Kind::centered;
  Interval window;                    // for local
  std::optional<Partition> partition; // for short_range / long_range

  static OperatorSpec centered() { return {}; }
  static OperatorSpec uncentered();
  static OperatorSpec local(Interval w);
  static OperatorSpec short_range(Partition p);  // CLI token M1
  static OperatorSpec long_range(Partition p);   // CLI token M2
  std::string name() const;
};

struct ProfilePoint {
  Rational x;
  bool gap = false;  // per-point failure recorded, not fatal
  ExactReal value, radius, derivative;
  RadiusKind kind = RadiusKind::limit_zero;
  bool attained_at_limit = false;
  DerivSource source = DerivSource::gap;
};

/// Per-point maximal values, maximizing radii, and derivative values on a
/// sampling grid; the unit of all L1/variation measurements.
struct GridProfile {
  OperatorSpec op;
  std::vector<ProfilePoint> points;

  std::size_t size() const { return points.size(); }
  bool same_grid(const GridProfile& other) const;

  /// CSV columns: x,value,radius,radius_kind,derivative,derivative_source
  /// plus value_exact,radius_exact when exact_columns is set.  Doubles are
  /// rendered with 17 significant digits; rows for gap points leave the
  /// numeric fields empty.
  void to_csv(std::ostream& os, bool exact_columns = false) const;
};

/// Evaluates the operator on the grid (strictly increasing sample points).
/// Evaluation is point-independent and runs in parallel under the
/// MAXLAB_THREADS budget; results are identical regardless of thread count.
GridProfile profile(const PiecewiseLinearFn& f, const std::vector<Rational>& grid,
                    const OperatorSpec& op);

/// Sampling grid start + k*step up to end.  When a partition is supplied the
/// grid is shifted by half a step and individual points colliding with
/// partition points or exact gap midpoints are nudged, so the one-sided
/// derivative formula stays applicable by construction.
std::vector<Rational> make_grid(const Rational& start, const Rational& end, const Rational& step,
                                const Partition* avoid = nullptr);

}  // namespace maxlab
