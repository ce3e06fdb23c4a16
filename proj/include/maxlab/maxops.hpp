#pragma once

#include <vector>

#include "maxlab/exact_real.hpp"
#include "maxlab/fnspace.hpp"
#include "maxlab/rational.hpp"

namespace maxlab {

/// How the reported radius of a best window came about.
enum class RadiusKind { interior, breakpoint_touch, constraint_boundary, limit_zero };
const char* to_string(RadiusKind k);

/// A point, a maximizing radius, and the attained average.  For suprema that
/// are only approached (window shrinking to the point, or a radius tending to
/// an open constraint boundary) the radius records the limit configuration and
/// attained_at_limit is set.
struct TouchSpec {
  Rational x;
  ExactReal radius;  // 0 when kind == limit_zero
  ExactReal value;
  RadiusKind kind = RadiusKind::limit_zero;
  bool attained_at_limit = false;
};

/// Feasible radius sets for the constrained suprema.
class RadiusConstraint {
public:
  enum class Tag { unconstrained, below, at_least, window_inside };

  static RadiusConstraint unconstrained() { return RadiusConstraint(Tag::unconstrained, {}, {}); }
  /// Radii 0 < r < d.
  static RadiusConstraint below(Rational d);
  /// Radii r >= d (d = 0 admits every positive radius).
  static RadiusConstraint at_least(Rational d);
  /// Radii with [x-r, x+r] inside the open interval.
  static RadiusConstraint window_inside(Interval window);

  Tag tag() const { return tag_; }
  const Rational& bound() const { return d_; }
  const Interval& window() const { return window_; }

private:
  RadiusConstraint(Tag t, Rational d, Interval w) : tag_(t), d_(std::move(d)), window_(std::move(w)) {}
  Tag tag_;
  Rational d_;
  Interval window_;
};

/// Average of f over [x-r, x+r], exact.  f is assumed nonnegative (the
/// standing reduction), so no absolute value is taken.
Rational window_average(const PiecewiseLinearFn& f, const Rational& x, const Rational& r);
ExactReal window_average(const PiecewiseLinearFn& f, const Rational& x, const ExactReal& r);

struct RadiusCandidate {
  ExactReal radius;
  RadiusKind kind;
  bool open_boundary = false;  // sup approached as r tends to this radius
};

/// Every radius at which the piecewise-rational map r -> average(f, x, r) can
/// attain its supremum under the constraint: breakpoint-touching radii, the
/// stationary root of each smooth span (the average is q(r)/(2r) with q
/// quadratic there, so stationarity reduces to C r^2 = A), the constraint
/// boundaries, and the r -> 0 limit valued f(x).
std::vector<RadiusCandidate> candidate_radii(const PiecewiseLinearFn& f, const Rational& x,
                                             const RadiusConstraint& constraint);

/// Maximizes the average over the candidate set; ties resolve to the smallest
/// radius, so profiles are reproducible.
TouchSpec best_radius(const PiecewiseLinearFn& f, const Rational& x,
                      const RadiusConstraint& constraint);

// The five operators. maximal_gap / maximal_cross are the short-range and
// long-range halves: windows strictly inside the current partition gap versus
// windows reaching the distance to the partition.

TouchSpec maximal_touch(const PiecewiseLinearFn& f, const Rational& x);
ExactReal maximal(const PiecewiseLinearFn& f, const Rational& x);

TouchSpec maximal_local_touch(const PiecewiseLinearFn& f, const Interval& window, const Rational& x);
ExactReal maximal_local(const PiecewiseLinearFn& f, const Interval& window, const Rational& x);

TouchSpec maximal_gap_touch(const PiecewiseLinearFn& f, const Partition& p, const Rational& x);
ExactReal maximal_gap(const PiecewiseLinearFn& f, const Partition& p, const Rational& x);

TouchSpec maximal_cross_touch(const PiecewiseLinearFn& f, const Partition& p, const Rational& x);
ExactReal maximal_cross(const PiecewiseLinearFn& f, const Partition& p, const Rational& x);

/// Best window over all intervals containing x (not necessarily centered).
struct UncenteredTouch {
  ExactReal left, right;  // window [left, right]; equal means the shrinking limit
  ExactReal value;
  bool degenerate = false;
};

/// Two-parameter exact enumeration for the uncentered operator: window
/// endpoints at breakpoints/x, one endpoint stationary (its value equals the
/// average), or both stationary.  Candidates are pre-screened in floating
/// point and near-maximal ones re-evaluated exactly.
class UncenteredEngine {
public:
  explicit UncenteredEngine(const PiecewiseLinearFn& f);
  UncenteredTouch touch(const Rational& x) const;

private:
  const PiecewiseLinearFn& f_;
  std::vector<double> bp_d_, prefix_d_;
};

UncenteredTouch maximal_uncentered_touch(const PiecewiseLinearFn& f, const Rational& x);
ExactReal maximal_uncentered(const PiecewiseLinearFn& f, const Rational& x);

}  // namespace maxlab
