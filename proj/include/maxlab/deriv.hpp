#pragma once

#include <optional>

#include "maxlab/fnspace.hpp"
#include "maxlab/maxops.hpp"
#include "maxlab/profile.hpp"

namespace maxlab {

/// Derivative of the maximal function via the best window: the average of f'
/// over [x-r, x+r], i.e. (f(x+r) - f(x-r)) / (2r).  When the supremum is only
/// attained as r -> 0 the value falls back to f'(x) (right-continuous at
/// breakpoints), which is the almost-everywhere derivative on {Mf = f}.
ExactReal luiro_derivative(const PiecewiseLinearFn& f, const TouchSpec& touch,
                           const StepFn* fprime = nullptr);

/// One-sided derivative formula for the long-range operator: with the near
/// partition point on the right of x, integral/(2 r^2) - f(x-r)/r, and the
/// mirror image when it is on the left.  Undefined at exact gap midpoints.
ExactReal m2_derivative(const PiecewiseLinearFn& f, const Partition& p, const TouchSpec& touch);

/// Same expression with the pinned window side given explicitly; used for
/// every constraint-boundary-locked touch (window endpoint riding on a
/// partition point or on a window edge).
ExactReal pinned_window_derivative(const PiecewiseLinearFn& f, const Rational& x,
                                   const ExactReal& r, bool pinned_right);

struct L1DistanceReport {
  double distance = 0;
  double skipped_measure = 0;  // total length of segments dropped (gaps/region)
};

/// Trapezoid L1 distance of the derivative columns over a shared grid,
/// skipping gap-tagged points and, when a region is given, points outside it.
L1DistanceReport l1_derivative_distance(const GridProfile& p, const GridProfile& q,
                                        const ExclusionRegion* region = nullptr);

/// Sum of |value_{k+1} - value_k| over the grid: a lower bound for the true
/// variation, non-decreasing under grid refinement.
double total_variation(const GridProfile& p);

struct UncenteredVariationReport {
  double interior = 0;   // grid variation inside the support
  double tail_left = 0;  // exact: the uncentered maximal function is monotone
  double tail_right = 0; // beyond the support, so each tail contributes its value
  double total() const { return interior + tail_left + tail_right; }
};

/// Grid variation of the uncentered maximal function inside the support plus
/// the exact monotone-tail contributions.
UncenteredVariationReport uncentered_total_variation(const PiecewiseLinearFn& f,
                                                     int samples_per_piece);

struct TailVariationReport {
  double grid_part = 0;   // variation between K and the support edge, if any
  double exact_tail = 0;  // Mf(K') at the junction; exact by monotone decay
  double total() const { return grid_part + exact_tail; }
};

/// Variation of the centered maximal function outside (-K, K).  Beyond the
/// support Mf decays monotonically, so the unbounded part equals the value at
/// the junction exactly; only the (rare) portion between K and the support
/// edge needs a grid.
TailVariationReport tail_variation(const PiecewiseLinearFn& f, const Rational& K, int grid_points);

/// Grid variation of the centered maximal function over [p-delta, p+delta].
double near_point_variation(const PiecewiseLinearFn& f, const Rational& p, const Rational& delta,
                            int samples);

}  // namespace maxlab
