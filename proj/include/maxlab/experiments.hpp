#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maxlab/deriv.hpp"
#include "maxlab/fnspace.hpp"
#include "maxlab/profile.hpp"

namespace maxlab {

// --------------------------------------------------------------------------
// Selection procedures: the cutoff K controlling the variation outside
// (-K, K) and the radius delta controlling the variation near the partition
// points.  Both certify their defining integrals with a factor-two margin so
// the inequality survives nearby functions and denser grids.

struct TailBoundResult {
  Rational K;
  double tail_value = 0;  // certified < eps/2
  int doublings = 0;
  int grid_points = 0;
};

TailBoundResult find_tail_bound(const PiecewiseLinearFn& f, const Rational& epsilon,
                                int grid_points = 257);

struct NearPointDiagnostics {
  long samples = 0;
  long window_exits = 0;           // best window leaves (p - delta0, p + delta0)
  long exit_bound_violations = 0;  // derivative above the long-window bound
  double local_ratio_max = 0;      // variation of the window-restricted operator
                                   // against the local mass of f'
};

struct NearPointResult {
  Rational delta;
  Rational delta_initial;
  long ell = 1;  // delta = delta_initial / ell
  int halvings = 0;
  double variation_sum = 0;  // certified < eps/2
  int samples_per_point = 0;
  NearPointDiagnostics diagnostics;
};

NearPointResult find_near_point_delta(const PiecewiseLinearFn& f,
                                      const std::vector<Rational>& points,
                                      const Rational& epsilon, int samples_per_point = 96,
                                      bool with_diagnostics = false);

/// Variation of the window-restricted maximal operator against the mass of f'
/// inside the window, with a configured constant standing in for the universal
/// one (whose numeric value the theory does not provide).
struct LocalBoundReport {
  double variation = 0;
  double fprime_mass = 0;
  double ratio = 0;
  double c_config = 0;
  bool within = true;
};

LocalBoundReport verify_local_bound(const PiecewiseLinearFn& f, const Rational& lo,
                                    const Rational& hi, int grid_points, double c_config);

// --------------------------------------------------------------------------
// Identities and bounds.

struct DecompositionReport {
  long samples = 0;
  long x_count = 0;  // short-range strictly larger
  long y_count = 0;  // equal
  long z_count = 0;  // long-range strictly larger
  long skipped = 0;  // partition points
  bool residual_zero = true;
  std::vector<Rational> violations;
  Rational step;
};

/// max(short-range, long-range) must equal the full operator exactly at every
/// sample off the partition; also classifies the samples by which side wins.
DecompositionReport verify_decomposition(const PiecewiseLinearFn& f, const Partition& p,
                                         const Rational& lo, const Rational& hi,
                                         const Rational& step);

struct LineIdentityReport {
  long samples = 0;
  long failures = 0;
};

/// Exact check that subtracting a nonpositive line of the gap's slope commutes
/// with the short-range operator, gap by gap, against the partition of f.
LineIdentityReport verify_line_identity(const PiecewiseLinearFn& fj, const PiecewiseLinearFn& f,
                                        int samples_per_gap = 5);

struct M1BoundReport {
  bool precondition_ok = true;
  Rational deriv_gap;  // exact ||fj' - f'||_1
  long identity_samples = 0;
  long identity_failures = 0;
  double lhs = 0;    // ||(M1 fj)' - fj'|| on the grid
  double bound = 0;  // 2 (C+1) eps
  double ratio = 0;
  double skipped_measure = 0;
};

/// (a) the line-subtraction identity, exactly, on every bounded gap with the
/// canonical nonpositive line of slope alpha_i; (b) the grid L1 distance of
/// the short-range derivative from fj' against 2(C+1)eps.
M1BoundReport verify_m1_bound(const PiecewiseLinearFn& fj, const PiecewiseLinearFn& f,
                              const Rational& epsilon, double c_config, const Rational& grid_step,
                              int identity_samples_per_gap = 5);

struct M2RegularityReport {
  long samples = 0;
  long radius_violations = 0;
  long derivative_violations = 0;
  long formula_gaps = 0;
  long lipschitz_pairs = 0;
  long lipschitz_violations = 0;
  double max_abs_derivative = 0;
  double derivative_bound = 0;  // ||f||_1/(2 delta^2) + ||f||_inf/delta
  double lipschitz_bound = 0;   // ||f||_1/(2 delta^2)
  bool ok() const {
    return radius_violations == 0 && derivative_violations == 0 && lipschitz_violations == 0;
  }
};

/// On the exclusion region: every long-range touch has radius >= delta, the
/// derivative obeys the delta bound, and values are Lipschitz within each
/// component with constant ||f||_1/(2 delta^2).
M2RegularityReport verify_m2_regularity(const PiecewiseLinearFn& f, const Partition& p,
                                        const Rational& delta, const Rational& K,
                                        const Rational& grid_step);

// --------------------------------------------------------------------------
// The main experiment: perturb f, profile the operators, and track the
// derivative-level gaps as the perturbation vanishes.

struct ContinuityConfig {
  PerturbationKind kind = PerturbationKind::bump;
  std::vector<int> j_list{1, 2, 4, 8, 16, 32, 64};
  Rational epsilon{2};
  Rational grid_step{1, 100};
  std::uint64_t seed = 0;
  int tail_grid_points = 129;
  int near_point_samples = 64;
  double stability_tol = 1e-3;
  bool with_split_operators = true;  // also profile the short/long-range parts
};

struct ContinuityRow {
  int j = 0;
  Rational sobolev_gap;  // ||fj - f||_{1,1}
  Rational sup_bound;    // (1/2) ||fj' - f'||_1
  double sup_gap = 0;    // grid sup |M fj - M f|
  bool sup_bound_ok = true;
  double derivative_gap = 0;
  double derivative_gap_region = 0;
  double m1_gap_region = 0;
  double m2_gap_region = 0;
  double skipped_measure = 0;
};

struct RadiusStability {
  long checked = 0;
  long stable = 0;
  long tagged = 0;  // kind mismatch, shrink-to-point, or radius jump
  long violations = 0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  Rational epsilon, delta, K, grid_step, grid_lo, grid_hi;
  std::size_t grid_size = 0;
  int j0 = -1;
  RadiusStability stability;
  bool decrease_ok = false;
  double decrease_ratio = 0;  // gap(j_max) / gap(j_min)
};

ContinuityReport run_continuity(const PiecewiseLinearFn& f, const ContinuityConfig& cfg);

/// Minimal single-panel SVG: derivative gap against j on a log10 scale.
std::string continuity_svg(const ContinuityReport& report);

}  // namespace maxlab
