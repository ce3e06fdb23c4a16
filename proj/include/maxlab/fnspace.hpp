#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxlab/exact_real.hpp"
#include "maxlab/rational.hpp"

namespace maxlab {

class StepFn;

/// Continuous piecewise-linear function given by strictly increasing rational
/// breakpoints and the values there.  Outside [first, last] breakpoint the
/// function is identically zero; `create` additionally enforces zero end
/// values so the function is continuous on the whole line (the compactly
/// supported W^{1,1} class every operator here works on).
///
/// All evaluation and integration is exact.  The ExactReal overloads accept
/// quadratic-surd points, which is what optimal window endpoints are.
class PiecewiseLinearFn {
public:
  static PiecewiseLinearFn create(std::vector<Rational> breakpoints, std::vector<Rational> values);
  /// Relaxed variant without the zero-end requirement, for functions that are
  /// only ever averaged over windows inside [first, last] (gap-restricted
  /// helpers).  Still 0 outside the breakpoint range.
  static PiecewiseLinearFn segment(std::vector<Rational> breakpoints, std::vector<Rational> values);

  const std::vector<Rational>& breakpoints() const { return bp_; }
  const std::vector<Rational>& values() const { return val_; }
  std::size_t piece_count() const { return bp_.size() - 1; }

  Rational operator()(const Rational& x) const;
  ExactReal operator()(const ExactReal& x) const;

  /// Integral of f from the first breakpoint to x (0 left of support, total
  /// mass right of it).
  Rational antiderivative(const Rational& x) const;
  ExactReal antiderivative(const ExactReal& x) const;
  Rational integral(const Rational& a, const Rational& b) const;
  ExactReal integral(const ExactReal& a, const ExactReal& b) const;
  const Rational& total_integral() const { return prefix_.back(); }

  StepFn derivative() const;

  Rational norm_l1() const;       // exact ∫|f|
  Rational norm_sup() const;      // max |f|
  Rational norm_sobolev() const;  // ‖f‖₁ + ‖f′‖₁

  bool is_zero() const;
  bool nonnegative() const;
  Rational min_value() const;

  const Rational& support_lo() const { return bp_.front(); }
  const Rational& support_hi() const { return bp_.back(); }
  Rational support_length() const { return bp_.back() - bp_.front(); }

  PiecewiseLinearFn plus(const PiecewiseLinearFn& g) const;
  PiecewiseLinearFn minus(const PiecewiseLinearFn& g) const;
  PiecewiseLinearFn scaled(const Rational& c) const;
  PiecewiseLinearFn translated(const Rational& h) const;
  /// x -> f(x * q), q > 0 rational.
  PiecewiseLinearFn dilated_argument(const Rational& q) const;
  PiecewiseLinearFn clamped_nonnegative() const;

  const Rational& slope(std::size_t piece) const { return slope_[piece]; }

  /// Piece index at x: -1 left of support, piece_count() at/right of the last
  /// breakpoint, otherwise i with bp[i] <= x < bp[i+1].
  long piece_at(const Rational& x) const;

  /// Local expansion of the antiderivative on a piece (the two virtual zero
  /// pieces included): F(t) = F0 + v*(t-origin) + half_slope*(t-origin)^2,
  /// f(t) = v + 2*half_slope*(t-origin).
  struct LocalQuadratic {
    Rational origin, F0, v, half_slope;
  };
  LocalQuadratic local_quadratic(long piece) const;

private:
  PiecewiseLinearFn(std::vector<Rational> bp, std::vector<Rational> val);

  template <typename Num>
  Num eval_impl(const Num& x) const;
  template <typename Num>
  Num antiderivative_impl(const Num& x) const;
  /// Index i with bp[i] <= x < bp[i+1]; -1 left of support, piece_count()-? right.
  template <typename Num>
  long locate(const Num& x) const;

  std::vector<Rational> bp_, val_, slope_, prefix_;
};

/// Piecewise-constant function: plateaus between consecutive breakpoints, zero
/// on the two unbounded end intervals.  Houses derivatives of piecewise-linear
/// functions and the simple approximations of them.
class StepFn {
public:
  static StepFn create(std::vector<Rational> breakpoints, std::vector<Rational> plateaus);

  const std::vector<Rational>& breakpoints() const { return bp_; }
  const std::vector<Rational>& plateaus() const { return plateau_; }

  /// Right-continuous evaluation; 0 outside [first, last).
  Rational operator()(const Rational& x) const;

  Rational l1_norm() const;
  Rational l1_norm_over(const Rational& lo, const Rational& hi) const;
  Rational sup_norm() const;

  StepFn minus(const StepFn& g) const;

  /// Merges equal adjacent plateaus; with trim_zero_edges also drops leading /
  /// trailing plateaus equal to zero (they are indistinguishable from the
  /// unbounded zero pieces).
  StepFn canonical(bool trim_zero_edges) const;

private:
  StepFn(std::vector<Rational> bp, std::vector<Rational> plateau);
  std::vector<Rational> bp_, plateau_;
};

/// The finite point set driving the short-range/long-range split of the
/// maximal operator, together with the slopes of the step function whose jump
/// points it records (slopes on the two unbounded pieces are zero).
class Partition {
public:
  static Partition create(std::vector<Rational> points, std::vector<Rational> slopes);
  static Partition from_step(const StepFn& g);

  const std::vector<Rational>& points() const { return pts_; }
  const std::vector<Rational>& slopes() const { return slopes_; }

  bool contains(const Rational& x) const;
  Rational distance(const Rational& x) const;
  /// Gap index i in [0, N] such that x lies in (a_i, a_{i+1}) with the
  /// convention a_0 = -inf, a_{N+1} = +inf.  Requires x not in the set.
  std::size_t gap_index(const Rational& x) const;
  /// Slope on that gap.
  const Rational& gap_slope(std::size_t gap) const { return slopes_[gap]; }
  std::optional<Rational> gap_lo(std::size_t gap) const;
  std::optional<Rational> gap_hi(std::size_t gap) const;
  /// Whether x sits strictly closer to the right end of its gap; nullopt at
  /// exact gap midpoints (where the one-sided derivative formula is undefined).
  std::optional<bool> in_right_half(const Rational& x) const;
  std::optional<Rational> min_gap() const;
  Rational max_abs_point() const;

private:
  Partition(std::vector<Rational> pts, std::vector<Rational> slopes);
  std::vector<Rational> pts_, slopes_;
};

/// (-K, K) minus the delta-neighbourhoods of the partition points: the region
/// where the long-range operator is Lipschitz.
class ExclusionRegion {
public:
  static ExclusionRegion create(Partition partition, Rational delta, Rational cutoff);

  const Partition& partition() const { return part_; }
  const Rational& delta() const { return delta_; }
  const Rational& cutoff() const { return cutoff_; }

  bool contains(const Rational& x) const;
  /// Closed sample ranges of the connected components, left to right.
  std::vector<std::pair<Rational, Rational>> components() const;
  /// Component index of x (requires contains(x)).
  std::size_t component_index(const Rational& x) const;

private:
  ExclusionRegion(Partition p, Rational d, Rational k);
  Partition part_;
  Rational delta_, cutoff_;
};

struct SimpleApproximation {
  StepFn g;
  Partition partition;
  Rational error;  // exact ‖f' - g‖₁
};

/// Step-function approximation of f' with certified L¹ error < epsilon.  For
/// piecewise-linear f the derivative is already a step function, so the
/// default result is exact (error 0) and the partition is the jump set of f'.
/// With coarsen set, adjacent pieces are greedily merged (weighted-median
/// plateau, exact error bookkeeping) while the total error stays below
/// epsilon — useful when experiments want a small partition.
SimpleApproximation simple_approximation(const PiecewiseLinearFn& f, const Rational& epsilon,
                                         bool coarsen = false);

enum class PerturbationKind { bump, dilation, shift, noise };
PerturbationKind parse_perturbation_kind(const std::string& name);
const char* to_string(PerturbationKind k);

struct Perturbed {
  PiecewiseLinearFn fn;
  /// Constant c with ‖f_j - f‖_{1,1} <= c/j for this call's j (exact).
  Rational gap_constant;
};

/// Builds the j-th element of a sequence converging to f in W^{1,1}.
/// Deterministic given (kind, seed, j); results are clamped at zero (and
/// re-triangulated) so nonnegativity is preserved.
Perturbed perturbation_sequence(const PiecewiseLinearFn& f, PerturbationKind kind, int j,
                                std::uint64_t seed = 0);

// JSON function format: {"breakpoints": ["-1","0","1"], "values": ["0","1","0"]}
// with rationals as "p/q", integer, or decimal strings.  Values round-trip
// exactly (canonical fraction strings on output).
PiecewiseLinearFn read_function_json(const std::string& text);
std::string write_function_json(const PiecewiseLinearFn& f);
std::string write_step_json(const StepFn& g);

}  // namespace maxlab
