#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "maxlab/deriv.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/oracle.hpp"
#include "support/corpus.hpp"

using namespace maxlab;
using testsupport::random_function;
using testsupport::sample_points;
using testsupport::tent;

namespace {
const ExactReal kSqrt7 = ExactReal::sqrt_of(Rational(7));
// (M T)'(2) = (7 - 3 sqrt(7)) / 14, from the closed-form best window
const ExactReal kTentDeriv2 = (ExactReal(7) - ExactReal(3) * kSqrt7) / ExactReal(14);
}  // namespace

TEST_CASE("optimal-window derivative on the tent") {
  PiecewiseLinearFn T = tent();
  TouchSpec t2 = maximal_touch(T, Rational(2));
  ExactReal d = luiro_derivative(T, t2);
  CHECK(d == kTentDeriv2);
  CHECK(std::abs(d.to_double() - (-0.066947)) < 1e-6);

  // shrink-to-point fallback uses the right-continuous slope
  TouchSpec t0 = maximal_touch(T, Rational(0));
  CHECK(t0.kind == RadiusKind::limit_zero);
  CHECK(luiro_derivative(T, t0) == ExactReal(-1));

  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK(luiro_derivative(z, maximal_touch(z, Rational(3))) == ExactReal(0));
}

TEST_CASE("long-range derivative formula agrees with the window derivative") {
  PiecewiseLinearFn T = tent();
  Partition p0 = Partition::create({Rational(0)}, {});
  TouchSpec cross = maximal_cross_touch(T, p0, Rational(2));
  ExactReal formula = m2_derivative(T, p0, cross);
  CHECK(formula == kTentDeriv2);  // exact agreement at the stationary radius

  // mirrored point: same magnitude, opposite sign
  TouchSpec mirror = maximal_cross_touch(T, p0, Rational(-2));
  CHECK(m2_derivative(T, p0, mirror) == -kTentDeriv2);
}

TEST_CASE("long-range derivative formula edge cases") {
  PiecewiseLinearFn T = tent();
  // a window on which f vanishes identically: formula gives exactly 0
  Partition p4 = Partition::create({Rational(4)}, {});
  TouchSpec far;
  far.x = Rational(6);
  far.radius = ExactReal(2);  // window [4, 8] misses the support
  far.value = ExactReal(0);
  far.kind = RadiusKind::constraint_boundary;
  CHECK(m2_derivative(T, p4, far) == ExactReal(0));

  // exact gap midpoint is rejected
  Partition p = Partition::create({Rational(-1), Rational(1)}, {});
  TouchSpec mid = maximal_cross_touch(T, p, Rational(0));
  CHECK_THROWS_AS(m2_derivative(T, p, mid), ValidationError);

  // zero distance is rejected
  Partition p0 = Partition::create({Rational(0)}, {});
  TouchSpec on_point = maximal_cross_touch(T, p0, Rational(0));
  CHECK_THROWS_AS(m2_derivative(T, p0, on_point), ValidationError);
}

TEST_CASE("derivative distance is a metric on fixed grids") {
  PiecewiseLinearFn T = tent();
  std::vector<Rational> grid = make_grid(Rational(-3), Rational(3), Rational(1) / 10);
  GridProfile a = profile(T, grid, OperatorSpec::centered());
  GridProfile b = profile(perturbation_sequence(T, PerturbationKind::bump, 2).fn, grid,
                          OperatorSpec::centered());
  GridProfile c = profile(perturbation_sequence(T, PerturbationKind::shift, 3).fn, grid,
                          OperatorSpec::centered());

  CHECK(l1_derivative_distance(a, a).distance == 0);
  double ab = l1_derivative_distance(a, b).distance;
  double ba = l1_derivative_distance(b, a).distance;
  CHECK(ab == ba);
  double ac = l1_derivative_distance(a, c).distance;
  double bc = l1_derivative_distance(b, c).distance;
  CHECK(ac <= ab + bc + 1e-12);

  GridProfile other = profile(T, make_grid(Rational(-3), Rational(3), Rational(1) / 9),
                              OperatorSpec::centered());
  CHECK_THROWS_AS(l1_derivative_distance(a, other), ValidationError);
}

TEST_CASE("grid total variation refines monotonically to the true variation") {
  PiecewiseLinearFn T = tent();
  // synthesize profiles carrying f itself; nested grids, so variation grows
  auto tv_of_f = [&](const Rational& step) {
    std::vector<Rational> grid = make_grid(Rational(-2), Rational(2), step);
    GridProfile prof;
    prof.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      prof.points[i].x = grid[i];
      prof.points[i].value = ExactReal(T(grid[i]));
    }
    return total_variation(prof);
  };
  double coarse = tv_of_f(Rational(1) / 2);
  double mid = tv_of_f(Rational(1) / 4);
  double fine = tv_of_f(Rational(1) / 1000);
  CHECK(coarse <= mid + 1e-12);
  CHECK(mid <= fine + 1e-12);
  CHECK(std::abs(fine - 2.0) < 1e-3);  // Var(T) = ||T'||_1 = 2

  GridProfile flat;
  flat.points.resize(5);
  for (int i = 0; i < 5; ++i) flat.points[i].x = Rational(i);
  CHECK(total_variation(flat) == 0);
}

TEST_CASE("uncentered variation bound with constant one") {
  PiecewiseLinearFn T = tent();
  UncenteredVariationReport r = uncentered_total_variation(T, 64);
  CHECK(r.total() <= 2.0 + 1e-3);  // Var(T') = 2; uncentered maximal never exceeds it
  CHECK(r.total() > 1.0);          // and is far from trivial
}

TEST_CASE("tail variation: exact monotone tails") {
  PiecewiseLinearFn T = tent();
  // K beyond the support: the variation outside (-K, K) is exactly
  // MT(K) + MT(-K), no grid part
  TailVariationReport r2 = tail_variation(T, Rational(2), 65);
  CHECK(r2.grid_part == 0);
  double mt2 = maximal(T, Rational(2)).to_double();
  CHECK(std::abs(r2.total() - 2 * mt2) < 1e-14);

  // non-increasing in K
  double prev = tail_variation(T, Rational(3) / 2, 65).total();
  for (const Rational& K : {Rational(2), Rational(3), Rational(5), Rational(9)}) {
    double cur = tail_variation(T, K, 65).total();
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }

  // K inside the support exercises the grid part
  TailVariationReport inner = tail_variation(T, Rational(1) / 2, 65);
  CHECK(inner.grid_part >= 0);
  CHECK(inner.total() >= r2.total());

  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK(tail_variation(z, Rational(1), 65).total() == 0);
}

TEST_CASE("near-point variation shrinks with delta") {
  PiecewiseLinearFn T = tent();
  double prev = near_point_variation(T, Rational(0), Rational(1, 2), 129);
  for (const Rational& d : {Rational(1, 4), Rational(1, 8), Rational(1, 16)}) {
    double cur = near_point_variation(T, Rational(0), d, 129);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK(near_point_variation(z, Rational(0), Rational(1) / 4, 65) == 0);
}

TEST_CASE("window derivative against the finite-difference oracle") {
  OracleConfig cfg;
  for (std::uint64_t seed : {1, 4}) {
    PiecewiseLinearFn f = random_function(seed);
    std::vector<Rational> grid =
        make_grid(f.support_lo() - 1, f.support_hi() + 1, Rational(1) / 8);
    GridProfile prof = profile(f, grid, OperatorSpec::centered());
    double step_d = 1.0 / 8;
    for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
      const auto& p = prof.points[i];
      if (p.gap || p.kind == RadiusKind::limit_zero) continue;
      double jump = std::abs(prof.points[i + 1].radius.to_double() -
                             prof.points[i - 1].radius.to_double());
      if (jump > 10 * step_d) continue;  // radius jump: tagged out
      double fd = oracle_derivative(
          [&](double t) { return maximal(f, Rational(t)).to_double(); }, to_double(p.x), cfg);
      CHECK(std::abs(p.derivative.to_double() - fd) <= 1e-4);
    }
  }
}
