#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "maxlab/errors.hpp"
#include "maxlab/maxops.hpp"
#include "maxlab/oracle.hpp"
#include "maxlab/profile.hpp"
#include "support/corpus.hpp"

using namespace maxlab;
using testsupport::random_function;
using testsupport::sample_points;
using testsupport::tent;

namespace {
const ExactReal kSqrt7 = ExactReal::sqrt_of(Rational(7));
}

TEST_CASE("window averages") {
  PiecewiseLinearFn T = tent();
  CHECK(window_average(T, Rational(0), Rational(1)) == Rational(1) / 2);
  CHECK(window_average(T, Rational(0), Rational(1) / 2) == Rational(3) / 4);
  CHECK(window_average(T, Rational(2), Rational(1)) == 0);
  CHECK_THROWS_AS(window_average(T, Rational(0), Rational(0)), ValidationError);
  CHECK_THROWS_AS(window_average(T, Rational(0), Rational(-1)), ValidationError);
  // surd radius: (F(x+r)-F(x-r))/(2r) at r = sqrt(7), x = 2 equals (3-sqrt(7))/2
  ExactReal avg = window_average(T, Rational(2), kSqrt7);
  CHECK(avg == (ExactReal(3) - kSqrt7) / ExactReal(2));
}

TEST_CASE("candidate radii for the tent at x=2") {
  PiecewiseLinearFn T = tent();
  auto cands = candidate_radii(T, Rational(2), RadiusConstraint::unconstrained());
  bool has1 = false, has2 = false, has3 = false, has_root7 = false, has_limit = false;
  for (const auto& c : cands) {
    if (c.kind == RadiusKind::breakpoint_touch) {
      if (c.radius == ExactReal(1)) has1 = true;
      if (c.radius == ExactReal(2)) has2 = true;
      if (c.radius == ExactReal(3)) has3 = true;
    }
    if (c.kind == RadiusKind::interior && c.radius == kSqrt7) has_root7 = true;
    if (c.kind == RadiusKind::limit_zero) has_limit = true;
  }
  CHECK(has1);
  CHECK(has2);
  CHECK(has3);
  CHECK(has_root7);
  CHECK(has_limit);
}

TEST_CASE("candidate radii respect the at-least constraint") {
  for (std::uint64_t seed : {3, 4}) {
    PiecewiseLinearFn f = random_function(seed);
    for (const Rational& x : sample_points(seed, 10)) {
      Rational d(3, 2);
      for (const auto& c : candidate_radii(f, x, RadiusConstraint::at_least(d)))
        CHECK(c.radius >= ExactReal(d));
    }
  }
}

TEST_CASE("best radius on the tent") {
  PiecewiseLinearFn T = tent();

  TouchSpec at0 = best_radius(T, Rational(0), RadiusConstraint::unconstrained());
  CHECK(at0.kind == RadiusKind::limit_zero);
  CHECK(at0.attained_at_limit);
  CHECK(at0.value == ExactReal(1));

  TouchSpec at2 = best_radius(T, Rational(2), RadiusConstraint::unconstrained());
  CHECK(at2.kind == RadiusKind::interior);
  CHECK(at2.radius == kSqrt7);
  CHECK(at2.value == (ExactReal(3) - kSqrt7) / ExactReal(2));
  CHECK(std::abs(at2.value.to_double() - 0.177124) < 1e-6);
  CHECK(std::abs(at2.radius.to_double() - 2.645751) < 1e-6);

  TouchSpec below = best_radius(T, Rational(2), RadiusConstraint::below(Rational(1) / 4));
  CHECK(below.value == ExactReal(0));

  CHECK_THROWS_AS(best_radius(T, Rational(0), RadiusConstraint::below(Rational(0))),
                  DegenerateConstraint);
}

TEST_CASE("maximal operator basics") {
  PiecewiseLinearFn T = tent();
  CHECK(maximal(T, Rational(0)) == ExactReal(1));
  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK(maximal(z, Rational(5)) == ExactReal(0));
  CHECK(maximal(z, Rational(1) / 2) == ExactReal(0));
}

TEST_CASE("window-restricted operator") {
  PiecewiseLinearFn T = tent();
  CHECK(maximal_local(T, Interval{}, Rational(0)) == ExactReal(1));  // I = R reduces to M
  TouchSpec t = maximal_local_touch(T, Interval{Rational(-1) / 4, Rational(1) / 4}, Rational(0));
  CHECK(t.value == ExactReal(1));
  CHECK(t.attained_at_limit);
  CHECK(maximal_local(T, Interval{Rational(3) / 2, Rational(5)}, Rational(2)) == ExactReal(0));
  CHECK_THROWS_AS(maximal_local(T, Interval{Rational(3), Rational(5)}, Rational(0)),
                  ValidationError);
}

TEST_CASE("short and long range operators") {
  PiecewiseLinearFn T = tent();
  Partition p0 = Partition::create({Rational(0)}, {});

  // at x=2 the distance is 2 and the long-range optimum sits at sqrt(7) >= 2
  TouchSpec cross = maximal_cross_touch(T, p0, Rational(2));
  CHECK(cross.radius == kSqrt7);
  CHECK(cross.value == (ExactReal(3) - kSqrt7) / ExactReal(2));

  // on the partition point the whole family r > 0 is admissible and the sup
  // is approached shrinking to the point
  TouchSpec at_p = maximal_cross_touch(T, p0, Rational(0));
  CHECK(at_p.value == ExactReal(1));
  CHECK(at_p.attained_at_limit);

  CHECK_THROWS_AS(maximal_gap(T, p0, Rational(0)), DegenerateConstraint);

  Partition p = Partition::create({Rational(-1), Rational(0), Rational(1)}, {});
  Rational x(1, 2);
  ExactReal m1 = maximal_gap(T, p, x);
  ExactReal m2 = maximal_cross(T, p, x);
  ExactReal m = maximal(T, x);
  CHECK((ExactReal::compare(m1, m2) >= 0 ? m1 : m2) == m);
}

TEST_CASE("decomposition identity over the corpus") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    PiecewiseLinearFn f = random_function(seed);
    Partition p = simple_approximation(f, Rational(1)).partition;
    for (const Rational& x : sample_points(seed + 100, 25)) {
      if (p.contains(x)) continue;
      ExactReal m1 = maximal_gap(f, p, x);
      ExactReal m2 = maximal_cross(f, p, x);
      const ExactReal& mx = ExactReal::compare(m1, m2) >= 0 ? m1 : m2;
      CHECK(mx == maximal(f, x));
    }
  }
}

TEST_CASE("exact engine against the dense radius oracle") {
  OracleConfig cfg;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    PiecewiseLinearFn f = random_function(seed);
    OracleFn view(f);
    for (const Rational& x : sample_points(seed + 50, 12)) {
      double exact = maximal(f, x).to_double();
      OracleValue o = view.maximal(to_double(x), cfg);
      CHECK(exact >= o.value - 1e-9);                        // never below the scan
      CHECK(exact - o.value <= o.discretization_bound + 1e-6);  // and within its bound
    }
  }
}

TEST_CASE("pointwise domination and monotone localization") {
  for (std::uint64_t seed : {2, 5}) {
    PiecewiseLinearFn f = random_function(seed);
    UncenteredEngine engine(f);
    for (const Rational& x : sample_points(seed + 9, 10)) {
      ExactReal m = maximal(f, x);
      CHECK(m >= ExactReal(f(x)));
      CHECK(engine.touch(x).value >= m);
      ExactReal small = maximal_local(f, Interval{x - 1, x + 1}, x);
      ExactReal big = maximal_local(f, Interval{x - 4, x + 4}, x);
      CHECK(small <= big);
      CHECK(big <= m);
    }
  }
}

TEST_CASE("sublinearity in the sup norm") {
  for (std::uint64_t seed : {1, 3}) {
    PiecewiseLinearFn f = random_function(seed);
    PiecewiseLinearFn g = random_function(seed + 7);
    Rational bound = f.minus(g).norm_sup();
    for (const Rational& x : sample_points(seed + 13, 10)) {
      CHECK(ExactReal::abs_diff_le(maximal(f, x), maximal(g, x), bound));
    }
  }
}

TEST_CASE("scaling equivariance, exact") {
  Rational c(3, 7);
  for (std::uint64_t seed : {4, 6}) {
    PiecewiseLinearFn f = random_function(seed);
    PiecewiseLinearFn cf = f.scaled(c);
    for (const Rational& x : sample_points(seed + 21, 8)) {
      CHECK(maximal(cf, x) == ExactReal(c) * maximal(f, x));
    }
  }
}

TEST_CASE("uncentered operator") {
  PiecewiseLinearFn T = tent();
  CHECK(maximal_uncentered(T, Rational(0)) == ExactReal(1));
  // reaching back into the mass beats the centered value at x=2
  CHECK(maximal_uncentered(T, Rational(2)) >= maximal(T, Rational(2)));

  // against the two-parameter scan
  OracleConfig cfg;
  for (std::uint64_t seed : {1, 2}) {
    PiecewiseLinearFn f = random_function(seed);
    OracleFn view(f);
    UncenteredEngine engine(f);
    for (const Rational& x : sample_points(seed + 33, 4)) {
      double exact = engine.touch(x).value.to_double();
      double scan = view.uncentered(to_double(x), 5e-3, cfg);
      CHECK(exact >= scan - 1e-9);
      CHECK(exact - scan <= 0.1);  // coarse scan, generous cap
    }
  }
}

TEST_CASE("profiles") {
  PiecewiseLinearFn T = tent();
  GridProfile single = profile(T, {Rational(0)}, OperatorSpec::centered());
  CHECK(single.size() == 1);
  CHECK(single.points[0].value == ExactReal(1));

  std::vector<Rational> grid = make_grid(Rational(-4), Rational(4), Rational(1) / 5);
  GridProfile prof = profile(T, grid, OperatorSpec::centered());
  for (const auto& p : prof.points) {
    CHECK(!p.gap);
    CHECK(p.value >= ExactReal(T(p.x)));
    CHECK(p.value.sgn() >= 0);
  }

  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  GridProfile zp = profile(z, grid, OperatorSpec::centered());
  for (const auto& p : zp.points) CHECK(p.value == ExactReal(0));

  // deterministic: two runs agree exactly
  GridProfile again = profile(T, grid, OperatorSpec::centered());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(prof.points[i].value == again.points[i].value);
    CHECK(prof.points[i].radius == again.points[i].radius);
  }

  // short-range profile records partition points as gaps
  Partition p0 = Partition::create({Rational(0)}, {});
  GridProfile m1p = profile(T, {Rational(-1) / 2, Rational(0), Rational(1) / 2},
                            OperatorSpec::short_range(p0));
  CHECK(m1p.points[1].gap);
  CHECK(!m1p.points[0].gap);
}

TEST_CASE("grid construction") {
  std::vector<Rational> g = make_grid(Rational(-4), Rational(4), Rational(1) / 100);
  CHECK(g.size() == 801);
  CHECK(g.front() == -4);
  CHECK(g.back() == 4);

  Partition p = Partition::create({Rational(0)}, {});
  std::vector<Rational> ga = make_grid(Rational(-1), Rational(1), Rational(1) / 4, &p);
  for (const Rational& x : ga) CHECK(!p.contains(x));
  for (std::size_t i = 0; i + 1 < ga.size(); ++i) CHECK(ga[i] < ga[i + 1]);
}
