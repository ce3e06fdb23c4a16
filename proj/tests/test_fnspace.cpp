#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "maxlab/errors.hpp"
#include "maxlab/fnspace.hpp"
#include "support/corpus.hpp"

using namespace maxlab;
using testsupport::random_function;
using testsupport::tent;

TEST_CASE("construction and validation") {
  PiecewiseLinearFn T = tent();
  CHECK(T(Rational(0)) == 1);
  CHECK(T(Rational(1) / 2) == Rational(1) / 2);
  CHECK(T(Rational(5)) == 0);
  CHECK(T(Rational(-5)) == 0);

  CHECK_NOTHROW(PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)}));
  CHECK_THROWS_AS(PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(1)}),
                  ValidationError);
  CHECK_THROWS_AS(PiecewiseLinearFn::create({Rational(1), Rational(0)}, {Rational(0), Rational(0)}),
                  ValidationError);
  CHECK_THROWS_AS(PiecewiseLinearFn::create({Rational(0), Rational(1), Rational(2)},
                                            {Rational(0), Rational(0)}),
                  ValidationError);
  CHECK_THROWS_AS(PiecewiseLinearFn::create({Rational(0)}, {Rational(0)}), ValidationError);
}

TEST_CASE("derivative examples") {
  PiecewiseLinearFn T = tent();
  StepFn d = T.derivative();
  CHECK(d(Rational(-1) / 2) == 1);
  CHECK(d(Rational(1) / 2) == -1);
  CHECK(d(Rational(3)) == 0);
  CHECK(d(Rational(-2)) == 0);

  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK(z.derivative().l1_norm() == 0);

  PiecewiseLinearFn spike = PiecewiseLinearFn::create(
      {Rational(0), Rational(1), Rational(2)}, {Rational(0), Rational(3), Rational(0)});
  CHECK(spike.derivative()(Rational(1) / 2) == 3);
  CHECK(spike.derivative()(Rational(3) / 2) == -3);
}

TEST_CASE("norms of the tent") {
  PiecewiseLinearFn T = tent();
  CHECK(T.norm_l1() == 1);
  CHECK(T.norm_sobolev() == 3);
  CHECK(T.norm_sup() == 1);
}

TEST_CASE("norm_l1 splits sign changes exactly") {
  // hat minus shifted hat has genuine sign changes
  PiecewiseLinearFn f = tent();
  PiecewiseLinearFn g = tent().translated(Rational(1) / 3);
  PiecewiseLinearFn d = f.minus(g);
  // independent check by fine Riemann sum
  double approx = 0;
  int n = 20000;
  double lo = -1.5, hi = 2.0;
  for (int i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * (i + 0.5) / n;
    approx += std::abs(to_double(d(Rational(x)))) * (hi - lo) / n;
  }
  CHECK(std::abs(to_double(d.norm_l1()) - approx) < 1e-3);
}

TEST_CASE("antiderivative round trip") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    PiecewiseLinearFn f = random_function(seed);
    StepFn d = f.derivative();
    // integrating the derivative from the left support end reproduces f at
    // every breakpoint
    for (std::size_t i = 0; i < f.breakpoints().size(); ++i) {
      Rational acc(0);
      for (std::size_t k = 0; k + 1 < f.breakpoints().size(); ++k) {
        if (f.breakpoints()[k + 1] > f.breakpoints()[i]) break;
        acc += d(f.breakpoints()[k]) * (f.breakpoints()[k + 1] - f.breakpoints()[k]);
      }
      CHECK(acc == f.values()[i]);
    }
  }
}

TEST_CASE("sup norm bound from the fundamental theorem") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PiecewiseLinearFn f = random_function(seed);
    CHECK(2 * f.norm_sup() <= f.derivative().l1_norm());
  }
}

TEST_CASE("simple approximation, exact default") {
  PiecewiseLinearFn T = tent();
  SimpleApproximation a = simple_approximation(T, Rational(1, 1000));
  CHECK(a.error == 0);
  CHECK(a.partition.points() == std::vector<Rational>{Rational(-1), Rational(0), Rational(1)});
  CHECK(a.g(Rational(-1) / 2) == 1);
  CHECK(a.g(Rational(1) / 2) == -1);
  // recomputing the error from scratch gives the same exact rational
  CHECK(T.derivative().minus(a.g).l1_norm() == a.error);

  PiecewiseLinearFn z =
      PiecewiseLinearFn::create({Rational(0), Rational(1)}, {Rational(0), Rational(0)});
  CHECK_THROWS_AS(simple_approximation(z, Rational(1)), ValidationError);
}

TEST_CASE("simple approximation, coarsened") {
  PiecewiseLinearFn T = tent();
  SimpleApproximation a = simple_approximation(T, Rational(3), /*coarsen=*/true);
  CHECK(a.error == 2);  // g == 0 on (-1,1): integral of |T'| is exactly 2
  CHECK(a.partition.points() == std::vector<Rational>{Rational(-1), Rational(1)});
  CHECK(a.g(Rational(0)) == 0);
  CHECK(T.derivative().minus(a.g).l1_norm() == a.error);
  CHECK(a.error < 3);

  // the partition keeps zero slopes on the unbounded gaps
  CHECK(a.partition.slopes().front() == 0);
  CHECK(a.partition.slopes().back() == 0);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PiecewiseLinearFn f = random_function(seed);
    Rational eps = f.derivative().l1_norm() / 3;
    SimpleApproximation c = simple_approximation(f, eps, true);
    CHECK(c.error < eps);
    CHECK(f.derivative().minus(c.g).l1_norm() == c.error);
    CHECK(!c.partition.points().empty());
  }
}

TEST_CASE("canonical partition drops collinear breakpoints") {
  PiecewiseLinearFn f = PiecewiseLinearFn::create(
      {Rational(0), Rational(1), Rational(2), Rational(3)},
      {Rational(0), Rational(0), Rational(1), Rational(0)});
  SimpleApproximation a = simple_approximation(f, Rational(1));
  // slope is 0 on (0,1), so the derivative's support starts at 1
  CHECK(a.partition.points() == std::vector<Rational>{Rational(1), Rational(2), Rational(3)});
}

TEST_CASE("bump perturbation has the exact advertised gap") {
  PiecewiseLinearFn T = tent();
  for (int j : {1, 2, 5, 64}) {
    Perturbed p = perturbation_sequence(T, PerturbationKind::bump, j);
    CHECK(p.fn.minus(T).norm_sobolev() == Rational(5) / (2 * j));
    CHECK(p.gap_constant == Rational(5) / 2);
    CHECK(p.fn.nonnegative());
  }
}

TEST_CASE("perturbations shrink monotonically along dyadic j") {
  for (std::uint64_t seed : {1, 2, 3}) {
    PiecewiseLinearFn f = random_function(seed);
    for (PerturbationKind kind : {PerturbationKind::bump, PerturbationKind::shift,
                                  PerturbationKind::dilation, PerturbationKind::noise}) {
      Rational prev(-1);
      for (int j = 1; j <= 64; j *= 2) {
        Perturbed p = perturbation_sequence(f, kind, j, 11);
        Rational gap = p.fn.minus(f).norm_sobolev();
        CHECK(gap <= p.gap_constant / j);
        if (sign(prev) >= 0) CHECK(gap <= prev);
        prev = gap;
        CHECK(p.fn.nonnegative());
      }
    }
  }
}

TEST_CASE("perturbation determinism and unknown kinds") {
  PiecewiseLinearFn f = random_function(4);
  Perturbed a = perturbation_sequence(f, PerturbationKind::noise, 3, 1234);
  Perturbed b = perturbation_sequence(f, PerturbationKind::noise, 3, 1234);
  CHECK(a.fn.breakpoints() == b.fn.breakpoints());
  CHECK(a.fn.values() == b.fn.values());
  Perturbed c = perturbation_sequence(f, PerturbationKind::noise, 3, 99);
  CHECK(a.fn.minus(c.fn).norm_sobolev() != 0);
  CHECK_THROWS_AS(parse_perturbation_kind("wiggle"), ValidationError);
  CHECK_THROWS_AS(perturbation_sequence(f, PerturbationKind::bump, 0), ValidationError);
}

TEST_CASE("rational parsing and JSON round trip") {
  CHECK(parse_rational("3/4") == Rational(3) / 4);
  CHECK(parse_rational("-0.125") == Rational(-1) / 8);
  CHECK(parse_rational(" 17 ") == 17);
  CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_rational("abc"), ValidationError);
  CHECK_THROWS_AS(parse_rational(""), ValidationError);

  PiecewiseLinearFn f = random_function(9);
  PiecewiseLinearFn g = read_function_json(write_function_json(f));
  CHECK(f.breakpoints() == g.breakpoints());
  CHECK(f.values() == g.values());

  PiecewiseLinearFn h = read_function_json(R"({"breakpoints":["-1","0","1"],"values":["0","1","0"]})");
  CHECK(h(Rational(0)) == 1);
  CHECK_THROWS_AS(read_function_json("{\"breakpoints\":[0.5],\"values\":[0]}"), ValidationError);
  CHECK_THROWS_AS(read_function_json("not json"), ValidationError);
}

TEST_CASE("step function basics") {
  StepFn s = StepFn::create({Rational(0), Rational(1), Rational(3)}, {Rational(2), Rational(-1)});
  CHECK(s.l1_norm() == 4);  // 2*1 + 1*2
  CHECK(s(Rational(0)) == 2);
  CHECK(s(Rational(1)) == -1);   // right-continuous
  CHECK(s(Rational(3)) == 0);    // outside
  CHECK(s.l1_norm_over(Rational(1) / 2, Rational(2)) == 2);  // 2*(1/2) + 1*1
  CHECK(s.sup_norm() == 2);

  StepFn t = s.minus(s);
  CHECK(t.l1_norm() == 0);
}

TEST_CASE("partition geometry") {
  Partition p = Partition::create({Rational(-1), Rational(0), Rational(1)}, {});
  CHECK(p.distance(Rational(1) / 2) == Rational(1) / 2);
  CHECK(p.distance(Rational(7)) == 6);
  CHECK(p.contains(Rational(0)));
  CHECK(!p.contains(Rational(2)));
  CHECK(p.gap_index(Rational(5)) == 3);
  CHECK(p.gap_index(Rational(-5)) == 0);
  CHECK(*p.in_right_half(Rational(3) / 4));          // closer to 1
  CHECK(!*p.in_right_half(Rational(5)));             // unbounded right gap
  CHECK(*p.in_right_half(Rational(-5)));             // unbounded left gap
  CHECK(!p.in_right_half(Rational(1) / 2).has_value());  // exact midpoint
  CHECK(*p.min_gap() == 1);
  CHECK_THROWS_AS(Partition::create({}, {}), ValidationError);
  CHECK_THROWS_AS(Partition::create({Rational(0)}, {Rational(1), Rational(0)}), ValidationError);
}

TEST_CASE("exclusion region") {
  Partition p = Partition::create({Rational(-1), Rational(0), Rational(1)}, {});
  CHECK_THROWS_AS(ExclusionRegion::create(p, Rational(2) / 3, Rational(8)), ValidationError);
  CHECK_THROWS_AS(ExclusionRegion::create(p, Rational(1) / 4, Rational(1)), ValidationError);
  ExclusionRegion r = ExclusionRegion::create(p, Rational(1) / 4, Rational(8));
  CHECK(r.contains(Rational(1) / 2));   // midpoint of a gap, distance 1/2 >= 1/4
  CHECK(!r.contains(Rational(9)));      // beyond the cutoff
  CHECK(!r.contains(Rational(9) / 8));  // within delta of 1
  CHECK(r.components().size() == 4);
  CHECK(r.component_index(Rational(1) / 2) == 2);
}

TEST_CASE("clamping keeps nonnegativity and support") {
  PiecewiseLinearFn f = tent().minus(tent().translated(Rational(1) / 2).scaled(Rational(2)));
  CHECK(!f.nonnegative());
  PiecewiseLinearFn g = f.clamped_nonnegative();
  CHECK(g.nonnegative());
  // clamp only removes the negative part
  for (int k = -8; k <= 12; ++k) {
    Rational x(k, 8);
    CHECK(g(x) == std::max(f(x), Rational(0)));
  }
}
