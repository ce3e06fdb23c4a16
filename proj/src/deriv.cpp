#include "maxlab/deriv.hpp"

#include <cmath>

#include "maxlab/errors.hpp"
#include "maxlab/util.hpp"

namespace maxlab {

ExactReal luiro_derivative(const PiecewiseLinearFn& f, const TouchSpec& touch,
                           const StepFn* fprime) {
  if (touch.kind == RadiusKind::limit_zero) {
    if (fprime) return ExactReal((*fprime)(touch.x));
    return ExactReal(f.derivative()(touch.x));
  }
  if (touch.radius.sgn() <= 0) throw ValidationError("touch radius must be positive");
  ExactReal xe(touch.x);
  ExactReal hi = f(xe + touch.radius);
  ExactReal lo = f(xe - touch.radius);
  return (hi - lo) / (ExactReal(2) * touch.radius);
}

ExactReal pinned_window_derivative(const PiecewiseLinearFn& f, const Rational& x,
                                   const ExactReal& r, bool pinned_right) {
  if (r.sgn() <= 0) throw ValidationError("pinned window needs a positive radius");
  ExactReal xe(x);
  ExactReal integral = f.integral(xe - r, xe + r);
  ExactReal r2 = r * r;
  if (pinned_right) return integral / (ExactReal(2) * r2) - f(xe - r) / r;
  return f(xe + r) / r - integral / (ExactReal(2) * r2);
}

ExactReal m2_derivative(const PiecewiseLinearFn& f, const Partition& p, const TouchSpec& touch) {
  Rational d = p.distance(touch.x);
  if (sign(d) == 0)
    throw ValidationError("derivative formula needs a positive distance to the partition");
  auto right_half = p.in_right_half(touch.x);
  if (!right_half)
    throw ValidationError("derivative formula undefined at an exact gap midpoint");
  if (touch.kind == RadiusKind::limit_zero)
    throw ValidationError("derivative formula needs a positive radius");
  return pinned_window_derivative(f, touch.x, touch.radius, /*pinned_right=*/*right_half);
}

L1DistanceReport l1_derivative_distance(const GridProfile& p, const GridProfile& q,
                                        const ExclusionRegion* region) {
  if (!p.same_grid(q)) throw ValidationError("derivative distance needs identical grids");
  L1DistanceReport out;
  std::vector<double> terms;
  terms.reserve(p.size());
  auto usable = [&](const ProfilePoint& a, const ProfilePoint& b) {
    if (a.gap || b.gap) return false;
    if (region && (!region->contains(a.x) || !region->contains(b.x))) return false;
    return true;
  };
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const auto &a1 = p.points[i], &a2 = p.points[i + 1];
    const auto &b1 = q.points[i], &b2 = q.points[i + 1];
    double len = to_double(a2.x - a1.x);
    if (!usable(a1, b1) || !usable(a2, b2)) {
      out.skipped_measure += len;
      continue;
    }
    double d1 = std::fabs(a1.derivative.to_double() - b1.derivative.to_double());
    double d2 = std::fabs(a2.derivative.to_double() - b2.derivative.to_double());
    terms.push_back((d1 + d2) / 2 * len);
  }
  out.distance = pairwise_sum(terms);
  return out;
}

double total_variation(const GridProfile& p) {
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p.points[i].gap || p.points[i + 1].gap) continue;
    terms.push_back(std::fabs(p.points[i + 1].value.to_double() - p.points[i].value.to_double()));
  }
  return pairwise_sum(terms);
}

UncenteredVariationReport uncentered_total_variation(const PiecewiseLinearFn& f,
                                                     int samples_per_piece) {
  if (samples_per_piece < 1) throw ValidationError("need at least one sample per piece");
  UncenteredEngine engine(f);
  std::vector<Rational> grid;
  const auto& bp = f.breakpoints();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    Rational step = (bp[i + 1] - bp[i]) / (samples_per_piece + 1);
    grid.push_back(bp[i]);
    for (int k = 1; k <= samples_per_piece; ++k) grid.push_back(bp[i] + k * step);
  }
  grid.push_back(bp.back());

  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { values[i] = engine.touch(grid[i]).value.to_double(); });

  UncenteredVariationReport out;
  std::vector<double> terms;
  terms.reserve(values.size());
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    terms.push_back(std::fabs(values[i + 1] - values[i]));
  out.interior = pairwise_sum(terms);
  out.tail_left = values.front();
  out.tail_right = values.back();
  return out;
}

TailVariationReport tail_variation(const PiecewiseLinearFn& f, const Rational& K,
                                   int grid_points) {
  if (sign(K) <= 0) throw ValidationError("K must be positive");
  TailVariationReport out;
  auto side = [&](bool right) {
    Rational boundary = right ? Rational(K) : Rational(-K);
    Rational edge = right ? f.support_hi() : f.support_lo();
    bool inside_support = right ? boundary < edge : boundary > edge;
    Rational junction = inside_support ? edge : boundary;
    if (inside_support && grid_points > 1) {
      Rational lo = right ? boundary : edge;
      Rational hi = right ? edge : boundary;
      Rational step = (hi - lo) / (grid_points - 1);
      double prev = 0;
      std::vector<double> terms;
      for (int k = 0; k < grid_points; ++k) {
        double v = maximal(f, lo + k * step).to_double();
        if (k > 0) terms.push_back(std::fabs(v - prev));
        prev = v;
      }
      out.grid_part += pairwise_sum(terms);
    }
    // Monotone beyond the support: the whole remaining variation is the value
    // at the junction.
    out.exact_tail += maximal(f, junction).to_double();
  };
  side(true);
  side(false);
  return out;
}

double near_point_variation(const PiecewiseLinearFn& f, const Rational& p, const Rational& delta,
                            int samples) {
  if (sign(delta) <= 0) throw ValidationError("delta must be positive");
  if (samples < 2) throw ValidationError("need at least two samples");
  Rational lo = p - delta;
  Rational step = 2 * delta / (samples - 1);
  std::vector<double> values(static_cast<std::size_t>(samples));
  parallel_for(values.size(),
               [&](std::size_t k) { values[k] = maximal(f, lo + Rational(static_cast<long>(k)) * step).to_double(); });
  std::vector<double> terms;
  terms.reserve(values.size());
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    terms.push_back(std::fabs(values[k + 1] - values[k]));
  return pairwise_sum(terms);
}

}  // namespace maxlab
