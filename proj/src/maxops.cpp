#include "maxlab/maxops.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "maxlab/errors.hpp"

namespace maxlab {

const char* to_string(RadiusKind k) {
  switch (k) {
    case RadiusKind::interior: return "interior";
    case RadiusKind::breakpoint_touch: return "breakpoint_touch";
    case RadiusKind::constraint_boundary: return "constraint_boundary";
    case RadiusKind::limit_zero: return "limit_zero";
  }
  return "?";
}

RadiusConstraint RadiusConstraint::below(Rational d) {
  return RadiusConstraint(Tag::below, std::move(d), {});
}
RadiusConstraint RadiusConstraint::at_least(Rational d) {
  if (sign(d) < 0) throw ValidationError("at_least bound must be nonnegative");
  return RadiusConstraint(Tag::at_least, std::move(d), {});
}
RadiusConstraint RadiusConstraint::window_inside(Interval window) {
  return RadiusConstraint(Tag::window_inside, Rational(0), std::move(window));
}

Rational window_average(const PiecewiseLinearFn& f, const Rational& x, const Rational& r) {
  if (sign(r) <= 0) throw ValidationError("window radius must be positive");
  return f.integral(x - r, x + r) / (2 * r);
}

ExactReal window_average(const PiecewiseLinearFn& f, const Rational& x, const ExactReal& r) {
  if (r.sgn() <= 0) throw ValidationError("window radius must be positive");
  ExactReal xe(x);
  return f.integral(xe - r, xe + r) / (ExactReal(2) * r);
}

namespace {

Rational rat_abs(const Rational& q) { return sign(q) < 0 ? Rational(-q) : q; }

// Feasible radius set after resolving a constraint at the point x.
struct Feasible {
  Rational lo{0};
  bool lo_attained = false;          // r = lo itself admissible (at_least)
  std::optional<Rational> hi;        // open upper bound (below / window_inside)
  bool include_limit = true;         // r -> 0 lies in the closure of the set
};

Feasible resolve(const PiecewiseLinearFn&, const Rational& x, const RadiusConstraint& c) {
  using Tag = RadiusConstraint::Tag;
  Feasible fs;
  switch (c.tag()) {
    case Tag::unconstrained:
      return fs;
    case Tag::below:
      if (sign(c.bound()) <= 0)
        throw DegenerateConstraint("no radii below a nonpositive bound");
      fs.hi = c.bound();
      return fs;
    case Tag::at_least:
      if (sign(c.bound()) == 0) return fs;  // every r > 0, plus the limit
      fs.lo = c.bound();
      fs.lo_attained = true;
      fs.include_limit = false;
      return fs;
    case Tag::window_inside: {
      if (!c.window().contains_interior(x))
        throw ValidationError("point must lie in the interior of the window");
      std::optional<Rational> d;
      if (c.window().lo) d = x - *c.window().lo;
      if (c.window().hi) {
        Rational dr = *c.window().hi - x;
        if (!d || dr < *d) d = dr;
      }
      if (d) fs.hi = *d;
      return fs;
    }
  }
  return fs;
}

// Coefficients of q(r) = integral over [x-r, x+r] on a span of radii where
// both window endpoints keep their pieces: q = A + B r + C r^2.
struct SpanQuadratic {
  Rational A, B, C;
};

SpanQuadratic span_quadratic(const PiecewiseLinearFn& f, const Rational& x, const Rational& probe) {
  auto P = f.local_quadratic(f.piece_at(x + probe));
  auto M = f.local_quadratic(f.piece_at(x - probe));
  Rational u = x - P.origin;
  Rational w = x - M.origin;
  SpanQuadratic q;
  q.A = (P.F0 + P.v * u + P.half_slope * u * u) - (M.F0 + M.v * w + M.half_slope * w * w);
  q.B = (P.v + 2 * P.half_slope * u) + (M.v + 2 * M.half_slope * w);
  q.C = P.half_slope - M.half_slope;
  return q;
}

// Stationary radius of q(r)/(2r) on the span: (q' r - q) = C r^2 - A = 0.
std::optional<ExactReal> span_stationary(const SpanQuadratic& q, const Rational& lo,
                                         const std::optional<Rational>& hi) {
  if (sign(q.C) == 0) return std::nullopt;
  Rational ratio = q.A / q.C;
  if (sign(ratio) <= 0) return std::nullopt;
  ExactReal root = ExactReal::sqrt_of(ratio);
  if (!(root > ExactReal(lo))) return std::nullopt;
  if (hi && !(root < ExactReal(*hi))) return std::nullopt;
  return root;
}

}  // namespace

std::vector<RadiusCandidate> candidate_radii(const PiecewiseLinearFn& f, const Rational& x,
                                             const RadiusConstraint& constraint) {
  Feasible fs = resolve(f, x, constraint);

  std::vector<Rational> touches;
  touches.reserve(f.breakpoints().size());
  for (const Rational& b : f.breakpoints()) {
    Rational r = rat_abs(x - b);
    if (sign(r) > 0) touches.push_back(r);
  }
  std::sort(touches.begin(), touches.end());
  touches.erase(std::unique(touches.begin(), touches.end()), touches.end());

  std::vector<RadiusCandidate> out;
  bool lo_is_touch = false;
  for (const Rational& r : touches) {
    if (fs.hi && !(r < *fs.hi)) continue;
    if (fs.lo_attained ? r >= fs.lo : r > fs.lo) {
      out.push_back({ExactReal(r), RadiusKind::breakpoint_touch, false});
      if (fs.lo_attained && r == fs.lo) lo_is_touch = true;
    }
  }

  // Smooth spans between consecutive structure-change radii inside the
  // feasible set; each contributes at most one stationary candidate.
  std::vector<Rational> pts{fs.lo};
  for (const Rational& r : touches)
    if (r > fs.lo && (!fs.hi || r < *fs.hi)) pts.push_back(r);
  if (fs.hi) pts.push_back(*fs.hi);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Rational probe = (pts[i] + pts[i + 1]) / 2;
    if (auto r = span_stationary(span_quadratic(f, x, probe), pts[i], pts[i + 1]))
      out.push_back({*r, RadiusKind::interior, false});
  }
  if (!fs.hi) {
    Rational probe = pts.back() + 1;
    if (auto r = span_stationary(span_quadratic(f, x, probe), pts.back(), std::nullopt))
      out.push_back({*r, RadiusKind::interior, false});
  }

  if (fs.lo_attained && sign(fs.lo) > 0 && !lo_is_touch)
    out.push_back({ExactReal(fs.lo), RadiusKind::constraint_boundary, false});
  if (fs.hi)
    out.push_back({ExactReal(*fs.hi), RadiusKind::constraint_boundary, true});
  if (fs.include_limit)
    out.push_back({ExactReal(0), RadiusKind::limit_zero, false});
  return out;
}

TouchSpec best_radius(const PiecewiseLinearFn& f, const Rational& x,
                      const RadiusConstraint& constraint) {
  std::vector<RadiusCandidate> cands = candidate_radii(f, x, constraint);
  if (cands.empty()) throw DegenerateConstraint("empty feasible radius set");

  TouchSpec best;
  bool have = false;
  for (const RadiusCandidate& c : cands) {
    ExactReal value = (c.kind == RadiusKind::limit_zero) ? ExactReal(f(x))
                                                         : window_average(f, x, c.radius);
    bool take = !have;
    if (have) {
      int cv = ExactReal::compare(value, best.value);
      take = cv > 0 || (cv == 0 && c.radius < best.radius);
    }
    if (take) {
      best.x = x;
      best.radius = c.radius;
      best.value = value;
      best.kind = c.kind;
      best.attained_at_limit = (c.kind == RadiusKind::limit_zero) || c.open_boundary;
      have = true;
    }
  }
  return best;
}

TouchSpec maximal_touch(const PiecewiseLinearFn& f, const Rational& x) {
  return best_radius(f, x, RadiusConstraint::unconstrained());
}
ExactReal maximal(const PiecewiseLinearFn& f, const Rational& x) {
  return maximal_touch(f, x).value;
}

TouchSpec maximal_local_touch(const PiecewiseLinearFn& f, const Interval& window,
                              const Rational& x) {
  return best_radius(f, x, RadiusConstraint::window_inside(window));
}
ExactReal maximal_local(const PiecewiseLinearFn& f, const Interval& window, const Rational& x) {
  return maximal_local_touch(f, window, x).value;
}

TouchSpec maximal_gap_touch(const PiecewiseLinearFn& f, const Partition& p, const Rational& x) {
  if (p.contains(x))
    throw DegenerateConstraint("short-range operator undefined on a partition point");
  return best_radius(f, x, RadiusConstraint::below(p.distance(x)));
}
ExactReal maximal_gap(const PiecewiseLinearFn& f, const Partition& p, const Rational& x) {
  return maximal_gap_touch(f, p, x).value;
}

TouchSpec maximal_cross_touch(const PiecewiseLinearFn& f, const Partition& p, const Rational& x) {
  return best_radius(f, x, RadiusConstraint::at_least(p.distance(x)));
}
ExactReal maximal_cross(const PiecewiseLinearFn& f, const Partition& p, const Rational& x) {
  return maximal_cross_touch(f, p, x).value;
}

// ---------------------------------------------------------------------------
// Uncentered operator: exact two-parameter enumeration with a floating-point
// pre-screen.  Every candidate family is evaluated in doubles; the ones within
// a safety margin of the best are re-derived and compared exactly.

namespace {

struct WindowCandidate {
  enum class Type { corner, left_fixed, right_fixed, pair, limit };
  Type type;
  Rational a, b;     // corner / fixed endpoints
  long piece_a = -2, piece_b = -2;
  int root_sign = 0;  // +1 / -1 quadratic branch
};

struct QuadRoots {
  bool valid = false;
  ExactReal plus, minus;
};

QuadRoots solve_quadratic(const Rational& alpha, const Rational& beta, const Rational& gamma) {
  QuadRoots out;
  if (sign(alpha) == 0) {
    if (sign(beta) == 0) return out;
    ExactReal root((-gamma) / beta);
    out.valid = true;
    out.plus = root;
    out.minus = root;
    return out;
  }
  Rational disc = beta * beta - 4 * alpha * gamma;
  if (sign(disc) < 0) return out;
  ExactReal sq = ExactReal::sqrt_of(disc);
  Rational two_a = 2 * alpha;
  out.valid = true;
  out.plus = (ExactReal(-beta) + sq) / ExactReal(two_a);
  out.minus = (ExactReal(-beta) - sq) / ExactReal(two_a);
  return out;
}

}  // namespace

UncenteredEngine::UncenteredEngine(const PiecewiseLinearFn& f) : f_(f) {
  bp_d_.reserve(f.breakpoints().size());
  for (const Rational& b : f.breakpoints()) bp_d_.push_back(to_double(b));
  prefix_d_.reserve(bp_d_.size());
  for (const Rational& b : f.breakpoints()) prefix_d_.push_back(to_double(f.antiderivative(b)));
}

UncenteredTouch UncenteredEngine::touch(const Rational& x) const {
  const auto& bp = f_.breakpoints();
  const double xd = to_double(x);
  const long px = f_.piece_at(x);

  auto eval_d = [&](double t) -> double {
    if (t <= bp_d_.front()) return 0.0;
    if (t >= bp_d_.back()) return 0.0;
    auto it = std::upper_bound(bp_d_.begin(), bp_d_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - bp_d_.begin()) - 1;
    double len = bp_d_[i + 1] - bp_d_[i];
    double lam = (t - bp_d_[i]) / len;
    double v0 = to_double(f_.values()[i]), v1 = to_double(f_.values()[i + 1]);
    return v0 + lam * (v1 - v0);
  };
  auto prefix_at = [&](double t) -> double {
    if (t <= bp_d_.front()) return 0.0;
    if (t >= bp_d_.back()) return prefix_d_.back();
    auto it = std::upper_bound(bp_d_.begin(), bp_d_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - bp_d_.begin()) - 1;
    double dt = t - bp_d_[i];
    double v = to_double(f_.values()[i]);
    double hs = to_double(f_.slope(i)) / 2.0;
    return prefix_d_[i] + v * dt + hs * dt * dt;
  };
  auto avg_d = [&](double a, double b) -> double {
    return (prefix_at(b) - prefix_at(a)) / (b - a);
  };

  std::vector<WindowCandidate> cands;
  std::vector<double> scores;
  auto push = [&](WindowCandidate c, double score) {
    cands.push_back(std::move(c));
    scores.push_back(score);
  };

  // Corners: both endpoints among breakpoints and x itself.
  std::vector<Rational> left_pts{x}, right_pts{x};
  for (const Rational& b : bp) {
    if (b < x) left_pts.push_back(b);
    if (b > x) right_pts.push_back(b);
  }
  for (const Rational& a : left_pts)
    for (const Rational& b : right_pts) {
      if (!(a < b)) continue;
      push({WindowCandidate::Type::corner, a, b, -2, -2, 0}, avg_d(to_double(a), to_double(b)));
    }

  const long pc = static_cast<long>(f_.piece_count());

  // One endpoint fixed, the other stationary inside a piece.
  for (const Rational& a : left_pts) {
    double ad = to_double(a);
    for (long j = std::max(px, 0L); j < pc; ++j) {
      auto P = f_.local_quadratic(j);
      double hs = to_double(P.half_slope);
      double v = to_double(P.v);
      double og = to_double(P.origin);
      double alpha = hs, beta = 2 * hs * (og - ad);
      double gamma = v * (og - ad) - to_double(P.F0) + prefix_at(ad);
      double disc = beta * beta - 4 * alpha * gamma;
      if (alpha == 0.0 || disc < 0) continue;
      for (int sg : {+1, -1}) {
        double u = (-beta + sg * std::sqrt(disc)) / (2 * alpha);
        double b = og + u;
        if (!(b > ad + 1e-12) || b < xd || b <= bp_d_[j] || b >= bp_d_[j + 1]) continue;
        push({WindowCandidate::Type::left_fixed, a, Rational(0), -2, j, sg}, avg_d(ad, b));
      }
    }
  }
  for (const Rational& b : right_pts) {
    double bd = to_double(b);
    for (long i = 0; i <= std::min(px, pc - 1); ++i) {
      auto M = f_.local_quadratic(i);
      double hs = to_double(M.half_slope);
      double v = to_double(M.v);
      double og = to_double(M.origin);
      double alpha = -hs, beta = 2 * hs * (bd - og);
      double gamma = v * (bd - og) + to_double(M.F0) - prefix_at(bd);
      double disc = beta * beta - 4 * alpha * gamma;
      if (alpha == 0.0 || disc < 0) continue;
      for (int sg : {+1, -1}) {
        double w = (-beta + sg * std::sqrt(disc)) / (2 * alpha);
        double a = og + w;
        if (!(a < bd - 1e-12) || a > xd || a <= bp_d_[i] || a >= bp_d_[i + 1]) continue;
        push({WindowCandidate::Type::right_fixed, Rational(0), b, i, -2, sg}, avg_d(a, bd));
      }
    }
  }

  // Both endpoints stationary: f(a) = f(b) = average.  Only sloped pieces can
  // host an isolated solution; flat-piece families are covered by corners.
  for (long i = 0; i <= std::min(px, pc - 1); ++i) {
    auto M = f_.local_quadratic(i);
    if (sign(M.half_slope) == 0) continue;
    for (long j = std::max(px, 0L); j < pc; ++j) {
      if (i == j) continue;
      auto P = f_.local_quadratic(j);
      if (sign(P.half_slope) == 0) continue;
      double hsi = to_double(M.half_slope), hsj = to_double(P.half_slope);
      double vi = to_double(M.v), vj = to_double(P.v);
      double oi = to_double(M.origin), oj = to_double(P.origin);
      double w0 = (vj - vi) / (2 * hsi), w1 = hsj / hsi;
      double e0 = oj - oi - w0, e1 = 1 - w1;
      double Fi = to_double(M.F0), Fj = to_double(P.F0);
      double c0 = vj * e0 - Fj + Fi + vi * w0 + hsi * w0 * w0;
      double c1 = vj * e1 + 2 * hsj * e0 - vj + vi * w1 + 2 * hsi * w0 * w1;
      double c2 = 2 * hsj * e1 - hsj + hsi * w1 * w1;
      double disc = c1 * c1 - 4 * c2 * c0;
      if (disc < 0) continue;
      for (int sg : {+1, -1}) {
        double u = c2 == 0.0 ? (c1 == 0.0 ? NAN : -c0 / c1) : (-c1 + sg * std::sqrt(disc)) / (2 * c2);
        if (!std::isfinite(u)) continue;
        double b = oj + u, a = oi + w0 + w1 * u;
        if (!(a < b - 1e-12) || a > xd || b < xd) continue;
        if (a <= bp_d_[i] || a >= bp_d_[i + 1] || b <= bp_d_[j] || b >= bp_d_[j + 1]) continue;
        push({WindowCandidate::Type::pair, Rational(0), Rational(0), i, j, sg}, avg_d(a, b));
      }
    }
  }

  push({WindowCandidate::Type::limit, x, x, -2, -2, 0}, eval_d(xd));

  std::vector<std::size_t> order(cands.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    double a = std::isfinite(scores[l]) ? scores[l] : -HUGE_VAL;
    double b = std::isfinite(scores[r]) ? scores[r] : -HUGE_VAL;
    return a > b;
  });

  // Exact re-evaluation in descending score order; once the exact incumbent
  // sits above the remaining scores (plus a safety margin) nothing below can
  // win, and a spurious high score merely costs one failed validation.
  UncenteredTouch best;
  bool have = false;
  auto consider = [&](const ExactReal& a, const ExactReal& b, const ExactReal& value,
                      bool degenerate) {
    bool take = !have;
    if (have) {
      int cv = ExactReal::compare(value, best.value);
      take = cv > 0 || (cv == 0 && (b - a) < (best.right - best.left));
    }
    if (take) {
      best = UncenteredTouch{a, b, value, degenerate};
      have = true;
    }
  };

  for (std::size_t k : order) {
    if (!std::isfinite(scores[k])) break;  // sorted: only non-finite remain
    if (have) {
      double incumbent = best.value.to_double();
      if (scores[k] < incumbent - 1e-9 * std::max(1.0, std::fabs(incumbent))) break;
    }
    const WindowCandidate& c = cands[k];
    switch (c.type) {
      case WindowCandidate::Type::limit:
        consider(ExactReal(x), ExactReal(x), ExactReal(f_(x)), true);
        break;
      case WindowCandidate::Type::corner: {
        ExactReal a(c.a), b(c.b);
        ExactReal value = ExactReal(f_.integral(c.a, c.b)) / ExactReal(Rational(c.b - c.a));
        consider(a, b, value, false);
        break;
      }
      case WindowCandidate::Type::left_fixed: {
        auto P = f_.local_quadratic(c.piece_b);
        Rational alpha = P.half_slope;
        Rational beta = 2 * P.half_slope * (P.origin - c.a);
        Rational gamma = P.v * (P.origin - c.a) - P.F0 + f_.antiderivative(c.a);
        QuadRoots roots = solve_quadratic(alpha, beta, gamma);
        if (!roots.valid) break;
        ExactReal u = c.root_sign > 0 ? roots.plus : roots.minus;
        ExactReal b = ExactReal(P.origin) + u;
        if (!(b > ExactReal(c.a)) || b < ExactReal(x)) break;
        if (!(u > ExactReal(Rational(0))) ||
            !(b < ExactReal(f_.breakpoints()[c.piece_b + 1])))
          break;
        ExactReal value = (f_.antiderivative(b) - ExactReal(f_.antiderivative(c.a))) /
                          (b - ExactReal(c.a));
        consider(ExactReal(c.a), b, value, false);
        break;
      }
      case WindowCandidate::Type::right_fixed: {
        auto M = f_.local_quadratic(c.piece_a);
        Rational alpha = -M.half_slope;
        Rational beta = 2 * M.half_slope * (c.b - M.origin);
        Rational gamma = M.v * (c.b - M.origin) + M.F0 - f_.antiderivative(c.b);
        QuadRoots roots = solve_quadratic(alpha, beta, gamma);
        if (!roots.valid) break;
        ExactReal w = c.root_sign > 0 ? roots.plus : roots.minus;
        ExactReal a = ExactReal(M.origin) + w;
        if (!(a < ExactReal(c.b)) || a > ExactReal(x)) break;
        if (!(w > ExactReal(Rational(0))) ||
            !(a < ExactReal(f_.breakpoints()[c.piece_a + 1])))
          break;
        ExactReal value = (ExactReal(f_.antiderivative(c.b)) - f_.antiderivative(a)) /
                          (ExactReal(c.b) - a);
        consider(a, ExactReal(c.b), value, false);
        break;
      }
      case WindowCandidate::Type::pair: {
        auto M = f_.local_quadratic(c.piece_a);
        auto P = f_.local_quadratic(c.piece_b);
        Rational w0 = (P.v - M.v) / (2 * M.half_slope);
        Rational w1 = P.half_slope / M.half_slope;
        Rational e0 = P.origin - M.origin - w0;
        Rational e1 = Rational(1) - w1;
        Rational c0 = P.v * e0 - P.F0 + M.F0 + M.v * w0 + M.half_slope * w0 * w0;
        Rational c1v = P.v * e1 + 2 * P.half_slope * e0 - P.v + M.v * w1 +
                       2 * M.half_slope * w0 * w1;
        Rational c2v = 2 * P.half_slope * e1 - P.half_slope + M.half_slope * w1 * w1;
        QuadRoots roots = solve_quadratic(c2v, c1v, c0);
        if (!roots.valid) break;
        ExactReal u = c.root_sign > 0 ? roots.plus : roots.minus;
        ExactReal b = ExactReal(P.origin) + u;
        ExactReal a = ExactReal(M.origin) + ExactReal(w0) + ExactReal(w1) * u;
        if (!(a < b) || a > ExactReal(x) || b < ExactReal(x)) break;
        if (!(a > ExactReal(f_.breakpoints()[c.piece_a])) ||
            !(a < ExactReal(f_.breakpoints()[c.piece_a + 1])))
          break;
        if (!(b > ExactReal(f_.breakpoints()[c.piece_b])) ||
            !(b < ExactReal(f_.breakpoints()[c.piece_b + 1])))
          break;
        ExactReal value = (f_.antiderivative(b) - f_.antiderivative(a)) / (b - a);
        consider(a, b, value, false);
        break;
      }
    }
  }

  if (!have) {  // only possible for the zero function or empty candidate set
    return UncenteredTouch{ExactReal(x), ExactReal(x), ExactReal(f_(x)), true};
  }
  return best;
}

UncenteredTouch maximal_uncentered_touch(const PiecewiseLinearFn& f, const Rational& x) {
  return UncenteredEngine(f).touch(x);
}
ExactReal maximal_uncentered(const PiecewiseLinearFn& f, const Rational& x) {
  return maximal_uncentered_touch(f, x).value;
}

}  // namespace maxlab
