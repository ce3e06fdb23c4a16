#include "maxlab/profile.hpp"

#include <ostream>

#include "maxlab/deriv.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/util.hpp"

namespace maxlab {

const char* to_string(DerivSource s) {
  switch (s) {
    case DerivSource::luiro: return "luiro";
    case DerivSource::m2_formula: return "m2_formula";
    case DerivSource::f_prime: return "f_prime";
    case DerivSource::gap: return "gap";
  }
  return "?";
}

OperatorSpec OperatorSpec::uncentered() {
  OperatorSpec s;
  s.kind = Kind::uncentered;
  return s;
}
OperatorSpec OperatorSpec::local(Interval w) {
  OperatorSpec s;
  s.kind = Kind::local;
  s.window = std::move(w);
  return s;
}
OperatorSpec OperatorSpec::short_range(Partition p) {
  OperatorSpec s;
  s.kind = Kind::short_range;
  s.partition = std::move(p);
  return s;
}
OperatorSpec OperatorSpec::long_range(Partition p) {
  OperatorSpec s;
  s.kind = Kind::long_range;
  s.partition = std::move(p);
  return s;
}

std::string OperatorSpec::name() const {
  switch (kind) {
    case Kind::centered: return "M";
    case Kind::uncentered: return "Muncentered";
    case Kind::local: return "MI";
    case Kind::short_range: return "M1";
    case Kind::long_range: return "M2";
  }
  return "?";
}

bool GridProfile::same_grid(const GridProfile& other) const {
  if (points.size() != other.points.size()) return false;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].x != other.points[i].x) return false;
  return true;
}

void GridProfile::to_csv(std::ostream& os, bool exact_columns) const {
  os << "x,value,radius,radius_kind,derivative,derivative_source";
  if (exact_columns) os << ",value_exact,radius_exact";
  os << "\n";
  for (const ProfilePoint& p : points) {
    os << format_double(to_double(p.x)) << ",";
    if (p.gap) {
      os << ",,," << "," << to_string(DerivSource::gap);
      if (exact_columns) os << ",,";
      os << "\n";
      continue;
    }
    os << format_double(p.value.to_double()) << "," << format_double(p.radius.to_double()) << ","
       << to_string(p.kind) << "," << format_double(p.derivative.to_double()) << ","
       << to_string(p.source);
    if (exact_columns) os << "," << p.value.to_exact_string() << "," << p.radius.to_exact_string();
    os << "\n";
  }
}

namespace {

// Whether the touch radius sits exactly on the constraint's lower edge, where
// only the pinned-window derivative applies (the fixed-radius competitor is
// feasible on one side only).
bool locked_at_distance(const OperatorSpec& op, const TouchSpec& touch) {
  if (op.kind == OperatorSpec::Kind::long_range) {
    Rational d = op.partition->distance(touch.x);
    return sign(d) > 0 && touch.radius == ExactReal(d);
  }
  if (op.kind == OperatorSpec::Kind::local) {
    const Interval& w = op.window;
    std::optional<Rational> d;
    if (w.lo) d = touch.x - *w.lo;
    if (w.hi) {
      Rational dr = *w.hi - touch.x;
      if (!d || dr < *d) d = dr;
    }
    return d && touch.radius == ExactReal(*d);
  }
  return false;
}

// Derivative of the sampled operator at one touch, with its source tag.
std::pair<ExactReal, DerivSource> derivative_at(const PiecewiseLinearFn& f, const StepFn& fprime,
                                                const OperatorSpec& op, const TouchSpec& touch) {
  if (touch.kind == RadiusKind::limit_zero)
    return {ExactReal(fprime(touch.x)), DerivSource::f_prime};
  if (touch.kind == RadiusKind::constraint_boundary || locked_at_distance(op, touch)) {
    // Window edge rides on the nearest partition point / window endpoint, so
    // the locked-window expression applies.
    bool pinned_right;
    if (op.kind == OperatorSpec::Kind::local) {
      const Interval& w = op.window;
      if (w.lo && w.hi) {
        Rational dl = touch.x - *w.lo, dr = *w.hi - touch.x;
        if (dl == dr)
          return {ExactReal(0), DerivSource::gap};  // ambiguous pin, tagged out
        pinned_right = dr < dl;
      } else {
        pinned_right = static_cast<bool>(w.hi);
      }
    } else {
      auto rh = op.partition->in_right_half(touch.x);
      if (!rh) return {ExactReal(0), DerivSource::gap};
      pinned_right = *rh;
    }
    return {pinned_window_derivative(f, touch.x, touch.radius, pinned_right),
            DerivSource::m2_formula};
  }
  return {luiro_derivative(f, touch, &fprime), DerivSource::luiro};
}

}  // namespace

GridProfile profile(const PiecewiseLinearFn& f, const std::vector<Rational>& grid,
                    const OperatorSpec& op) {
  if (grid.empty()) throw ValidationError("profile grid must be nonempty");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw ValidationError("profile grid must be strictly increasing");

  GridProfile out;
  out.op = op;
  out.points.resize(grid.size());
  const StepFn fprime = f.derivative();
  std::optional<UncenteredEngine> engine;
  if (op.kind == OperatorSpec::Kind::uncentered) engine.emplace(f);

  parallel_for(grid.size(), [&](std::size_t i) {
    ProfilePoint& pt = out.points[i];
    pt.x = grid[i];
    try {
      if (op.kind == OperatorSpec::Kind::uncentered) {
        UncenteredTouch t = engine->touch(grid[i]);
        pt.value = t.value;
        if (t.degenerate) {
          pt.radius = ExactReal(0);
          pt.kind = RadiusKind::limit_zero;
          pt.attained_at_limit = true;
          pt.derivative = ExactReal(fprime(grid[i]));
          pt.source = DerivSource::f_prime;
        } else {
          pt.radius = (t.right - t.left) / ExactReal(2);
          pt.kind = RadiusKind::interior;
          pt.derivative = (f(t.right) - f(t.left)) / (t.right - t.left);
          pt.source = DerivSource::luiro;
        }
        return;
      }
      TouchSpec touch;
      switch (op.kind) {
        case OperatorSpec::Kind::centered:
          touch = maximal_touch(f, grid[i]);
          break;
        case OperatorSpec::Kind::local:
          touch = maximal_local_touch(f, op.window, grid[i]);
          break;
        case OperatorSpec::Kind::short_range:
          touch = maximal_gap_touch(f, *op.partition, grid[i]);
          break;
        case OperatorSpec::Kind::long_range:
          touch = maximal_cross_touch(f, *op.partition, grid[i]);
          break;
        default:
          break;
      }
      pt.value = touch.value;
      pt.radius = touch.radius;
      pt.kind = touch.kind;
      pt.attained_at_limit = touch.attained_at_limit;
      auto [deriv, source] = derivative_at(f, fprime, op, touch);
      pt.derivative = deriv;
      pt.source = source;
      if (source == DerivSource::gap) pt.derivative = ExactReal(0);
    } catch (const std::exception&) {
      pt.gap = true;
      pt.source = DerivSource::gap;
    }
  });
  return out;
}

std::vector<Rational> make_grid(const Rational& start, const Rational& end, const Rational& step,
                                const Partition* avoid) {
  if (sign(step) <= 0) throw ValidationError("grid step must be positive");
  if (!(start <= end)) throw ValidationError("grid start must not exceed end");
  Rational offset(0);
  if (avoid) offset = step / 2;
  std::vector<Rational> grid;
  long count = grid_count(end - start - offset, step);
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (long k = 0; k <= count; ++k) {
    Rational x = start + offset + Rational(k) * step;
    if (avoid) {
      // Exact collisions with partition points or gap midpoints would land on
      // the measure-zero set the derivative formula excludes; nudge them off.
      for (int tries = 0; tries < 8; ++tries) {
        bool collide = avoid->contains(x);
        if (!collide && !avoid->in_right_half(x).has_value()) collide = true;
        if (!collide) break;
        x += step / 64;
      }
    }
    grid.push_back(x);
  }
  return grid;
}

}  // namespace maxlab
