#include "maxlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maxlab/errors.hpp"
#include "maxlab/util.hpp"

namespace maxlab {

namespace {
Rational rat_abs(const Rational& q) { return sign(q) < 0 ? Rational(-q) : q; }
}

// ---------------------------------------------------------------------------
// Tail cutoff

TailBoundResult find_tail_bound(const PiecewiseLinearFn& f, const Rational& epsilon,
                                int grid_points) {
  if (sign(epsilon) <= 0) throw ValidationError("epsilon must be positive");
  TailBoundResult out;
  out.grid_points = grid_points;
  Rational K = std::max(rat_abs(f.support_lo()), rat_abs(f.support_hi()));
  if (sign(K) == 0) K = 1;
  double target = to_double(epsilon) / 2;
  for (int i = 0; i < 64; ++i) {
    double tv = tail_variation(f, K, grid_points).total();
    if (tv < target) {
      out.K = K;
      out.tail_value = tv;
      out.doublings = i;
      return out;
    }
    K *= 2;
  }
  throw ValidationError("tail variation did not drop below epsilon/2");
}

// ---------------------------------------------------------------------------
// Near-point radius

NearPointResult find_near_point_delta(const PiecewiseLinearFn& f,
                                      const std::vector<Rational>& points,
                                      const Rational& epsilon, int samples_per_point,
                                      bool with_diagnostics) {
  if (points.empty()) throw ValidationError("need at least one point");
  if (sign(epsilon) <= 0) throw ValidationError("epsilon must be positive");

  NearPointResult out;
  out.samples_per_point = samples_per_point;
  Rational delta0(1);
  if (points.size() >= 2) {
    Rational min_gap = points[1] - points[0];
    for (std::size_t i = 1; i + 1 < points.size(); ++i)
      min_gap = std::min(min_gap, Rational(points[i + 1] - points[i]));
    delta0 = min_gap / 4;
  }
  out.delta_initial = delta0;

  double target = to_double(epsilon) / 2;
  Rational delta = delta0;
  for (int halvings = 0; halvings < 64; ++halvings) {
    std::vector<double> parts(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      parts[i] = near_point_variation(f, points[i], delta, samples_per_point);
    double sum = pairwise_sum(parts);
    if (sum < target) {
      out.delta = delta;
      out.halvings = halvings;
      out.ell = 1L << halvings;
      out.variation_sum = sum;
      break;
    }
    delta /= 2;
    if (halvings == 63) throw ValidationError("near-point variation did not shrink below epsilon/2");
  }

  if (with_diagnostics && out.ell >= 2) {
    NearPointDiagnostics& d = out.diagnostics;
    Rational fp_mass = f.derivative().l1_norm();
    Rational exit_bound =
        fp_mass * Rational(out.ell) / (2 * delta0 * Rational(out.ell - 1));
    const int probe = 33;
    for (const Rational& p : points) {
      Rational step = 2 * out.delta / (probe - 1);
      for (int k = 0; k < probe; ++k) {
        Rational x = p - out.delta + k * step;
        TouchSpec t = maximal_touch(f, x);
        ++d.samples;
        if (t.kind == RadiusKind::limit_zero) continue;
        ExactReal xe(x);
        bool exits = (xe - t.radius) < ExactReal(Rational(p - delta0)) ||
                     (xe + t.radius) > ExactReal(Rational(p + delta0));
        if (!exits) continue;
        ++d.window_exits;
        ExactReal deriv = luiro_derivative(f, t);
        if (!(deriv.abs() <= ExactReal(exit_bound))) ++d.exit_bound_violations;
      }
      LocalBoundReport lb = verify_local_bound(f, p - delta0, p + delta0, 129, 100.0);
      d.local_ratio_max = std::max(d.local_ratio_max, lb.ratio);
    }
  }
  return out;
}

LocalBoundReport verify_local_bound(const PiecewiseLinearFn& f, const Rational& lo,
                                    const Rational& hi, int grid_points, double c_config) {
  if (!(lo < hi)) throw ValidationError("window must be nondegenerate");
  if (grid_points < 3) throw ValidationError("need at least three grid points");
  LocalBoundReport out;
  out.c_config = c_config;
  Interval window{lo, hi};
  Rational step = (hi - lo) / (grid_points + 1);
  std::vector<double> values(static_cast<std::size_t>(grid_points));
  parallel_for(values.size(), [&](std::size_t k) {
    values[k] = maximal_local(f, window, lo + Rational(static_cast<long>(k) + 1) * step).to_double();
  });
  std::vector<double> terms;
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    terms.push_back(std::fabs(values[k + 1] - values[k]));
  out.variation = pairwise_sum(terms);
  out.fprime_mass = to_double(f.derivative().l1_norm_over(lo, hi));
  out.ratio = out.fprime_mass > 0 ? out.variation / out.fprime_mass
                                  : (out.variation == 0 ? 0 : HUGE_VAL);
  out.within = out.variation <= c_config * out.fprime_mass + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition identity

DecompositionReport verify_decomposition(const PiecewiseLinearFn& f, const Partition& p,
                                         const Rational& lo, const Rational& hi,
                                         const Rational& step) {
  DecompositionReport out;
  out.step = step;
  std::vector<Rational> grid = make_grid(lo, hi, step, &p);
  struct Row {
    int cls = 0;
    bool skipped = false;
    bool violation = false;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Rational& x = grid[i];
    if (p.contains(x)) {
      rows[i].skipped = true;
      return;
    }
    ExactReal m1 = maximal_gap(f, p, x);
    ExactReal m2 = maximal_cross(f, p, x);
    ExactReal m = maximal(f, x);
    const ExactReal& mx = ExactReal::compare(m1, m2) >= 0 ? m1 : m2;
    rows[i].violation = ExactReal::compare(mx, m) != 0;
    rows[i].cls = ExactReal::compare(m1, m2);
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (rows[i].skipped) {
      ++out.skipped;
      continue;
    }
    ++out.samples;
    if (rows[i].violation) {
      out.residual_zero = false;
      if (out.violations.size() < 32) out.violations.push_back(grid[i]);
    }
    if (rows[i].cls > 0)
      ++out.x_count;
    else if (rows[i].cls == 0)
      ++out.y_count;
    else
      ++out.z_count;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Short-range bound and the line-subtraction identity

LineIdentityReport verify_line_identity(const PiecewiseLinearFn& fj, const PiecewiseLinearFn& f,
                                        int samples_per_gap) {
  LineIdentityReport out;
  const Partition part = simple_approximation(f, Rational(1)).partition;
  const auto& pts = part.points();
  for (std::size_t g = 0; g + 1 < pts.size(); ++g) {
    const Rational& lo = pts[g];
    const Rational& hi = pts[g + 1];
    const Rational& alpha = part.slopes()[g + 1];
    Rational anchor = sign(alpha) >= 0 ? hi : lo;  // makes L <= 0 on the gap
    auto line_at = [&](const Rational& x) -> Rational { return alpha * (x - anchor); };

    std::vector<Rational> seg_bp{lo};
    std::vector<Rational> seg_val{fj(lo) - line_at(lo)};
    for (std::size_t i = 0; i < fj.breakpoints().size(); ++i) {
      const Rational& b = fj.breakpoints()[i];
      if (lo < b && b < hi) {
        seg_bp.push_back(b);
        seg_val.push_back(fj.values()[i] - line_at(b));
      }
    }
    seg_bp.push_back(hi);
    seg_val.push_back(fj(hi) - line_at(hi));
    PiecewiseLinearFn shifted = PiecewiseLinearFn::segment(std::move(seg_bp), std::move(seg_val));

    for (int s = 1; s <= samples_per_gap; ++s) {
      Rational x = lo + Rational(s) * (hi - lo) / Rational(samples_per_gap + 1);
      Rational d = std::min(Rational(x - lo), Rational(hi - x));
      if (sign(d) == 0) continue;
      ExactReal with_line = best_radius(shifted, x, RadiusConstraint::below(d)).value;
      ExactReal plain = best_radius(fj, x, RadiusConstraint::below(d)).value;
      ++out.samples;
      // residual = M1(fj - L) - (M1 fj - L)
      if (ExactReal::sign_of_difference(with_line, plain, Rational(-line_at(x))) != 0)
        ++out.failures;
    }
  }
  return out;
}

M1BoundReport verify_m1_bound(const PiecewiseLinearFn& fj, const PiecewiseLinearFn& f,
                              const Rational& epsilon, double c_config, const Rational& grid_step,
                              int identity_samples_per_gap) {
  M1BoundReport out;
  SimpleApproximation approx = simple_approximation(f, std::max(epsilon, Rational(1)));
  const Partition& part = approx.partition;

  out.deriv_gap = fj.derivative().minus(f.derivative()).l1_norm();
  out.precondition_ok = out.deriv_gap < epsilon;

  LineIdentityReport identity = verify_line_identity(fj, f, identity_samples_per_gap);
  out.identity_samples = identity.samples;
  out.identity_failures = identity.failures;

  // (b) grid L1 distance of the short-range derivative from fj'.
  Rational span_lo = std::min(fj.support_lo(), part.points().front()) - 2;
  Rational span_hi = std::max(fj.support_hi(), part.points().back()) + 2;
  std::vector<Rational> grid = make_grid(span_lo, span_hi, grid_step, &part);
  GridProfile prof = profile(fj, grid, OperatorSpec::short_range(part));
  StepFn fjp = fj.derivative();

  std::vector<double> terms;
  for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
    const auto& a = prof.points[i];
    const auto& b = prof.points[i + 1];
    double len = to_double(b.x - a.x);
    if (a.gap || b.gap || a.source == DerivSource::gap || b.source == DerivSource::gap) {
      out.skipped_measure += len;
      continue;
    }
    double da = std::fabs(a.derivative.to_double() - to_double(fjp(a.x)));
    double db = std::fabs(b.derivative.to_double() - to_double(fjp(b.x)));
    terms.push_back((da + db) / 2 * len);
  }
  out.lhs = pairwise_sum(terms);
  out.bound = 2 * (c_config + 1) * to_double(epsilon);
  out.ratio = out.bound > 0 ? out.lhs / out.bound : (out.lhs == 0 ? 0 : HUGE_VAL);
  return out;
}

// ---------------------------------------------------------------------------
// Long-range regularity

M2RegularityReport verify_m2_regularity(const PiecewiseLinearFn& f, const Partition& p,
                                        const Rational& delta, const Rational& K,
                                        const Rational& grid_step) {
  ExclusionRegion region = ExclusionRegion::create(p, delta, K);
  M2RegularityReport out;
  Rational l1 = f.norm_l1();
  Rational sup = f.norm_sup();
  Rational deriv_bound = l1 / (2 * delta * delta) + sup / delta;
  Rational lip_bound = l1 / (2 * delta * delta);
  out.derivative_bound = to_double(deriv_bound);
  out.lipschitz_bound = to_double(lip_bound);

  for (const auto& [lo, hi] : region.components()) {
    if (!(lo < hi)) continue;
    std::vector<Rational> grid = make_grid(lo, hi, grid_step, &p);
    std::vector<ExactReal> values(grid.size());
    std::vector<int> status(grid.size(), 0);  // 1 radius bad, 2 formula gap, 4 deriv bad
    std::vector<double> derivs(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t i) {
      TouchSpec t = maximal_cross_touch(f, p, grid[i]);
      values[i] = t.value;
      if (!(t.radius >= ExactReal(delta))) status[i] |= 1;
      ExactReal d;
      try {
        d = m2_derivative(f, p, t);
      } catch (const std::exception&) {
        status[i] |= 2;
        return;
      }
      derivs[i] = d.to_double();
      if (!(d.abs() <= ExactReal(deriv_bound))) status[i] |= 4;
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ++out.samples;
      if (status[i] & 1) ++out.radius_violations;
      if (status[i] & 2) {
        ++out.formula_gaps;
        continue;
      }
      if (status[i] & 4) ++out.derivative_violations;
      out.max_abs_derivative = std::max(out.max_abs_derivative, std::fabs(derivs[i]));
    }
    // Pairwise Lipschitz inside the component; double pre-screen with an exact
    // recheck of near misses.
    double lipd = to_double(lip_bound);
    std::vector<double> vd(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vd[i] = values[i].to_double();
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        ++out.lipschitz_pairs;
        double dx = to_double(grid[j] - grid[i]);
        double slack = 1e-9 * std::max(1.0, lipd * dx);
        if (std::fabs(vd[j] - vd[i]) <= lipd * dx - slack) continue;
        Rational allowance = lip_bound * (grid[j] - grid[i]);
        if (!ExactReal::abs_diff_le(values[j], values[i], allowance)) ++out.lipschitz_violations;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuity experiment

ContinuityReport run_continuity(const PiecewiseLinearFn& f, const ContinuityConfig& cfg) {
  if (f.is_zero()) throw ValidationError("continuity experiment needs a nonzero function");
  if (!f.nonnegative()) throw ValidationError("continuity experiment needs f >= 0");
  if (cfg.j_list.empty()) throw ValidationError("empty j list");
  for (std::size_t i = 0; i < cfg.j_list.size(); ++i) {
    if (cfg.j_list[i] < 1) throw ValidationError("every j must be >= 1");
    if (i > 0 && cfg.j_list[i] <= cfg.j_list[i - 1])
      throw ValidationError("j list must be strictly increasing");
  }

  ContinuityReport rep;
  rep.epsilon = cfg.epsilon;
  rep.grid_step = cfg.grid_step;

  SimpleApproximation approx = simple_approximation(f, cfg.epsilon);
  TailBoundResult tail = find_tail_bound(f, cfg.epsilon, cfg.tail_grid_points);
  NearPointResult near = find_near_point_delta(f, approx.partition.points(), cfg.epsilon,
                                               cfg.near_point_samples, false);
  Rational K = tail.K;
  while (!(K > approx.partition.max_abs_point() + near.delta)) K *= 2;
  rep.delta = near.delta;
  rep.K = K;
  ExclusionRegion region = ExclusionRegion::create(approx.partition, near.delta, K);

  rep.grid_lo = -K - 1;
  rep.grid_hi = K + 1;
  std::vector<Rational> grid = make_grid(rep.grid_lo, rep.grid_hi, cfg.grid_step,
                                         &approx.partition);
  rep.grid_size = grid.size();

  GridProfile prof_f = profile(f, grid, OperatorSpec::centered());
  GridProfile m1_f, m2_f;
  if (cfg.with_split_operators) {
    m1_f = profile(f, grid, OperatorSpec::short_range(approx.partition));
    m2_f = profile(f, grid, OperatorSpec::long_range(approx.partition));
  }
  StepFn fprime = f.derivative();
  Rational f_sobolev = f.norm_sobolev();

  const GridProfile* prof_largest = nullptr;
  GridProfile prof_largest_storage;

  for (int j : cfg.j_list) {
    Perturbed pert = perturbation_sequence(f, cfg.kind, j, cfg.seed);
    const PiecewiseLinearFn& fj = pert.fn;
    ContinuityRow row;
    row.j = j;
    row.sobolev_gap = fj.minus(f).norm_sobolev();
    Rational dgap = fj.derivative().minus(fprime).l1_norm();
    row.sup_bound = dgap / 2;

    GridProfile prof_j = profile(fj, grid, OperatorSpec::centered());
    double sup_gap = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double d = std::fabs(prof_j.points[i].value.to_double() - prof_f.points[i].value.to_double());
      sup_gap = std::max(sup_gap, d);
      if (row.sup_bound_ok &&
          !ExactReal::abs_diff_le(prof_j.points[i].value, prof_f.points[i].value, row.sup_bound))
        row.sup_bound_ok = false;
    }
    row.sup_gap = sup_gap;

    L1DistanceReport full = l1_derivative_distance(prof_j, prof_f);
    L1DistanceReport restricted = l1_derivative_distance(prof_j, prof_f, &region);
    row.derivative_gap = full.distance;
    row.derivative_gap_region = restricted.distance;
    row.skipped_measure = full.skipped_measure;

    if (cfg.with_split_operators) {
      GridProfile m1_j = profile(fj, grid, OperatorSpec::short_range(approx.partition));
      GridProfile m2_j = profile(fj, grid, OperatorSpec::long_range(approx.partition));
      row.m1_gap_region = l1_derivative_distance(m1_j, m1_f, &region).distance;
      row.m2_gap_region = l1_derivative_distance(m2_j, m2_f, &region).distance;
    }

    if (rep.j0 < 0 && dgap < cfg.epsilon && fj.norm_sobolev() <= 2 * f_sobolev) rep.j0 = j;

    if (j == cfg.j_list.back()) {
      prof_largest_storage = std::move(prof_j);
      prof_largest = &prof_largest_storage;
    }
    rep.rows.push_back(std::move(row));
  }

  // Radius stability at the largest j against the limit function: the
  // maximizing radii of f_j must land in the near-maximizer set of f, i.e.
  // the average of f over the j-window must reach Mf(x) up to the tolerance.
  // (A radius-to-radius comparison would be first-order in the perturbation
  // and fails even for the canonical bump at j = 64; the value comparison is
  // second-order and is what the accumulation statement asserts.)
  if (prof_largest) {
    const double step_d = to_double(cfg.grid_step);
    auto jumpy = [&](const GridProfile& prof, std::size_t i) {
      if (i == 0 || i + 1 >= prof.size()) return true;
      if (prof.points[i - 1].gap || prof.points[i + 1].gap) return true;
      double dr = std::fabs(prof.points[i + 1].radius.to_double() -
                            prof.points[i - 1].radius.to_double());
      return dr > 10 * step_d;
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& a = prof_largest->points[i];
      const auto& b = prof_f.points[i];
      if (a.gap || b.gap) continue;
      ++rep.stability.checked;
      if (a.kind == RadiusKind::limit_zero || b.kind == RadiusKind::limit_zero ||
          jumpy(*prof_largest, i) || jumpy(prof_f, i)) {
        ++rep.stability.tagged;
        continue;
      }
      double revisit = window_average(f, grid[i], a.radius).to_double();
      if (std::fabs(revisit - b.value.to_double()) <= cfg.stability_tol)
        ++rep.stability.stable;
      else
        ++rep.stability.violations;
    }
  }

  double first = rep.rows.front().derivative_gap;
  double last = rep.rows.back().derivative_gap;
  rep.decrease_ratio = first > 0 ? last / first : 0;
  rep.decrease_ok = (first == 0 && last == 0) || last * 10 < first;
  return rep;
}

std::string continuity_svg(const ContinuityReport& report) {
  const int W = 640, H = 400, ml = 60, mr = 20, mt = 20, mb = 40;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  double lo = 0, hi = 0;
  bool first = true;
  for (const auto& r : report.rows) {
    if (r.derivative_gap <= 0) continue;
    double lg = std::log10(r.derivative_gap);
    if (first) {
      lo = hi = lg;
      first = false;
    } else {
      lo = std::min(lo, lg);
      hi = std::max(hi, lg);
    }
  }
  if (first) {
    lo = -1;
    hi = 1;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }

  double jmin = report.rows.front().j, jmax = report.rows.back().j;
  auto xpix = [&](double j) {
    double t = (std::log2(j) - std::log2(jmin)) / std::max(1e-9, std::log2(jmax) - std::log2(jmin));
    return ml + t * (W - ml - mr);
  };
  auto ypix = [&](double lg) {
    double t = (lg - lo) / (hi - lo);
    return H - mb - t * (H - mt - mb);
  };

  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";

  os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
  for (const auto& r : report.rows) {
    double lg = r.derivative_gap > 0 ? std::log10(r.derivative_gap) : lo;
    os << xpix(r.j) << "," << ypix(lg) << " ";
  }
  os << "\"/>\n";
  for (const auto& r : report.rows) {
    double lg = r.derivative_gap > 0 ? std::log10(r.derivative_gap) : lo;
    os << "<circle cx=\"" << xpix(r.j) << "\" cy=\"" << ypix(lg)
       << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    os << "<text x=\"" << xpix(r.j) << "\" y=\"" << H - mb + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << r.j << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 8
     << "\" font-size=\"12\" text-anchor=\"middle\">j</text>\n";
  os << "<text x=\"14\" y=\"" << (mt + H - mb) / 2
     << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << (mt + H - mb) / 2 << ")\">log10 derivative gap</text>\n";
  for (int k = 0; k <= 4; ++k) {
    double lg = lo + k * (hi - lo) / 4;
    os << "<text x=\"" << ml - 6 << "\" y=\"" << ypix(lg) + 4
       << "\" font-size=\"10\" text-anchor=\"end\">" << format_double(lg) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace maxlab
