#include "maxlab/fnspace.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "json.hpp"
#include "maxlab/errors.hpp"

namespace maxlab {

namespace {

void check_strictly_increasing(const std::vector<Rational>& bp) {
  if (bp.size() < 2) throw ValidationError("need at least two breakpoints");
  for (std::size_t i = 0; i + 1 < bp.size(); ++i)
    if (!(bp[i] < bp[i + 1]))
      throw ValidationError("breakpoints must be strictly increasing (offender at index " +
                            std::to_string(i + 1) + ")");
}

Rational rat_abs(const Rational& q) { return sign(q) < 0 ? Rational(-q) : q; }

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseLinearFn

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<Rational> bp, std::vector<Rational> val)
    : bp_(std::move(bp)), val_(std::move(val)) {
  slope_.reserve(bp_.size() - 1);
  prefix_.reserve(bp_.size());
  prefix_.push_back(Rational(0));
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    Rational len = bp_[i + 1] - bp_[i];
    slope_.push_back((val_[i + 1] - val_[i]) / len);
    prefix_.push_back(prefix_.back() + (val_[i] + val_[i + 1]) / 2 * len);
  }
}

PiecewiseLinearFn PiecewiseLinearFn::create(std::vector<Rational> breakpoints,
                                            std::vector<Rational> values) {
  if (breakpoints.size() != values.size())
    throw ValidationError("breakpoints and values must have the same length");
  check_strictly_increasing(breakpoints);
  if (sign(values.front()) != 0 || sign(values.back()) != 0)
    throw ValidationError("end values must be zero (compact support)");
  return PiecewiseLinearFn(std::move(breakpoints), std::move(values));
}

PiecewiseLinearFn PiecewiseLinearFn::segment(std::vector<Rational> breakpoints,
                                             std::vector<Rational> values) {
  if (breakpoints.size() != values.size())
    throw ValidationError("breakpoints and values must have the same length");
  check_strictly_increasing(breakpoints);
  return PiecewiseLinearFn(std::move(breakpoints), std::move(values));
}

namespace {
inline int num_cmp(const Rational& x, const Rational& b) { return cmp(x, b); }
inline int num_cmp(const ExactReal& x, const Rational& b) {
  return ExactReal::compare(x, ExactReal(b));
}
}  // namespace

template <typename Num>
long PiecewiseLinearFn::locate(const Num& x) const {
  if (num_cmp(x, bp_.front()) < 0) return -1;
  if (num_cmp(x, bp_.back()) >= 0) return static_cast<long>(bp_.size()) - 1;
  // Largest i with bp[i] <= x.
  std::size_t lo = 0, hi = bp_.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (num_cmp(x, bp_[mid]) >= 0)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<long>(lo);
}

template <typename Num>
Num PiecewiseLinearFn::eval_impl(const Num& x) const {
  long i = locate(x);
  if (i < 0 || i >= static_cast<long>(bp_.size()) - 1) {
    if (i >= 0 && num_cmp(x, bp_.back()) == 0) return Num(val_.back());
    return Num(Rational(0));
  }
  Num dx = x - Num(bp_[i]);
  return Num(val_[i]) + dx * Num(slope_[i]);
}

template <typename Num>
Num PiecewiseLinearFn::antiderivative_impl(const Num& x) const {
  long i = locate(x);
  if (i < 0) return Num(Rational(0));
  if (i >= static_cast<long>(bp_.size()) - 1) return Num(prefix_.back());
  Num dx = x - Num(bp_[i]);
  return Num(prefix_[i]) + dx * (Num(val_[i]) + dx * Num(slope_[i] / 2));
}

Rational PiecewiseLinearFn::operator()(const Rational& x) const { return eval_impl(x); }
ExactReal PiecewiseLinearFn::operator()(const ExactReal& x) const { return eval_impl(x); }
Rational PiecewiseLinearFn::antiderivative(const Rational& x) const {
  return antiderivative_impl(x);
}
ExactReal PiecewiseLinearFn::antiderivative(const ExactReal& x) const {
  return antiderivative_impl(x);
}
Rational PiecewiseLinearFn::integral(const Rational& a, const Rational& b) const {
  return antiderivative(b) - antiderivative(a);
}
ExactReal PiecewiseLinearFn::integral(const ExactReal& a, const ExactReal& b) const {
  return antiderivative(b) - antiderivative(a);
}

StepFn PiecewiseLinearFn::derivative() const {
  return StepFn::create(bp_, slope_);
}

long PiecewiseLinearFn::piece_at(const Rational& x) const { return locate(x); }

PiecewiseLinearFn::LocalQuadratic PiecewiseLinearFn::local_quadratic(long piece) const {
  if (piece < 0) return LocalQuadratic{bp_.front(), Rational(0), Rational(0), Rational(0)};
  if (piece >= static_cast<long>(bp_.size()) - 1)
    return LocalQuadratic{bp_.back(), prefix_.back(), Rational(0), Rational(0)};
  return LocalQuadratic{bp_[piece], prefix_[piece], val_[piece], slope_[piece] / 2};
}

Rational PiecewiseLinearFn::norm_l1() const {
  Rational total(0);
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    const Rational& a = val_[i];
    const Rational& b = val_[i + 1];
    Rational len = bp_[i + 1] - bp_[i];
    if (sign(a) >= 0 && sign(b) >= 0) {
      total += (a + b) / 2 * len;
    } else if (sign(a) <= 0 && sign(b) <= 0) {
      total -= (a + b) / 2 * len;
    } else {
      // One sign change inside the piece: split at the zero crossing.
      Rational t = len * rat_abs(a) / (rat_abs(a) + rat_abs(b));
      total += rat_abs(a) * t / 2 + rat_abs(b) * (len - t) / 2;
    }
  }
  return total;
}

Rational PiecewiseLinearFn::norm_sup() const {
  Rational best(0);
  for (const Rational& v : val_) best = std::max(best, rat_abs(v));
  return best;
}

Rational PiecewiseLinearFn::norm_sobolev() const { return norm_l1() + derivative().l1_norm(); }

bool PiecewiseLinearFn::is_zero() const {
  for (const Rational& v : val_)
    if (sign(v) != 0) return false;
  return true;
}

bool PiecewiseLinearFn::nonnegative() const {
  for (const Rational& v : val_)
    if (sign(v) < 0) return false;
  return true;
}

Rational PiecewiseLinearFn::min_value() const {
  Rational m(0);
  for (const Rational& v : val_) m = std::min(m, v);
  return m;
}

namespace {
PiecewiseLinearFn combine(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g, int sign_g) {
  std::set<Rational> merged(f.breakpoints().begin(), f.breakpoints().end());
  merged.insert(g.breakpoints().begin(), g.breakpoints().end());
  std::vector<Rational> bp(merged.begin(), merged.end());
  std::vector<Rational> val;
  val.reserve(bp.size());
  for (const Rational& x : bp)
    val.push_back(sign_g > 0 ? Rational(f(x) + g(x)) : Rational(f(x) - g(x)));
  return PiecewiseLinearFn::create(std::move(bp), std::move(val));
}
}  // namespace

PiecewiseLinearFn PiecewiseLinearFn::plus(const PiecewiseLinearFn& g) const {
  return combine(*this, g, +1);
}
PiecewiseLinearFn PiecewiseLinearFn::minus(const PiecewiseLinearFn& g) const {
  return combine(*this, g, -1);
}

PiecewiseLinearFn PiecewiseLinearFn::scaled(const Rational& c) const {
  std::vector<Rational> val;
  val.reserve(val_.size());
  for (const Rational& v : val_) val.push_back(v * c);
  return PiecewiseLinearFn(bp_, std::move(val));
}

PiecewiseLinearFn PiecewiseLinearFn::translated(const Rational& h) const {
  std::vector<Rational> bp;
  bp.reserve(bp_.size());
  for (const Rational& b : bp_) bp.push_back(b + h);
  return PiecewiseLinearFn(std::move(bp), val_);
}

PiecewiseLinearFn PiecewiseLinearFn::dilated_argument(const Rational& q) const {
  if (sign(q) <= 0) throw ValidationError("dilation factor must be positive");
  std::vector<Rational> bp;
  bp.reserve(bp_.size());
  for (const Rational& b : bp_) bp.push_back(b / q);
  return PiecewiseLinearFn(std::move(bp), val_);
}

PiecewiseLinearFn PiecewiseLinearFn::clamped_nonnegative() const {
  std::vector<Rational> bp, val;
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i) {
    bp.push_back(bp_[i]);
    val.push_back(std::max(val_[i], Rational(0)));
    const Rational& a = val_[i];
    const Rational& b = val_[i + 1];
    if ((sign(a) < 0) != (sign(b) < 0) && sign(a) != 0 && sign(b) != 0) {
      Rational len = bp_[i + 1] - bp_[i];
      Rational t = len * rat_abs(a) / (rat_abs(a) + rat_abs(b));
      bp.push_back(bp_[i] + t);
      val.push_back(Rational(0));
    }
  }
  bp.push_back(bp_.back());
  val.push_back(std::max(val_.back(), Rational(0)));
  return PiecewiseLinearFn(std::move(bp), std::move(val));
}

// ---------------------------------------------------------------------------
// StepFn

StepFn::StepFn(std::vector<Rational> bp, std::vector<Rational> plateau)
    : bp_(std::move(bp)), plateau_(std::move(plateau)) {}

StepFn StepFn::create(std::vector<Rational> breakpoints, std::vector<Rational> plateaus) {
  check_strictly_increasing(breakpoints);
  if (plateaus.size() + 1 != breakpoints.size())
    throw ValidationError("need one plateau per bounded interval");
  return StepFn(std::move(breakpoints), std::move(plateaus));
}

Rational StepFn::operator()(const Rational& x) const {
  if (x < bp_.front() || x >= bp_.back()) return Rational(0);
  std::size_t lo = 0, hi = bp_.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (x >= bp_[mid])
      lo = mid;
    else
      hi = mid;
  }
  return plateau_[lo];
}

Rational StepFn::l1_norm() const {
  Rational total(0);
  for (std::size_t i = 0; i < plateau_.size(); ++i)
    total += rat_abs(plateau_[i]) * (bp_[i + 1] - bp_[i]);
  return total;
}

Rational StepFn::l1_norm_over(const Rational& lo, const Rational& hi) const {
  Rational total(0);
  for (std::size_t i = 0; i < plateau_.size(); ++i) {
    Rational a = std::max(lo, bp_[i]);
    Rational b = std::min(hi, bp_[i + 1]);
    if (a < b) total += rat_abs(plateau_[i]) * (b - a);
  }
  return total;
}

Rational StepFn::sup_norm() const {
  Rational best(0);
  for (const Rational& v : plateau_) best = std::max(best, rat_abs(v));
  return best;
}

StepFn StepFn::minus(const StepFn& g) const {
  std::set<Rational> merged(bp_.begin(), bp_.end());
  merged.insert(g.bp_.begin(), g.bp_.end());
  std::vector<Rational> bp(merged.begin(), merged.end());
  std::vector<Rational> plateau;
  plateau.reserve(bp.size() - 1);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i)
    plateau.push_back((*this)(bp[i]) - g(bp[i]));
  return StepFn(std::move(bp), std::move(plateau));
}

StepFn StepFn::canonical(bool trim_zero_edges) const {
  std::vector<Rational> bp{bp_.front()};
  std::vector<Rational> plateau;
  for (std::size_t i = 0; i < plateau_.size(); ++i) {
    if (!plateau.empty() && plateau.back() == plateau_[i]) continue;  // merge
    if (i > 0 && (plateau.empty() || plateau.back() != plateau_[i])) bp.push_back(bp_[i]);
    plateau.push_back(plateau_[i]);
  }
  bp.push_back(bp_.back());
  if (trim_zero_edges) {
    while (plateau.size() > 1 && sign(plateau.front()) == 0) {
      plateau.erase(plateau.begin());
      bp.erase(bp.begin());
    }
    while (plateau.size() > 1 && sign(plateau.back()) == 0) {
      plateau.pop_back();
      bp.pop_back();
    }
  }
  return StepFn(std::move(bp), std::move(plateau));
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<Rational> pts, std::vector<Rational> slopes)
    : pts_(std::move(pts)), slopes_(std::move(slopes)) {}

Partition Partition::create(std::vector<Rational> points, std::vector<Rational> slopes) {
  if (points.empty()) throw ValidationError("partition must be non-empty");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (!(points[i] < points[i + 1]))
      throw ValidationError("partition points must be strictly increasing");
  if (slopes.empty()) slopes.assign(points.size() + 1, Rational(0));
  if (slopes.size() != points.size() + 1)
    throw ValidationError("need one slope per gap (points + 1)");
  if (sign(slopes.front()) != 0 || sign(slopes.back()) != 0)
    throw ValidationError("slopes on the unbounded gaps must be zero");
  return Partition(std::move(points), std::move(slopes));
}

Partition Partition::from_step(const StepFn& g) {
  std::vector<Rational> slopes;
  slopes.reserve(g.plateaus().size() + 2);
  slopes.push_back(Rational(0));
  for (const Rational& p : g.plateaus()) slopes.push_back(p);
  slopes.push_back(Rational(0));
  return create(g.breakpoints(), std::move(slopes));
}

bool Partition::contains(const Rational& x) const {
  return std::binary_search(pts_.begin(), pts_.end(), x);
}

Rational Partition::distance(const Rational& x) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), x);
  Rational best(-1);
  if (it != pts_.end()) best = *it - x;
  if (it != pts_.begin()) {
    Rational left = x - *(it - 1);
    if (sign(best) < 0 || left < best) best = left;
  }
  return best;
}

std::size_t Partition::gap_index(const Rational& x) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), x);
  if (it != pts_.end() && *it == x) throw ValidationError("point lies on the partition");
  return static_cast<std::size_t>(it - pts_.begin());
}

std::optional<Rational> Partition::gap_lo(std::size_t gap) const {
  if (gap == 0) return std::nullopt;
  return pts_[gap - 1];
}

std::optional<Rational> Partition::gap_hi(std::size_t gap) const {
  if (gap == pts_.size()) return std::nullopt;
  return pts_[gap];
}

std::optional<bool> Partition::in_right_half(const Rational& x) const {
  std::size_t gap = gap_index(x);
  auto lo = gap_lo(gap), hi = gap_hi(gap);
  if (!lo) return true;    // left unbounded gap: the only finite point is on the right
  if (!hi) return false;   // right unbounded gap
  Rational dl = x - *lo, dr = *hi - x;
  if (dl == dr) return std::nullopt;  // exact midpoint
  return dl > dr;
}

std::optional<Rational> Partition::min_gap() const {
  if (pts_.size() < 2) return std::nullopt;
  Rational best = pts_[1] - pts_[0];
  for (std::size_t i = 1; i + 1 < pts_.size(); ++i)
    best = std::min(best, Rational(pts_[i + 1] - pts_[i]));
  return best;
}

Rational Partition::max_abs_point() const {
  Rational m(0);
  for (const Rational& p : pts_) m = std::max(m, rat_abs(p));
  return m;
}

// ---------------------------------------------------------------------------
// ExclusionRegion

ExclusionRegion::ExclusionRegion(Partition p, Rational d, Rational k)
    : part_(std::move(p)), delta_(std::move(d)), cutoff_(std::move(k)) {}

ExclusionRegion ExclusionRegion::create(Partition partition, Rational delta, Rational cutoff) {
  if (sign(delta) <= 0) throw ValidationError("delta must be positive");
  if (auto g = partition.min_gap(); g && !(2 * delta <= *g))
    throw ValidationError("point neighbourhoods overlap: need 2*delta <= smallest gap");
  if (!(cutoff > partition.max_abs_point() + delta))
    throw ValidationError("cutoff must exceed max |a_i| + delta");
  return ExclusionRegion(std::move(partition), std::move(delta), std::move(cutoff));
}

bool ExclusionRegion::contains(const Rational& x) const {
  if (!(rat_abs(x) < cutoff_)) return false;
  return part_.distance(x) >= delta_;
}

std::vector<std::pair<Rational, Rational>> ExclusionRegion::components() const {
  std::vector<std::pair<Rational, Rational>> out;
  const auto& pts = part_.points();
  Rational left = -cutoff_;
  for (const Rational& a : pts) {
    out.emplace_back(left, a - delta_);
    left = a + delta_;
  }
  out.emplace_back(left, cutoff_);
  return out;
}

std::size_t ExclusionRegion::component_index(const Rational& x) const {
  const auto& pts = part_.points();
  std::size_t idx = 0;
  for (const Rational& a : pts) {
    if (x > a)
      ++idx;
    else
      break;
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Simple approximation

namespace {

// Plateau value minimizing the exact L¹ distance to the given (value, length)
// pieces: any point of the weighted-median interval works; we take the one
// closest to zero so flat regions stay flat.
Rational weighted_median_toward_zero(std::vector<std::pair<Rational, Rational>> pieces) {
  std::sort(pieces.begin(), pieces.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Rational total(0);
  for (const auto& p : pieces) total += p.second;
  Rational half = total / 2;
  Rational cum(0);
  Rational lo, hi;
  bool lo_set = false, hi_set = false;
  for (const auto& p : pieces) {
    Rational next = cum + p.second;
    if (!lo_set && next >= half) {
      lo = p.first;
      lo_set = true;
    }
    if (!hi_set && next > half) {
      hi = p.first;
      hi_set = true;
    }
    cum = next;
  }
  if (!hi_set) hi = pieces.back().first;
  if (sign(lo) <= 0 && sign(hi) >= 0) return Rational(0);
  return rat_abs(lo) < rat_abs(hi) ? lo : hi;
}

Rational region_error(const StepFn& base, std::size_t from, std::size_t to, const Rational& c) {
  Rational err(0);
  for (std::size_t i = from; i < to; ++i)
    err += rat_abs(base.plateaus()[i] - c) * (base.breakpoints()[i + 1] - base.breakpoints()[i]);
  return err;
}

}  // namespace

SimpleApproximation simple_approximation(const PiecewiseLinearFn& f, const Rational& epsilon,
                                         bool coarsen) {
  if (f.is_zero()) throw ValidationError("simple approximation needs a nonzero function");
  if (sign(epsilon) <= 0) throw ValidationError("epsilon must be positive");

  StepFn base = f.derivative().canonical(/*trim_zero_edges=*/true);
  if (!coarsen) {
    return SimpleApproximation{base, Partition::from_step(base), Rational(0)};
  }

  // Greedy merge of adjacent regions, always taking the merge with the
  // smallest total error, as long as the total stays strictly below epsilon.
  struct Region {
    std::size_t from, to;  // piece range [from, to) of base
    Rational value, error;
  };
  std::vector<Region> regions;
  for (std::size_t i = 0; i < base.plateaus().size(); ++i)
    regions.push_back({i, i + 1, base.plateaus()[i], Rational(0)});
  Rational total_error(0);

  while (regions.size() > 1) {
    std::size_t best = regions.size();
    Rational best_total;
    Rational best_value, best_error;
    for (std::size_t k = 0; k + 1 < regions.size(); ++k) {
      std::vector<std::pair<Rational, Rational>> pieces;
      for (std::size_t i = regions[k].from; i < regions[k + 1].to; ++i)
        pieces.emplace_back(base.plateaus()[i], base.breakpoints()[i + 1] - base.breakpoints()[i]);
      Rational c = weighted_median_toward_zero(std::move(pieces));
      Rational err = region_error(base, regions[k].from, regions[k + 1].to, c);
      Rational candidate_total = total_error - regions[k].error - regions[k + 1].error + err;
      if (best == regions.size() || candidate_total < best_total) {
        best = k;
        best_total = candidate_total;
        best_value = c;
        best_error = err;
      }
    }
    if (best == regions.size() || !(best_total < epsilon)) break;
    regions[best].to = regions[best + 1].to;
    regions[best].value = best_value;
    regions[best].error = best_error;
    regions.erase(regions.begin() + static_cast<long>(best) + 1);
    total_error = best_total;
  }

  std::vector<Rational> bp{base.breakpoints()[regions.front().from]};
  std::vector<Rational> plateau;
  for (const Region& r : regions) {
    plateau.push_back(r.value);
    bp.push_back(base.breakpoints()[r.to]);
  }
  StepFn g = StepFn::create(std::move(bp), std::move(plateau));
  return SimpleApproximation{g, Partition::from_step(g), total_error};
}

// ---------------------------------------------------------------------------
// Perturbation sequences

PerturbationKind parse_perturbation_kind(const std::string& name) {
  if (name == "bump") return PerturbationKind::bump;
  if (name == "dilation") return PerturbationKind::dilation;
  if (name == "shift") return PerturbationKind::shift;
  if (name == "noise") return PerturbationKind::noise;
  throw ValidationError("unknown perturbation kind '" + name + "'");
}

const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::bump: return "bump";
    case PerturbationKind::dilation: return "dilation";
    case PerturbationKind::shift: return "shift";
    case PerturbationKind::noise: return "noise";
  }
  return "?";
}

namespace {

PiecewiseLinearFn tent(const Rational& center, const Rational& halfwidth, const Rational& height) {
  return PiecewiseLinearFn::create({center - halfwidth, center, center + halfwidth},
                                   {Rational(0), height, Rational(0)});
}

// Seeded draw in [lo, hi]; plain modulo, independent of std distributions so
// sequences are identical across platforms.
long draw(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

}  // namespace

Perturbed perturbation_sequence(const PiecewiseLinearFn& f, PerturbationKind kind, int j,
                                std::uint64_t seed) {
  if (j < 1) throw ValidationError("perturbation index j must be >= 1");
  Rational inv_j = Rational(1) / Rational(j);
  switch (kind) {
    case PerturbationKind::bump: {
      Rational w = f.support_length() / 4;
      Rational m = (f.support_lo() + f.support_hi()) / 2;
      PiecewiseLinearFn bump = tent(m, w, Rational(1));
      PiecewiseLinearFn fj = f.plus(bump.scaled(inv_j));
      // gap is exactly (1/j) * ||bump||_{1,1}
      Rational c = bump.norm_sobolev();
      return Perturbed{std::move(fj), std::move(c)};
    }
    case PerturbationKind::shift: {
      PiecewiseLinearFn fj = f.translated(inv_j);
      Rational gap = fj.minus(f).norm_sobolev();
      return Perturbed{std::move(fj), Rational(gap * j)};
    }
    case PerturbationKind::dilation: {
      PiecewiseLinearFn fj = f.dilated_argument(Rational(j + 1) / Rational(j));
      Rational gap = fj.minus(f).norm_sobolev();
      return Perturbed{std::move(fj), Rational(gap * j)};
    }
    case PerturbationKind::noise:
      break;
  }
  // noise: sum of a few seeded tents on the middle half of the support,
  // scaled by 1/j, clamped at zero afterwards.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Rational len = f.support_length();
  PiecewiseLinearFn noise = tent(f.support_lo() + len / 2, len / 8, Rational(0));
  for (int k = 0; k < 4; ++k) {
    Rational amp = Rational(draw(rng, -32, 32)) / 32;
    Rational pos = f.support_lo() + len / 4 + Rational(draw(rng, 0, 64)) * len / 128;
    Rational width = len / 16 + Rational(draw(rng, 0, 16)) * len / 256;
    noise = noise.plus(tent(pos, width, amp));
  }
  PiecewiseLinearFn fj = f.plus(noise.scaled(inv_j)).clamped_nonnegative();
  Rational gap = fj.minus(f).norm_sobolev();
  return Perturbed{std::move(fj), Rational(gap * j)};
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

Rational rational_from_json(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(static_cast<long>(v.get<std::int64_t>()));
  throw ValidationError("rationals must be strings or integers (got '" + v.dump() + "')");
}

std::vector<Rational> rational_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ValidationError(std::string("missing array field '") + key + "'");
  std::vector<Rational> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) out.push_back(rational_from_json(v));
  return out;
}

}  // namespace

PiecewiseLinearFn read_function_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("malformed JSON");
  return PiecewiseLinearFn::create(rational_array(j, "breakpoints"), rational_array(j, "values"));
}

std::string write_function_json(const PiecewiseLinearFn& f) {
  nlohmann::json j;
  j["breakpoints"] = nlohmann::json::array();
  j["values"] = nlohmann::json::array();
  for (const Rational& b : f.breakpoints()) j["breakpoints"].push_back(to_fraction_string(b));
  for (const Rational& v : f.values()) j["values"].push_back(to_fraction_string(v));
  return j.dump(2) + "\n";
}

std::string write_step_json(const StepFn& g) {
  nlohmann::json j;
  j["breakpoints"] = nlohmann::json::array();
  j["plateaus"] = nlohmann::json::array();
  for (const Rational& b : g.breakpoints()) j["breakpoints"].push_back(to_fraction_string(b));
  for (const Rational& v : g.plateaus()) j["plateaus"].push_back(to_fraction_string(v));
  return j.dump(2) + "\n";
}

}  // namespace maxlab
