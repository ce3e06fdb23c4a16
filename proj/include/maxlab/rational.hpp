#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace maxlab {

using Rational = mpq_class;
using Integer = mpz_class;

inline int sign(const Rational& q) { return mpq_sgn(q.get_mpq_t()); }
inline int sign(const Integer& z) { return mpz_sgn(z.get_mpz_t()); }

/// Parses "p/q", an integer, or a plain decimal ("-0.125") into an exact
/// rational.  Throws ValidationError on anything else.
Rational parse_rational(const std::string& text);

/// Canonical "p/q" (or "p" for integers); parse_rational round-trips it.
std::string to_fraction_string(const Rational& q);

double to_double(const Rational& q);

/// floor(span/step) as a plain integer; grid sizes are small.
long grid_count(const Rational& span, const Rational& step);

/// Interval with optionally unbounded endpoints, used for the window-restricted
/// maximal operator.
struct Interval {
  std::optional<Rational> lo;
  std::optional<Rational> hi;

  bool contains_interior(const Rational& x) const {
    if (lo && !(x > *lo)) return false;
    if (hi && !(x < *hi)) return false;
    return true;
  }
  bool whole_line() const { return !lo && !hi; }
};

}  // namespace maxlab
