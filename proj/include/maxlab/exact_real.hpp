#pragma once

#include <string>

#include "maxlab/rational.hpp"

namespace maxlab {

/// Exact real of the form a + b*sqrt(s) with rational a, b and a nonnegative
/// integer radicand s.  Optimal radii of windowed averages are roots of
/// quadratics with rational coefficients, so every value the engine produces
/// lives in a single quadratic field and stays exactly representable.
///
/// Arithmetic is closed within one field (matching radicands, or one operand
/// rational).  Comparisons work across *different* fields through exact sign
/// tests of expressions with up to two radicals — no floating point, no
/// tolerance.
class ExactReal {
public:
  ExactReal() : a_(0), b_(0), s_(0) {}
  ExactReal(const Rational& r) : a_(r), b_(0), s_(0) {}  // implicit: rationals embed
  ExactReal(int v) : a_(v), b_(0), s_(0) {}
  ExactReal(Rational a, Rational b, Integer s);

  /// Exact square root of a nonnegative rational.
  static ExactReal sqrt_of(const Rational& v);

  bool is_rational() const { return sign(b_) == 0; }
  const Rational& rational_part() const { return a_; }
  const Rational& radical_coeff() const { return b_; }
  const Integer& radicand() const { return s_; }

  /// Requires is_rational().
  const Rational& as_rational() const;

  int sgn() const;
  ExactReal abs() const;

  /// Exact sign of (x - y - shift); the workhorse for cross-field
  /// comparisons and for checking |x - y| <= bound without leaving
  /// exact arithmetic.
  static int sign_of_difference(const ExactReal& x, const ExactReal& y, const Rational& shift);
  static int compare(const ExactReal& x, const ExactReal& y) {
    return sign_of_difference(x, y, Rational(0));
  }
  static bool abs_diff_le(const ExactReal& x, const ExactReal& y, const Rational& bound) {
    return sign_of_difference(x, y, bound) <= 0 && sign_of_difference(y, x, bound) <= 0;
  }

  double to_double() const;
  /// "p/q" for rationals, "(p+q*sqrt(s))/t" otherwise.
  std::string to_exact_string() const;

  ExactReal operator-() const;
  ExactReal& operator+=(const ExactReal& o);
  ExactReal& operator-=(const ExactReal& o);
  ExactReal& operator*=(const ExactReal& o);
  ExactReal& operator/=(const ExactReal& o);

  friend ExactReal operator+(ExactReal l, const ExactReal& r) { return l += r; }
  friend ExactReal operator-(ExactReal l, const ExactReal& r) { return l -= r; }
  friend ExactReal operator*(ExactReal l, const ExactReal& r) { return l *= r; }
  friend ExactReal operator/(ExactReal l, const ExactReal& r) { return l /= r; }

  friend bool operator==(const ExactReal& l, const ExactReal& r) { return compare(l, r) == 0; }
  friend bool operator!=(const ExactReal& l, const ExactReal& r) { return compare(l, r) != 0; }
  friend bool operator<(const ExactReal& l, const ExactReal& r) { return compare(l, r) < 0; }
  friend bool operator>(const ExactReal& l, const ExactReal& r) { return compare(l, r) > 0; }
  friend bool operator<=(const ExactReal& l, const ExactReal& r) { return compare(l, r) <= 0; }
  friend bool operator>=(const ExactReal& l, const ExactReal& r) { return compare(l, r) >= 0; }

private:
  void normalize();
  // Field-compatibility: true if arithmetic between the radicands is closed.
  static bool same_field(const ExactReal& x, const ExactReal& y);

  Rational a_, b_;
  Integer s_;
};

}  // namespace maxlab
