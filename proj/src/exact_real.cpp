#include "maxlab/exact_real.hpp"

#include <stdexcept>

#include "maxlab/errors.hpp"

namespace maxlab {

namespace {

// Divides out the largest square factor detectable by small primes plus a
// perfect-square check; returns k with s_in = k^2 * s_out.
Integer extract_square_part(Integer& s) {
  Integer k(1);
  if (sign(s) == 0) return k;
  if (mpz_perfect_square_p(s.get_mpz_t())) {
    Integer root;
    mpz_sqrt(root.get_mpz_t(), s.get_mpz_t());
    s = 1;
    return root;
  }
  static const unsigned long primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                         43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
  for (unsigned long p : primes) {
    Integer p2 = Integer(p) * Integer(p);
    while (mpz_divisible_p(s.get_mpz_t(), p2.get_mpz_t())) {
      s /= p2;
      k *= p;
    }
  }
  if (mpz_perfect_square_p(s.get_mpz_t())) {
    Integer root;
    mpz_sqrt(root.get_mpz_t(), s.get_mpz_t());
    s = 1;
    k *= root;
  }
  return k;
}

// Exact sign of A + B*sqrt(S) with S >= 0.
int sign_one_radical(const Rational& A, const Rational& B, const Integer& S) {
  if (sign(B) == 0 || sign(S) == 0) return sign(A);
  int sa = sign(A), sb = sign(B);
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare A^2 against B^2*S.
  Rational a2 = A * A;
  Rational b2s = B * B * Rational(S);
  int c = cmp(a2, b2s);
  if (c == 0) return 0;
  return c > 0 ? sa : sb;
}

// Exact sign of E + B*sqrt(S1) - D*sqrt(S2).
int sign_two_radicals(const Rational& E, const Rational& B, const Integer& S1, const Rational& D,
                      const Integer& S2) {
  if (sign(D) == 0 || sign(S2) == 0) return sign_one_radical(E, B, S1);
  if (sign(B) == 0 || sign(S1) == 0) return sign_one_radical(E, Rational(-D), S2);
  if (S1 == S2) return sign_one_radical(E, Rational(B - D), S1);
  int sp = sign_one_radical(E, B, S1);  // P = E + B*sqrt(S1)
  int sq = sign(D);                     // Q = D*sqrt(S2), nonzero here
  if (sp >= 0 && sq < 0) return 1;
  if (sp <= 0 && sq > 0) return -1;
  if (sp == 0) return -sq;
  // Both P and Q carry the same strict sign: compare their squares.
  // P^2 = E^2 + B^2*S1 + 2*E*B*sqrt(S1), Q^2 = D^2*S2.
  Rational head = E * E + B * B * Rational(S1) - D * D * Rational(S2);
  int c = sign_one_radical(head, Rational(2 * E * B), S1);
  return sp > 0 ? c : -c;
}

}  // namespace

ExactReal::ExactReal(Rational a, Rational b, Integer s) : a_(std::move(a)), b_(std::move(b)), s_(std::move(s)) {
  if (sign(s_) < 0) throw std::logic_error("negative radicand");
  normalize();
}

void ExactReal::normalize() {
  if (sign(b_) == 0 || sign(s_) == 0) {
    b_ = 0;
    s_ = 0;
    return;
  }
  Integer k = extract_square_part(s_);
  if (k != 1) b_ *= Rational(k);
  if (s_ == 1) {
    a_ += b_;
    b_ = 0;
    s_ = 0;
  }
}

ExactReal ExactReal::sqrt_of(const Rational& v) {
  if (sign(v) < 0) throw std::logic_error("sqrt of negative rational");
  if (sign(v) == 0) return ExactReal();
  // sqrt(p/q) = sqrt(p*q)/q
  const Integer& p = v.get_num();
  const Integer& q = v.get_den();
  return ExactReal(Rational(0), Rational(1) / Rational(q), p * q);
}

const Rational& ExactReal::as_rational() const {
  if (!is_rational()) throw std::logic_error("value has an irrational part");
  return a_;
}

int ExactReal::sgn() const { return sign_one_radical(a_, b_, s_); }

ExactReal ExactReal::abs() const { return sgn() < 0 ? -*this : *this; }

int ExactReal::sign_of_difference(const ExactReal& x, const ExactReal& y, const Rational& shift) {
  return sign_two_radicals(Rational(x.a_ - y.a_ - shift), x.b_, x.s_, y.b_, y.s_);
}

double ExactReal::to_double() const {
  if (is_rational()) return a_.get_d();
  mpf_class acc(a_, 256);
  mpf_class root(0, 256);
  mpf_class s_f(s_, 256);
  mpf_sqrt(root.get_mpf_t(), s_f.get_mpf_t());
  acc += mpf_class(b_, 256) * root;
  return acc.get_d();
}

std::string ExactReal::to_exact_string() const {
  if (is_rational()) return to_fraction_string(a_);
  Integer t;
  mpz_lcm(t.get_mpz_t(), a_.get_den().get_mpz_t(), b_.get_den().get_mpz_t());
  Integer p = a_.get_num() * (t / a_.get_den());
  Integer q = b_.get_num() * (t / b_.get_den());
  std::string body = "(" + p.get_str() + (sign(q) < 0 ? "-" : "+") +
                     Integer(::abs(q)).get_str() + "*sqrt(" + s_.get_str() + "))";
  if (t == 1) return body;
  return body + "/" + t.get_str();
}

ExactReal ExactReal::operator-() const {
  ExactReal r = *this;
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

bool ExactReal::same_field(const ExactReal& x, const ExactReal& y) {
  return x.is_rational() || y.is_rational() || x.s_ == y.s_;
}

ExactReal& ExactReal::operator+=(const ExactReal& o) {
  if (!same_field(*this, o)) throw std::logic_error("mixed radicands in addition");
  a_ += o.a_;
  if (!o.is_rational()) {
    b_ += o.b_;
    s_ = o.s_;
  }
  normalize();
  return *this;
}

ExactReal& ExactReal::operator-=(const ExactReal& o) {
  if (!same_field(*this, o)) throw std::logic_error("mixed radicands in subtraction");
  a_ -= o.a_;
  if (!o.is_rational()) {
    b_ -= o.b_;
    s_ = o.s_;
  }
  normalize();
  return *this;
}

ExactReal& ExactReal::operator*=(const ExactReal& o) {
  if (!same_field(*this, o)) throw std::logic_error("mixed radicands in multiplication");
  if (o.is_rational()) {
    a_ *= o.a_;
    b_ *= o.a_;
  } else if (is_rational()) {
    Rational scale = a_;
    a_ = scale * o.a_;
    b_ = scale * o.b_;
    s_ = o.s_;
  } else {
    // (a1 + b1*r)(a2 + b2*r) with r^2 = s
    Rational a = a_ * o.a_ + b_ * o.b_ * Rational(s_);
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = a;
    b_ = b;
  }
  normalize();
  return *this;
}

ExactReal& ExactReal::operator/=(const ExactReal& o) {
  if (!same_field(*this, o)) throw std::logic_error("mixed radicands in division");
  if (o.is_rational()) {
    if (sign(o.a_) == 0) throw std::logic_error("division by zero");
    a_ /= o.a_;
    b_ /= o.a_;
    normalize();
    return *this;
  }
  // Multiply by the conjugate; after normalize the radicand is never a perfect
  // square, so a + b*sqrt(s) = 0 only when a = b = 0.
  Rational denom = o.a_ * o.a_ - o.b_ * o.b_ * Rational(o.s_);
  if (sign(denom) == 0) throw std::logic_error("division by zero");
  ExactReal conj = o;
  conj.b_ = -conj.b_;
  *this *= conj;
  a_ /= denom;
  b_ /= denom;
  normalize();
  return *this;
}

}  // namespace maxlab
