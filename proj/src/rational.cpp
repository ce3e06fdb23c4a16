#include "maxlab/rational.hpp"

#include <cctype>

#include "maxlab/errors.hpp"

namespace maxlab {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ValidationError("empty rational literal");

  bool negative = false;
  if (s[0] == '+' || s[0] == '-') {
    negative = (s[0] == '-');
    s.erase(0, 1);
  }
  if (s.empty()) throw ValidationError("sign without digits in rational literal");

  Rational value;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw ValidationError("malformed fraction '" + text + "'");
    Integer n(num, 10), d(den, 10);
    if (sign(d) == 0) throw ValidationError("zero denominator in '" + text + "'");
    value = Rational(n) / Rational(d);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if (ip.empty()) ip = "0";
    if (fp.empty()) fp = "0";
    if (!all_digits(ip) || !all_digits(fp))
      throw ValidationError("malformed decimal '" + text + "'");
    Integer scaled(ip + fp, 10);
    Integer den(1);
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    value = Rational(scaled) / Rational(den);
  } else {
    if (!all_digits(s)) throw ValidationError("malformed rational '" + text + "'");
    value = Rational(Integer(s, 10));
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

std::string to_fraction_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

long grid_count(const Rational& span, const Rational& step) {
  Rational ratio = span / step;
  Integer floor_q;
  mpz_fdiv_q(floor_q.get_mpz_t(), ratio.get_num().get_mpz_t(), ratio.get_den().get_mpz_t());
  if (!floor_q.fits_slong_p()) throw ValidationError("grid too large");
  return floor_q.get_si();
}

}  // namespace maxlab
