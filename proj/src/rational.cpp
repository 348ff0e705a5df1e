#include "latkit/rational.hpp"

#include <cmath>
#include <limits>

#include "latkit/errors.hpp"

namespace latkit {

namespace {

Integer pow10(long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw InvalidInput("empty rational literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(std::string_view(s).substr(0, slash));
    Rational den = parse_rational(std::string_view(s).substr(slash + 1));
    if (den == 0) throw InvalidInput("zero denominator in '" + s + "'");
    Rational q = num / den;
    q.canonicalize();
    return q;
  }

  // sign, digits, optional fraction, optional exponent
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw InvalidInput("malformed number '" + s + "'");
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw InvalidInput("malformed number '" + s + "'");
    ++i;
    std::size_t used = 0;
    try {
      exponent = std::stol(s.substr(i), &used);
    } catch (const std::exception&) {
      throw InvalidInput("malformed exponent in '" + s + "'");
    }
    if (i + used != s.size()) throw InvalidInput("malformed number '" + s + "'");
  }
  Integer mantissa(digits, 10);
  if (negative) mantissa = -mantissa;
  long shift = exponent - frac_digits;
  Rational q;
  if (shift >= 0) {
    q = Rational(mantissa * pow10(shift));
  } else {
    q = Rational(mantissa, pow10(-shift));
  }
  q.canonicalize();
  return q;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw InvalidInput("non-finite value cannot be made exact");
  Rational q(x);  // mpq_set_d is exact
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }
double to_double(const Integer& z) { return z.get_d(); }

double log_abs(const Rational& q) {
  if (q == 0) return -std::numeric_limits<double>::infinity();
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(std::abs(mn)) - std::log(md) + static_cast<double>(en - ed) * std::log(2.0);
}

Integer round_nearest(const Rational& q) {
  Rational shifted = q + Rational(1, 2);
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  return r;
}

std::int64_t to_int64(const Integer& z) {
  if (!z.fits_slong_p()) throw InvalidInput("integer coefficient exceeds 64 bits");
  return z.get_si();
}

bool rational_sqrt(const Rational& q, Rational& root) {
  if (q < 0) return false;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) {
    return false;
  }
  Integer n, d;
  mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
  root = Rational(n, d);
  root.canonicalize();
  return true;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace latkit
