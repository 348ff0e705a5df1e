#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace latkit {

using Integer = mpz_class;
using Rational = mpq_class;

/// Parses "p/q", an integer, or a finite decimal ("-0.125", "3e-2") exactly.
Rational parse_rational(std::string_view text);

/// Exact conversion of a finite double.
Rational rational_from_double(double x);

double to_double(const Rational& q);
double to_double(const Integer& z);

/// Natural log of |q| without overflow for huge numerators/denominators.
double log_abs(const Rational& q);

/// Nearest integer, halves rounded toward +infinity.
Integer round_nearest(const Rational& q);

std::int64_t to_int64(const Integer& z);

/// Exact square root if q is the square of a rational.
bool rational_sqrt(const Rational& q, Rational& root);

std::string to_string(const Rational& q);

}  // namespace latkit
