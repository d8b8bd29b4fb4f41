#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace padic {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exponent of p in a nonzero integer or rational. Throws on zero.
int p_valuation(const BigInt& x, std::int64_t p);
int p_valuation(const Rational& x, std::int64_t p);

BigInt int_pow(const BigInt& base, unsigned exp);
Rational rat_pow(const Rational& base, int exp);

// Accepts "a", "a/b", "u*p^v", "p^v", "u*3^v" (the letter p stands for the prime).
Rational parse_rational(const std::string& text, std::int64_t p);

// Renders as "u*p^v" with u a p-adic unit when that is shorter, else "a/b".
std::string format_rational(const Rational& x, std::int64_t p);
std::string to_string(const Rational& x);

// Exact binomial coefficient, n >= k >= 0.
BigInt binomial_coefficient(int n, int k);

// Floor of log_p(n) for n >= 1.
int floor_log(std::int64_t n, std::int64_t p);

}  // namespace padic
