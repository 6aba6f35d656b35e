#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace selfsim {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// "p/q" or "p"; sign on the numerator.  Always stored in lowest terms with a
// positive denominator (cpp_rational maintains that canonical form).
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

Rational pow_rational(const Rational& base, long exp); // exp may be negative; base != 0 then
Integer pow_integer(const Integer& base, unsigned long exp);

// Trial division; expected inputs are small (map-ratio numerators/denominators).
std::vector<std::pair<Integer, unsigned>> factorize(Integer n); // n >= 1

std::optional<Integer> integer_root(const Integer& n, unsigned k); // exact k-th root of n >= 0

// Largest exponent decomposition: m = p^l with l >= 2 maximal, or nullopt.
std::optional<std::pair<Integer, unsigned>> is_perfect_power(const Integer& m); // m >= 2

Integer gcd_integer(Integer a, Integer b);
Integer lcm_integer(const Integer& a, const Integer& b);

// Certified rational bracket for sqrt(q), q >= 0: lo^2 <= q <= hi^2 exactly,
// with hi - lo on the order of 1e-15 * sqrt(q).
std::pair<Rational, Rational> sqrt_rational_bounds(const Rational& q);

} // namespace selfsim
