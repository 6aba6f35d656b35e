#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/rational.hpp"

namespace selfsim {

// Dense univariate polynomial over the rationals; c[k] is the coefficient of x^k.
struct Poly {
    std::vector<Rational> c;

    static Poly zero() { return Poly{}; }
    static Poly constant(const Rational& a);
    static Poly monomial(long k, const Rational& a);

    int degree() const; // -1 for the zero polynomial
    bool is_zero() const { return degree() < 0; }
    const Rational& lc() const; // leading coefficient; degree() >= 0 required
    void trim();
};

bool operator==(const Poly& a, const Poly& b);

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Rational& s);
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b); // b != 0
Poly poly_derivative(const Poly& a);
Poly poly_gcd(Poly a, Poly b);          // monic gcd
Poly squarefree_part(const Poly& a);    // a / gcd(a, a')

Rational poly_eval(const Poly& a, const Rational& x);
double poly_eval(const Poly& a, double x);
std::complex<double> poly_eval(const Poly& a, std::complex<double> x);

// Clear denominators and divide by integer content; leading coefficient made positive.
Poly primitive_integer_part(const Poly& a);

// Display form, e.g. "2x^2+2x-1".
std::string poly_to_string(const Poly& a);

// All complex roots (Durand-Kerner followed by Newton polish).  Degree >= 1.
std::vector<std::complex<double>> roots_numeric(const Poly& a);

} // namespace selfsim
