#include "selfsim/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "selfsim/errors.hpp"

namespace selfsim {

Poly Poly::constant(const Rational& a) {
    Poly p;
    if (a != 0) p.c = {a};
    return p;
}

Poly Poly::monomial(long k, const Rational& a) {
    Poly p;
    if (a != 0) {
        p.c.assign(static_cast<std::size_t>(k) + 1, Rational(0));
        p.c.back() = a;
    }
    return p;
}

int Poly::degree() const { return static_cast<int>(c.size()) - 1; }

const Rational& Poly::lc() const { return c.back(); }

void Poly::trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
}

bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r;
    r.c.resize(std::max(a.c.size(), b.c.size()), Rational(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    r.trim();
    return r;
}

Poly poly_sub(const Poly& a, const Poly& b) {
    Poly r;
    r.c.resize(std::max(a.c.size(), b.c.size()), Rational(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] -= b.c[i];
    r.trim();
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly::zero();
    Poly r;
    r.c.assign(a.c.size() + b.c.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] == 0) continue;
        for (std::size_t j = 0; j < b.c.size(); ++j)
            if (b.c[j] != 0) r.c[i + j] += a.c[i] * b.c[j];
    }
    r.trim();
    return r;
}

Poly poly_scale(const Poly& a, const Rational& s) {
    if (s == 0) return Poly::zero();
    Poly r = a;
    for (auto& x : r.c) x *= s;
    return r;
}

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) fail(ErrorCode::PreconditionFailed, "division by zero polynomial");
    Poly rem = a;
    rem.trim();
    Poly quo;
    const int db = b.degree();
    if (rem.degree() >= db) quo.c.assign(static_cast<std::size_t>(rem.degree() - db) + 1, Rational(0));
    while (rem.degree() >= db) {
        const int k = rem.degree() - db;
        const Rational f = rem.lc() / b.lc();
        quo.c[static_cast<std::size_t>(k)] = f;
        for (int i = 0; i <= db; ++i)
            rem.c[static_cast<std::size_t>(i + k)] -= f * b.c[static_cast<std::size_t>(i)];
        rem.trim();
    }
    quo.trim();
    return {quo, rem};
}

Poly poly_derivative(const Poly& a) {
    Poly r;
    if (a.c.size() <= 1) return r;
    r.c.resize(a.c.size() - 1);
    for (std::size_t i = 1; i < a.c.size(); ++i) r.c[i - 1] = a.c[i] * Rational(Integer(i));
    r.trim();
    return r;
}

namespace {

Poly make_monic(Poly p) {
    p.trim();
    if (p.is_zero()) return p;
    const Rational l = p.lc();
    for (auto& x : p.c) x /= l;
    return p;
}

} // namespace

Poly poly_gcd(Poly a, Poly b) {
    a.trim();
    b.trim();
    while (!b.is_zero()) {
        Poly r = poly_divmod(a, b).second;
        a = std::move(b);
        b = make_monic(std::move(r));
    }
    return make_monic(std::move(a));
}

Poly squarefree_part(const Poly& a) {
    Poly p = a;
    p.trim();
    if (p.degree() <= 1) return p;
    Poly g = poly_gcd(p, poly_derivative(p));
    if (g.degree() <= 0) return p;
    return poly_divmod(p, g).first;
}

Rational poly_eval(const Poly& a, const Rational& x) {
    Rational r(0);
    for (std::size_t i = a.c.size(); i-- > 0;) r = r * x + a.c[i];
    return r;
}

double poly_eval(const Poly& a, double x) {
    double r = 0;
    for (std::size_t i = a.c.size(); i-- > 0;) r = r * x + to_double(a.c[i]);
    return r;
}

std::complex<double> poly_eval(const Poly& a, std::complex<double> x) {
    std::complex<double> r = 0;
    for (std::size_t i = a.c.size(); i-- > 0;) r = r * x + to_double(a.c[i]);
    return r;
}

Poly primitive_integer_part(const Poly& a) {
    Poly p = a;
    p.trim();
    if (p.is_zero()) return p;
    Integer den = 1;
    for (const auto& x : p.c) den = lcm_integer(den, denominator(x));
    Integer content = 0;
    std::vector<Integer> ints(p.c.size());
    for (std::size_t i = 0; i < p.c.size(); ++i) {
        ints[i] = numerator(p.c[i]) * (den / denominator(p.c[i]));
        content = gcd_integer(content, ints[i]);
    }
    if (content == 0) content = 1;
    if (ints.back() < 0) content = -content;
    Poly r;
    r.c.resize(p.c.size());
    for (std::size_t i = 0; i < p.c.size(); ++i) r.c[i] = Rational(ints[i] / content);
    return r;
}

std::string poly_to_string(const Poly& a) {
    Poly p = a;
    p.trim();
    if (p.is_zero()) return "0";
    std::string out;
    for (int k = p.degree(); k >= 0; --k) {
        const Rational& coef = p.c[static_cast<std::size_t>(k)];
        if (coef == 0) continue;
        const bool first = out.empty();
        const bool negative = coef < 0;
        Rational mag = negative ? Rational(-coef) : coef;
        if (first)
            out += negative ? "-" : "";
        else
            out += negative ? "-" : "+";
        const bool unit = (mag == 1);
        if (k == 0 || !unit) out += format_rational(mag);
        if (k >= 1) {
            out += "x";
            if (k >= 2) out += "^" + std::to_string(k);
        }
    }
    return out;
}

std::vector<std::complex<double>> roots_numeric(const Poly& a) {
    Poly p = a;
    p.trim();
    const int n = p.degree();
    if (n < 1) fail(ErrorCode::PreconditionFailed, "roots_numeric needs degree >= 1");
    std::vector<std::complex<double>> coef(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        coef[static_cast<std::size_t>(i)] =
            to_double(p.c[static_cast<std::size_t>(i)] / p.lc());

    auto eval_monic = [&](std::complex<double> x) {
        std::complex<double> r = 0;
        for (std::size_t i = coef.size(); i-- > 0;) r = r * x + coef[i];
        return r;
    };

    double radius = 0;
    for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(coef[static_cast<std::size_t>(i)]));
    radius = 1.0 + radius;

    std::vector<std::complex<double>> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = 6.2831853071795864769 * (static_cast<double>(i) / n) + 0.4;
        z[static_cast<std::size_t>(i)] = std::polar(radius * 0.7, t);
    }

    for (int iter = 0; iter < 600; ++iter) {
        double shift = 0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> denom = 1;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)]);
            if (denom == std::complex<double>(0)) {
                z[static_cast<std::size_t>(i)] += 1e-8;
                continue;
            }
            const std::complex<double> d = eval_monic(z[static_cast<std::size_t>(i)]) / denom;
            z[static_cast<std::size_t>(i)] -= d;
            shift = std::max(shift, std::abs(d));
        }
        if (shift < 1e-15) break;
    }

    // Newton polish against the original polynomial.
    const Poly dp = poly_derivative(p);
    for (auto& root : z) {
        for (int it = 0; it < 8; ++it) {
            const std::complex<double> f = poly_eval(p, root);
            const std::complex<double> df = poly_eval(dp, root);
            if (std::abs(df) < 1e-300) break;
            const std::complex<double> step = f / df;
            root -= step;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(root))) break;
        }
    }
    return z;
}

} // namespace selfsim
