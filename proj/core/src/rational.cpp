#include "selfsim/rational.hpp"

#include <cmath>

#include <boost/multiprecision/integer.hpp>

#include "selfsim/errors.hpp"

namespace selfsim {

namespace {

bool valid_integer_token(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

} // namespace

Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            if (!valid_integer_token(text))
                fail(ErrorCode::ParseError, "bad rational '" + text + "'");
            return Rational(Integer(text));
        }
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        if (!valid_integer_token(num) || !valid_integer_token(den))
            fail(ErrorCode::ParseError, "bad rational '" + text + "'");
        Integer d(den);
        if (d == 0)
            fail(ErrorCode::ParseError, "zero denominator in '" + text + "'");
        return Rational(Integer(num), d);
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad rational '" + text + "'");
    }
}

std::string format_rational(const Rational& q) {
    const Integer num = numerator(q);
    const Integer den = denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

Rational pow_rational(const Rational& base, long exp) {
    if (exp == 0) return Rational(1);
    const bool neg = exp < 0;
    const unsigned long e = neg ? static_cast<unsigned long>(-exp) : static_cast<unsigned long>(exp);
    Rational r(pow_integer(numerator(base), e), pow_integer(denominator(base), e));
    if (!neg) return r;
    if (r == 0) fail(ErrorCode::PreconditionFailed, "negative power of zero");
    return Rational(1) / r;
}

Integer pow_integer(const Integer& base, unsigned long exp) {
    Integer acc = 1, b = base;
    while (exp) {
        if (exp & 1) acc *= b;
        b *= b;
        exp >>= 1;
    }
    return acc;
}

std::vector<std::pair<Integer, unsigned>> factorize(Integer n) {
    if (n < 1) fail(ErrorCode::PreconditionFailed, "factorize expects n >= 1");
    std::vector<std::pair<Integer, unsigned>> out;
    Integer p = 2;
    while (p * p <= n) {
        if (n % p == 0) {
            unsigned e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
        p += (p == 2) ? 1 : 2;
    }
    if (n > 1) out.emplace_back(n, 1u);
    return out;
}

std::optional<Integer> integer_root(const Integer& n, unsigned k) {
    if (n < 0 || k == 0) return std::nullopt;
    if (n == 0 || n == 1 || k == 1) return n;
    Integer lo = 1, hi = 1;
    while (pow_integer(hi, k) < n) hi <<= 1;
    while (lo < hi) {
        Integer mid = (lo + hi + 1) >> 1;
        if (pow_integer(mid, k) <= n)
            lo = mid;
        else
            hi = mid - 1;
    }
    if (pow_integer(lo, k) == n) return lo;
    return std::nullopt;
}

std::optional<std::pair<Integer, unsigned>> is_perfect_power(const Integer& m) {
    if (m < 2) return std::nullopt;
    const unsigned maxl = static_cast<unsigned>(boost::multiprecision::msb(m)) + 1;
    for (unsigned l = maxl; l >= 2; --l) {
        if (auto r = integer_root(m, l); r && *r >= 2)
            return std::make_pair(*r, l);
    }
    return std::nullopt;
}

Integer gcd_integer(Integer a, Integer b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        Integer t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Integer lcm_integer(const Integer& a, const Integer& b) {
    if (a == 0 || b == 0) return 0;
    Integer g = gcd_integer(a, b);
    Integer l = (a / g) * b;
    return l < 0 ? -l : l;
}

std::pair<Rational, Rational> sqrt_rational_bounds(const Rational& q) {
    if (q < 0) fail(ErrorCode::PreconditionFailed, "sqrt of a negative rational");
    if (q == 0) return {Rational(0), Rational(0)};
    // A single exact Newton step from any positive seed already lands at or
    // above sqrt(q) (AM-GM); further steps only tighten.  lo = q/hi pairs it.
    const double seed = std::sqrt(to_double(q));
    Rational hi = (std::isfinite(seed) && seed > 0) ? Rational(seed) : (q + 1) / 2;
    if (hi <= 0) hi = (q + 1) / 2;
    for (int i = 0; i < 5; ++i) hi = (hi + q / hi) / 2;
    Rational lo = q / hi; // lo * hi = q, so lo <= sqrt(q) <= hi
    return {lo, hi};
}

} // namespace selfsim
