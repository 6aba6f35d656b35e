#include "selfsim/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "selfsim/errors.hpp"

namespace selfsim {

// ---------------------------------------------------------------------------
// solve_dimension
// ---------------------------------------------------------------------------

double solve_dimension(const std::vector<Rational>& ratios, double tol) {
    if (ratios.size() < 2)
        fail(ErrorCode::PreconditionFailed, "dust-like requires >= 2 maps");
    std::vector<double> r;
    r.reserve(ratios.size());
    for (const auto& q : ratios) {
        if (!(q > 0 && q < 1))
            fail(ErrorCode::PreconditionFailed, "ratios must lie in (0,1)");
        r.push_back(to_double(q));
    }
    auto f = [&](double s) {
        double sum = 0;
        for (double ri : r) sum += std::pow(ri, s);
        return sum - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < tol * 1e-3) break;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// ratio_root / is_log_rational
// ---------------------------------------------------------------------------

namespace {

// Exponent vector of a positive rational over the primes of its numerator and
// denominator: value == prod p^{e_p}.
std::map<Integer, long> prime_exponents(const Rational& q) {
    std::map<Integer, long> e;
    for (const auto& [p, k] : factorize(numerator(q)))
        e[p] += static_cast<long>(k);
    for (const auto& [p, k] : factorize(denominator(q)))
        e[p] -= static_cast<long>(k);
    for (auto it = e.begin(); it != e.end();)
        it = (it->second == 0) ? e.erase(it) : std::next(it);
    return e;
}

Rational from_prime_exponents(const std::map<Integer, long>& e) {
    Rational v(1);
    for (const auto& [p, k] : e) v *= pow_rational(Rational(p), k);
    return v;
}

} // namespace

std::optional<RatioRoot> try_ratio_root(const std::vector<Rational>& ratios) {
    if (ratios.empty()) return std::nullopt;
    std::vector<std::map<Integer, long>> vecs;
    vecs.reserve(ratios.size());
    for (const auto& q : ratios) {
        if (!(q > 0 && q < 1)) return std::nullopt;
        vecs.push_back(prime_exponents(q));
    }

    // All exponent vectors must be integer multiples of one primitive direction.
    const auto& v0 = vecs.front();
    long g0 = 0;
    for (const auto& [p, k] : v0) g0 = static_cast<long>(gcd_integer(g0, k).convert_to<long>());
    if (g0 < 0) g0 = -g0;
    std::map<Integer, long> dir;
    for (const auto& [p, k] : v0) dir[p] = k / g0;

    std::vector<long> t(ratios.size());
    const auto& [p0, d0] = *dir.begin();
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        const auto& v = vecs[i];
        auto it = v.find(p0);
        if (it == v.end() || it->second % d0 != 0) return std::nullopt;
        const long ti = it->second / d0;
        // verify v == ti * dir exactly
        if (v.size() != dir.size()) return std::nullopt;
        for (const auto& [p, k] : dir)
            if (auto jt = v.find(p); jt == v.end() || jt->second != ti * k) return std::nullopt;
        t[i] = ti;
    }

    // Orient the direction so the root lies in (0,1): then all t must be positive.
    Rational base = from_prime_exponents(dir);
    if (base > 1) {
        for (auto& [p, k] : dir) k = -k;
        for (auto& ti : t) ti = -ti;
        base = from_prime_exponents(dir);
    }
    long g = 0;
    for (long ti : t) {
        if (ti <= 0) return std::nullopt;
        g = static_cast<long>(gcd_integer(g, ti).convert_to<long>());
    }
    RatioRoot out;
    out.root = pow_rational(base, g);
    out.exponents.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out.exponents[i] = t[i] / g;
    return out;
}

RatioRoot ratio_root(const std::vector<Rational>& ratios) {
    if (ratios.empty())
        fail(ErrorCode::PreconditionFailed, "ratio_root expects a nonempty list");
    for (const auto& q : ratios)
        if (!(q > 0 && q < 1))
            fail(ErrorCode::PreconditionFailed, "ratios must lie in (0,1)");
    auto r = try_ratio_root(ratios);
    if (!r) fail(ErrorCode::NotCommensurable, "ratios are not powers of a common rational");
    return *r;
}

std::optional<Rational> is_log_rational(const Rational& a, const Rational& b) {
    if (!(a > 0 && a < 1 && b > 0 && b < 1))
        fail(ErrorCode::PreconditionFailed, "is_log_rational expects arguments in (0,1)");
    const auto ea = prime_exponents(a);
    const auto eb = prime_exponents(b);
    // log a / log b = p/q  iff  q * ea == p * eb componentwise.
    if (ea.size() != eb.size()) return std::nullopt;
    const auto& [pb, kb] = *eb.begin();
    auto it = ea.find(pb);
    if (it == ea.end()) return std::nullopt;
    // Division form: both exponents are negative for arguments in (0,1), and
    // cpp_rational's (num, den) constructor rejects a negative denominator.
    Rational k = Rational(Integer(it->second)) / Integer(kb);
    for (const auto& [p, e] : eb) {
        auto jt = ea.find(p);
        if (jt == ea.end()) return std::nullopt;
        if (Rational(Integer(jt->second)) / Integer(e) != k) return std::nullopt;
    }
    return k;
}

bool moran_power_sum_is_one(const Integer& m, const std::vector<Rational>& alphas) {
    if (m < 2) fail(ErrorCode::PreconditionFailed, "base must be >= 2");
    if (is_perfect_power(m))
        fail(ErrorCode::PreconditionFailed, "base " + m.str() + " is a perfect power");
    if (alphas.empty()) fail(ErrorCode::PreconditionFailed, "empty exponent list");
    Integer Q = 1;
    for (const auto& a : alphas) {
        if (a <= 0) fail(ErrorCode::PreconditionFailed, "exponents must be positive");
        Q = lcm_integer(Q, denominator(a));
    }
    // With y = m^{1/Q} (minimal polynomial y^Q - m since m is not a perfect power),
    // sum_j m^{-alpha_j} = 1 iff sum_j y^{Kmax - k_j} = y^{Kmax}, both sides reduced
    // modulo y^Q = m.  k_j = alpha_j * Q.
    std::vector<Integer> k(alphas.size());
    Integer kmax = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        k[i] = numerator(alphas[i]) * (Q / denominator(alphas[i]));
        kmax = std::max(kmax, k[i]);
    }
    std::map<Integer, Integer> lhs, rhs; // residue class -> coefficient
    auto reduce_add = [&](std::map<Integer, Integer>& side, const Integer& exp) {
        side[exp % Q] += pow_integer(m, (exp / Q).convert_to<unsigned long>());
    };
    for (const auto& kj : k) reduce_add(lhs, kmax - kj);
    reduce_add(rhs, kmax);
    return lhs == rhs;
}

IntegerExponentCheck verify_integer_exponents(const Integer& m, const std::vector<Rational>& alphas) {
    if (!moran_power_sum_is_one(m, alphas))
        fail(ErrorCode::PreconditionFailed, "exponent list does not satisfy sum m^{-a_j} = 1");

    IntegerExponentCheck out;
    out.all_integers = std::all_of(alphas.begin(), alphas.end(),
                                   [](const Rational& a) { return denominator(a) == 1; });
    if (out.all_integers)
        for (const auto& a : alphas) out.exponents.push_back(numerator(a));
    return out;
}

// ---------------------------------------------------------------------------
// MoranContext
// ---------------------------------------------------------------------------

namespace {

Poly moran_polynomial(const std::vector<long>& exponents) {
    long maxe = 0;
    for (long e : exponents) maxe = std::max(maxe, e);
    Poly p;
    p.c.assign(static_cast<std::size_t>(maxe) + 1, Rational(0));
    p.c[0] = Rational(-1);
    for (long e : exponents) p.c[static_cast<std::size_t>(e)] += 1;
    p.trim();
    return p;
}

struct Isolation {
    Rational lo, hi;             // sign change interval for the unique root in (0,1)
    std::optional<Rational> hit; // set when a bisection midpoint is exactly the root
};

// The Moran polynomial is strictly increasing on (0,1) with f(0) = -1 < 0, so the
// root there is unique and plain bisection isolates it.
Isolation isolate_root(const Poly& f, double tol) {
    Isolation iso;
    iso.lo = Rational(0);
    iso.hi = Rational(1);
    const int iters = std::max(8, static_cast<int>(std::ceil(std::log2(1.0 / tol))) + 4);
    for (int i = 0; i < iters; ++i) {
        Rational mid = (iso.lo + iso.hi) / 2;
        Rational v = poly_eval(f, mid);
        if (v == 0) {
            iso.hit = mid;
            // shrink to a proper sign-change bracket around the exact root
            iso.lo = mid - pow_rational(Rational(1, 2), i + 4);
            iso.hi = mid + pow_rational(Rational(1, 2), i + 4);
            return iso;
        }
        if (v < 0)
            iso.lo = mid;
        else
            iso.hi = mid;
    }
    return iso;
}

std::vector<Integer> positive_divisors(Integer n) {
    if (n < 0) n = -n;
    std::vector<Integer> divs{1};
    for (const auto& [p, e] : factorize(n)) {
        const std::size_t sz = divs.size();
        Integer pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < sz; ++i) divs.push_back(divs[i] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

// Minimal polynomial of the root isolated by [lo,hi]: smallest-degree integer
// divisor of the (squarefree, primitive) polynomial that changes sign on the
// bracket.  Candidates are proposed from numeric root subsets and accepted only
// after exact division, so numerics never decide correctness.
Poly minimal_polynomial(const Poly& moran, const Isolation& iso) {
    if (iso.hit) {
        // rational root p/q -> q x - p
        Poly lin;
        lin.c = {Rational(-numerator(*iso.hit)), Rational(denominator(*iso.hit))};
        return primitive_integer_part(lin);
    }
    const Poly sf = primitive_integer_part(squarefree_part(moran));
    if (sf.degree() == 1) return sf;

    auto sign_change = [&](const Poly& p) {
        const Rational a = poly_eval(p, iso.lo);
        const Rational b = poly_eval(p, iso.hi);
        return (a < 0 && b > 0) || (a > 0 && b < 0) || a == 0 || b == 0;
    };

    const auto roots = roots_numeric(sf);
    const double x0 = 0.5 * (to_double(iso.lo) + to_double(iso.hi));

    // Group roots into conjugation atoms: real singletons and complex pairs.
    struct Atom {
        std::vector<std::complex<double>> roots;
    };
    std::vector<Atom> atoms;
    std::vector<bool> used(roots.size(), false);
    std::size_t target_atom = 0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        Atom a;
        a.roots.push_back(roots[i]);
        if (std::abs(roots[i].imag()) > 1e-9) {
            std::size_t best = i;
            double bestd = 1e300;
            for (std::size_t j = i + 1; j < roots.size(); ++j) {
                if (used[j]) continue;
                const double d = std::abs(roots[j] - std::conj(roots[i]));
                if (d < bestd) {
                    bestd = d;
                    best = j;
                }
            }
            if (best != i) {
                used[best] = true;
                a.roots.push_back(roots[best]);
            }
        }
        if (std::abs(roots[i].imag()) <= 1e-9 && std::abs(roots[i].real() - x0) < 1e-7)
            target_atom = atoms.size();
        atoms.push_back(std::move(a));
    }
    if (atoms.size() > 22)
        fail(ErrorCode::ResourceLimit, "minimal polynomial search too large");

    const auto lc_divs = positive_divisors(numerator(moran.lc() == 0 ? Rational(1) : sf.lc()));

    // Subsets of the non-target atoms, ordered by resulting degree.
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (i != target_atom) others.push_back(i);
    std::vector<std::pair<int, std::uint64_t>> subsets; // (degree, mask)
    const std::uint64_t full = others.empty() ? 0 : ((1ull << others.size()) - 1);
    for (std::uint64_t mask = 0;; ++mask) {
        int deg = static_cast<int>(atoms[target_atom].roots.size());
        for (std::size_t b = 0; b < others.size(); ++b)
            if (mask & (1ull << b)) deg += static_cast<int>(atoms[others[b]].roots.size());
        subsets.emplace_back(deg, mask);
        if (mask == full) break;
    }
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [deg, mask] : subsets) {
        std::vector<std::complex<double>> sel = atoms[target_atom].roots;
        for (std::size_t b = 0; b < others.size(); ++b)
            if (mask & (1ull << b))
                sel.insert(sel.end(), atoms[others[b]].roots.begin(), atoms[others[b]].roots.end());

        // monic product over the selected roots
        std::vector<std::complex<double>> prod{1.0};
        for (const auto& r : sel) {
            std::vector<std::complex<double>> next(prod.size() + 1, 0.0);
            for (std::size_t i = 0; i < prod.size(); ++i) {
                next[i + 1] += prod[i];
                next[i] -= prod[i] * r;
            }
            prod = std::move(next);
        }

        for (const auto& l : lc_divs) {
            const double lf = l.convert_to<double>();
            Poly cand;
            cand.c.resize(prod.size());
            bool integral = true;
            for (std::size_t i = 0; i < prod.size(); ++i) {
                const double v = prod[i].real() * lf;
                const double r = std::round(v);
                if (std::abs(v - r) > 1e-4 || std::abs(prod[i].imag()) * lf > 1e-4) {
                    integral = false;
                    break;
                }
                cand.c[i] = Rational(Integer(static_cast<long long>(r)));
            }
            if (!integral) continue;
            cand.trim();
            if (cand.degree() != deg) continue;
            if (!sign_change(cand)) continue;
            if (!poly_divmod(sf, cand).second.is_zero()) continue;
            return primitive_integer_part(cand);
        }
    }
    return sf; // unreachable in practice: the full subset always divides
}

} // namespace

bool MoranContext::same_ring(const MoranContext& other) const {
    return ratio_root == other.ratio_root && min_poly == other.min_poly;
}

namespace {

ContextPtr build_context_from_exponents(const Rational& root, const std::vector<long>& exponents,
                                        double tol) {
    auto ctx = std::make_shared<MoranContext>();
    ctx->ratio_root = root;
    ctx->exponents = exponents;
    ctx->moran_poly = moran_polynomial(exponents);
    const Isolation iso = isolate_root(ctx->moran_poly, tol);
    ctx->min_poly = minimal_polynomial(ctx->moran_poly, iso);
    ctx->x_lo = iso.hit ? *iso.hit : iso.lo;
    ctx->x_hi = iso.hit ? *iso.hit : iso.hi;
    ctx->x_value = iso.hit ? to_double(*iso.hit)
                           : 0.5 * (to_double(iso.lo) + to_double(iso.hi));
    ctx->s_value = std::log(ctx->x_value) / std::log(to_double(root));
    return ctx;
}

} // namespace

ContextPtr build_context(const std::vector<Rational>& ratios, double tol) {
    if (ratios.size() < 2)
        fail(ErrorCode::PreconditionFailed, "dust-like requires >= 2 maps");
    const RatioRoot rr = ratio_root(ratios);
    return build_context_from_exponents(rr.root, rr.exponents, tol);
}

JointContext build_joint_context(const std::vector<Rational>& ratios_a,
                                 const std::vector<Rational>& ratios_b,
                                 double tol) {
    if (ratios_a.size() < 2 || ratios_b.size() < 2)
        fail(ErrorCode::PreconditionFailed, "dust-like requires >= 2 maps");
    std::vector<Rational> both = ratios_a;
    both.insert(both.end(), ratios_b.begin(), ratios_b.end());
    const RatioRoot rr = ratio_root(both);

    JointContext jc;
    jc.exponents_a.assign(rr.exponents.begin(),
                          rr.exponents.begin() + static_cast<long>(ratios_a.size()));
    jc.exponents_b.assign(rr.exponents.begin() + static_cast<long>(ratios_a.size()),
                          rr.exponents.end());
    jc.ctx = build_context_from_exponents(rr.root, jc.exponents_a, tol);

    // The second relation must hold in the same ring, i.e. the two systems share
    // the dimension exactly.
    const AlgebraicMass moran_b =
        AlgebraicMass::from_multiset(jc.ctx, [&] {
            MonomialMultiset m;
            for (long e : jc.exponents_b) m[e] += 1;
            return m;
        }());
    if (moran_b != AlgebraicMass::one(jc.ctx))
        fail(ErrorCode::DimensionMismatch,
             "the two Moran relations are incompatible in the common ring");
    return jc;
}

// ---------------------------------------------------------------------------
// AlgebraicMass
// ---------------------------------------------------------------------------

MonomialMultiset expand_power(const MonomialMultiset& base, unsigned k) {
    MonomialMultiset acc{{0, 1}};
    for (unsigned i = 0; i < k; ++i) {
        MonomialMultiset next;
        for (const auto& [ea, ca] : acc)
            for (const auto& [eb, cb] : base) next[ea + eb] += ca * cb;
        acc = std::move(next);
    }
    return acc;
}

namespace {

void require_ctx(const ContextPtr& ctx) {
    if (!ctx) fail(ErrorCode::PreconditionFailed, "mass without a ring context");
}

void require_same(const AlgebraicMass& a, const AlgebraicMass& b) {
    if (!a.valid() || !b.valid())
        fail(ErrorCode::ContextMismatch, "operation on an uninitialized mass");
    if (a.context() != b.context() && !a.context()->same_ring(*b.context()))
        fail(ErrorCode::ContextMismatch, "masses live in different rings");
}

} // namespace

AlgebraicMass AlgebraicMass::zero(ContextPtr ctx) {
    require_ctx(ctx);
    AlgebraicMass m;
    m.ctx_ = std::move(ctx);
    m.coeffs_.assign(static_cast<std::size_t>(m.ctx_->min_poly.degree()), Rational(0));
    return m;
}

AlgebraicMass AlgebraicMass::one(ContextPtr ctx) {
    AlgebraicMass m = zero(std::move(ctx));
    m.coeffs_[0] = 1;
    return m;
}

AlgebraicMass AlgebraicMass::from_poly(ContextPtr ctx, const Poly& p) {
    require_ctx(ctx);
    AlgebraicMass m = zero(ctx);
    const Poly rem = poly_divmod(p, ctx->min_poly).second;
    for (std::size_t i = 0; i < rem.c.size(); ++i) m.coeffs_[i] = rem.c[i];
    return m;
}

AlgebraicMass AlgebraicMass::monomial(ContextPtr ctx, long k) {
    require_ctx(ctx);
    if (k < 0) fail(ErrorCode::PreconditionFailed, "negative monomial exponent");
    const std::size_t deg = static_cast<std::size_t>(ctx->min_poly.degree());
    AlgebraicMass m = zero(ctx);
    if (static_cast<std::size_t>(k) < deg) {
        m.coeffs_[static_cast<std::size_t>(k)] = 1;
        return m;
    }
    // iterate x^{deg-1} -> x^k via multiply-by-x with one reduction step each
    std::vector<Rational> v(deg, Rational(0));
    v[deg - 1] = 1;
    const Poly& mp = ctx->min_poly;
    const Rational lc = mp.lc();
    for (long step = static_cast<long>(deg) - 1; step < k; ++step) {
        Rational top = v[deg - 1];
        for (std::size_t i = deg - 1; i > 0; --i) v[i] = v[i - 1];
        v[0] = 0;
        if (top != 0) {
            // x^deg == -(lower terms)/lc
            for (std::size_t i = 0; i < deg; ++i)
                v[i] -= top * mp.c[i] / lc;
        }
    }
    m.coeffs_ = std::move(v);
    return m;
}

AlgebraicMass AlgebraicMass::from_multiset(ContextPtr ctx, const MonomialMultiset& ms) {
    require_ctx(ctx);
    AlgebraicMass acc = zero(ctx);
    for (const auto& [e, count] : ms) {
        if (count == 0) continue;
        AlgebraicMass mono = monomial(ctx, e);
        for (auto& c : mono.coeffs_) c *= Rational(count);
        acc = acc + mono;
    }
    return acc;
}

bool AlgebraicMass::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Rational& c) { return c == 0; });
}

double AlgebraicMass::eval() const {
    double r = 0;
    const double x = ctx_->x_value;
    for (std::size_t i = coeffs_.size(); i-- > 0;) r = r * x + to_double(coeffs_[i]);
    return r;
}

Rational AlgebraicMass::coeff(std::size_t i) const {
    return i < coeffs_.size() ? coeffs_[i] : Rational(0);
}

std::string AlgebraicMass::str() const {
    std::string out;
    bool any = false;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0) continue;
        if (any) out += "+";
        out += "(" + format_rational(coeffs_[i]) + ")";
        if (i == 1) out += "x";
        if (i >= 2) out += "x^" + std::to_string(i);
        any = true;
    }
    return any ? out : "0";
}

AlgebraicMass AlgebraicMass::inverse() const {
    require_ctx(ctx_);
    if (is_zero()) fail(ErrorCode::PreconditionFailed, "inverse of zero mass");
    // extended Euclid in Q[x]: u*min_poly + t*a == gcd == constant
    Poly a;
    a.c = coeffs_;
    a.trim();
    Poly r0 = ctx_->min_poly, r1 = a;
    Poly t0 = Poly::zero(), t1 = Poly::constant(Rational(1));
    while (!r1.is_zero() && r1.degree() > 0) {
        auto [q, r] = poly_divmod(r0, r1);
        Poly t2 = poly_sub(t0, poly_mul(q, t1));
        r0 = std::move(r1);
        r1 = std::move(r);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r1.is_zero())
        fail(ErrorCode::PreconditionFailed, "mass is a zero divisor (reducible modulus?)");
    const Rational unit = r1.c[0];
    Poly inv = poly_scale(t1, Rational(1) / unit);
    return from_poly(ctx_, inv);
}

AlgebraicMass operator+(const AlgebraicMass& a, const AlgebraicMass& b) {
    require_same(a, b);
    AlgebraicMass r = a;
    for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] += b.coeffs_[i];
    return r;
}

AlgebraicMass operator-(const AlgebraicMass& a, const AlgebraicMass& b) {
    require_same(a, b);
    AlgebraicMass r = a;
    for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] -= b.coeffs_[i];
    return r;
}

AlgebraicMass operator*(const AlgebraicMass& a, const AlgebraicMass& b) {
    require_same(a, b);
    Poly pa, pb;
    pa.c = a.coeffs_;
    pb.c = b.coeffs_;
    pa.trim();
    pb.trim();
    return AlgebraicMass::from_poly(a.context(), poly_mul(pa, pb));
}

bool operator==(const AlgebraicMass& a, const AlgebraicMass& b) {
    require_same(a, b);
    return a.coeffs_ == b.coeffs_;
}

bool operator!=(const AlgebraicMass& a, const AlgebraicMass& b) { return !(a == b); }

AlgebraicMass mass_add(const AlgebraicMass& a, const AlgebraicMass& b) { return a + b; }
AlgebraicMass mass_mul(const AlgebraicMass& a, const AlgebraicMass& b) { return a * b; }
bool mass_eq(const AlgebraicMass& a, const AlgebraicMass& b) { return a == b; }

} // namespace selfsim
