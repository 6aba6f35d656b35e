#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selfsim/polynomial.hpp"
#include "selfsim/rational.hpp"

namespace selfsim {

// ---------------------------------------------------------------------------
// Dimension and commensurability
// ---------------------------------------------------------------------------

// Unique s > 0 with sum r_i^s = 1.  Requires >= 2 ratios, each in (0,1).
double solve_dimension(const std::vector<Rational>& ratios, double tol = 1e-12);

struct RatioRoot {
    Rational root;               // largest r in (0,1) with every ratio a power of r
    std::vector<long> exponents; // ratios[i] == root^exponents[i]; gcd of all == 1
};

RatioRoot ratio_root(const std::vector<Rational>& ratios); // throws NotCommensurable
std::optional<RatioRoot> try_ratio_root(const std::vector<Rational>& ratios);

// log(a)/log(b) as an exact rational, or nullopt when irrational.  a, b in (0,1).
std::optional<Rational> is_log_rational(const Rational& a, const Rational& b);

struct IntegerExponentCheck {
    bool all_integers = false;
    std::vector<Integer> exponents; // filled when all_integers
};

// Preconditions (verified exactly): m >= 2 and not a perfect power; all alphas > 0;
// sum_j m^{-alpha_j} == 1.  Returns whether every alpha_j is an integer.
IntegerExponentCheck verify_integer_exponents(const Integer& m, const std::vector<Rational>& alphas);

// Exact test of sum_j m^{-alpha_j} == 1 in Z[y]/(y^Q - m), Q = lcm of the
// alpha denominators.  Requires m >= 2 not a perfect power (so y^Q - m is the
// minimal polynomial of m^{1/Q}) and positive alphas; throws otherwise.
bool moran_power_sum_is_one(const Integer& m, const std::vector<Rational>& alphas);

// ---------------------------------------------------------------------------
// The coefficient ring for exact mass arithmetic
// ---------------------------------------------------------------------------

// Everything needed to compute with x = root^s exactly, where s is the
// similarity dimension of a commensurable ratio list.
struct MoranContext {
    Rational ratio_root;
    std::vector<long> exponents; // letter exponents a_i w.r.t. ratio_root
    Poly moran_poly;             // sum_i x^{a_i} - 1, integer coefficients
    Poly min_poly;               // minimal polynomial of the root of moran_poly in (0,1)
    Rational x_lo, x_hi;         // isolating interval for that root
    double x_value = 0;          // numeric value of x
    double s_value = 0;          // x = ratio_root^{s}

    bool same_ring(const MoranContext& other) const;
};

using ContextPtr = std::shared_ptr<const MoranContext>;

ContextPtr build_context(const std::vector<Rational>& ratios, double tol = 1e-12);

// Joint ring for a pair of systems: common ratio root across both ratio lists,
// minimal polynomial derived from the first list's relation, and the second
// list's relation verified to hold in the same ring (else DimensionMismatch).
struct JointContext {
    ContextPtr ctx;
    std::vector<long> exponents_a;
    std::vector<long> exponents_b;
};

JointContext build_joint_context(const std::vector<Rational>& ratios_a,
                                 const std::vector<Rational>& ratios_b,
                                 double tol = 1e-12);

// ---------------------------------------------------------------------------
// Ring elements
// ---------------------------------------------------------------------------

// Exponent -> multiplicity; a formal nonnegative-integer combination of monomials x^e.
using MonomialMultiset = std::map<long, Integer>;

// (sum of monomials)^k expanded without reduction.
MonomialMultiset expand_power(const MonomialMultiset& base, unsigned k);

class AlgebraicMass {
public:
    AlgebraicMass() = default;

    static AlgebraicMass zero(ContextPtr ctx);
    static AlgebraicMass one(ContextPtr ctx);
    static AlgebraicMass monomial(ContextPtr ctx, long k); // x^k reduced, k >= 0
    static AlgebraicMass from_poly(ContextPtr ctx, const Poly& p);
    static AlgebraicMass from_multiset(ContextPtr ctx, const MonomialMultiset& m);

    const std::vector<Rational>& coeffs() const { return coeffs_; }
    const ContextPtr& context() const { return ctx_; }
    bool valid() const { return ctx_ != nullptr; }
    bool is_zero() const;
    double eval() const;       // numeric value at x = ctx->x_value
    Rational coeff(std::size_t i) const;
    std::string str() const;   // e.g. "(-1/2)+(3/2)x"

    AlgebraicMass inverse() const; // field inverse; nonzero required

    friend AlgebraicMass operator+(const AlgebraicMass& a, const AlgebraicMass& b);
    friend AlgebraicMass operator-(const AlgebraicMass& a, const AlgebraicMass& b);
    friend AlgebraicMass operator*(const AlgebraicMass& a, const AlgebraicMass& b);
    friend bool operator==(const AlgebraicMass& a, const AlgebraicMass& b);
    friend bool operator!=(const AlgebraicMass& a, const AlgebraicMass& b);

private:
    ContextPtr ctx_;
    std::vector<Rational> coeffs_; // size == deg(min_poly), basis 1, x, ..., x^{deg-1}
};

// Spec-facing aliases.
AlgebraicMass mass_add(const AlgebraicMass& a, const AlgebraicMass& b);
AlgebraicMass mass_mul(const AlgebraicMass& a, const AlgebraicMass& b);
bool mass_eq(const AlgebraicMass& a, const AlgebraicMass& b);

} // namespace selfsim
