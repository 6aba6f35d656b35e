#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "selfsim/algebra.hpp"
#include "selfsim/polynomial.hpp"

using namespace selfsim;
using selfsim::testing::example61_F;
using selfsim::testing::example61_K;

TEST_CASE("ratio root of the example domain system") {
    auto rr = ratio_root(example61_K().ratios());
    CHECK(rr.root == Rational(1, 3));
    CHECK(rr.exponents == std::vector<long>{1, 1, 2, 2});
}

TEST_CASE("ratio root normalizes the exponent gcd") {
    // All ratios are powers of 1/27, so the root is 1/27 with exponents 1 and 2.
    auto rr = ratio_root(example61_F().ratios());
    CHECK(rr.root == Rational(1, 27));
    std::vector<long> exps(20, 1);
    exps.insert(exps.end(), 8, 2);
    CHECK(rr.exponents == exps);
}

TEST_CASE("incommensurable ratios have no common root") {
    CHECK_FALSE(try_ratio_root({Rational(1, 2), Rational(1, 3)}).has_value());
    CHECK(try_ratio_root({Rational(1, 2), Rational(1, 8)}).has_value());
}

TEST_CASE("joint context of the example pair") {
    JointContext jc = build_joint_context(example61_K().ratios(), example61_F().ratios());
    CHECK(jc.ctx->ratio_root == Rational(1, 3));
    CHECK(jc.exponents_a == std::vector<long>{1, 1, 2, 2});
    CHECK(jc.exponents_b[0] == 3);
    CHECK(jc.exponents_b[19] == 3);
    CHECK(jc.exponents_b[20] == 6);
    CHECK(poly_to_string(jc.ctx->min_poly) == "2x^2+2x-1");
    CHECK(jc.ctx->x_value == doctest::Approx(0.36602540378443865).epsilon(1e-14));
    CHECK(jc.ctx->s_value == doctest::Approx(0.9148382455842044).epsilon(1e-10));
}

TEST_CASE("joint context rejects mismatched dimensions") {
    // Both commensurable with root 1/2, but the Moran roots differ.
    CHECK_THROWS_AS((void)build_joint_context({Rational(1, 4), Rational(1, 4)},
                                              {Rational(1, 2), Rational(1, 8)}),
                    Error);
}

TEST_CASE("dimension of the golden-mean system") {
    // 2^-s + 4^-s = 1 has s = log2((1+sqrt(5))/2).
    double s = solve_dimension({Rational(1, 2), Rational(1, 4)});
    CHECK(s == doctest::Approx(0.6942419136306174).epsilon(1e-12));
}

TEST_CASE("masses satisfy the defining identities of the example ring") {
    JointContext jc = build_joint_context(example61_K().ratios(), example61_F().ratios());
    const ContextPtr& ctx = jc.ctx;
    auto mono = [&](long k) { return AlgebraicMass::monomial(ctx, k); };
    const AlgebraicMass one = AlgebraicMass::one(ctx);

    // Moran identities of both systems.
    CHECK(AlgebraicMass::from_multiset(ctx, {{1, 2}, {2, 2}}) == one);
    CHECK(AlgebraicMass::from_multiset(ctx, {{3, 20}, {6, 8}}) == one);

    // Exchange identities used by the partition search.
    CHECK(AlgebraicMass::from_multiset(ctx, {{4, 2}, {5, 2}}) == mono(3));
    CHECK(AlgebraicMass::from_multiset(ctx, {{5, 6}, {6, 4}}) == mono(3));
    CHECK(AlgebraicMass::from_multiset(ctx, {{6, 16}, {7, 12}}) == mono(3));
    CHECK(AlgebraicMass::from_multiset(ctx, {{11, 120}, {12, 88}}) == mono(6));
    CHECK(AlgebraicMass::from_multiset(ctx, {{11, 6}, {12, 4}}) == mono(9));

    CHECK(mono(3) * mono(3) == mono(6));
    CHECK(mono(3).inverse() * mono(3) == one);
    CHECK((one - mono(3)).is_zero() == false);
}

TEST_CASE("expand_power reproduces the cube of the domain letter mass") {
    MonomialMultiset base{{1, 2}, {2, 2}};
    MonomialMultiset cube = expand_power(base, 3);
    MonomialMultiset expect{{3, 8}, {4, 24}, {5, 24}, {6, 8}};
    CHECK(cube == expect);
    MonomialMultiset square = expand_power(base, 2);
    MonomialMultiset expect2{{2, 4}, {3, 8}, {4, 4}};
    CHECK(square == expect2);
}

TEST_CASE("moran power sum replay") {
    // 3^-1 + 3^-1 + 3^-2 + 3^-2 + 3^-2 = 1.
    CHECK(moran_power_sum_is_one(3, {Rational(1), Rational(1), Rational(2), Rational(2),
                                     Rational(2)}));
    // 2^-1 + 2^-2 + 2^-3 + 2^-3 = 1.
    CHECK(moran_power_sum_is_one(2, {Rational(1), Rational(2), Rational(3), Rational(3)}));
    // Fractional exponents force an irrational part, so these are never 1.
    CHECK_FALSE(moran_power_sum_is_one(
        2, {Rational(1, 2), Rational(1, 2), Rational(1, 2)}));
    CHECK_FALSE(moran_power_sum_is_one(2, {Rational(3, 2), Rational(3, 2), Rational(1)}));
}

TEST_CASE("moran power sum rejects bad bases") {
    CHECK_THROWS_AS((void)moran_power_sum_is_one(1, {Rational(1)}), Error);
    CHECK_THROWS_AS((void)moran_power_sum_is_one(4, {Rational(1)}), Error);
    CHECK_THROWS_AS((void)moran_power_sum_is_one(3, {Rational(-1)}), Error);
}

TEST_CASE("integer exponent certificate") {
    IntegerExponentCheck c = verify_integer_exponents(
        3, {Rational(1), Rational(1), Rational(2), Rational(2), Rational(2)});
    CHECK(c.all_integers);
    CHECK(c.exponents == std::vector<Integer>{1, 1, 2, 2, 2});
    // Moran sum must hold first; a violating list is rejected outright.
    CHECK_THROWS_AS((void)verify_integer_exponents(3, {Rational(1), Rational(1)}), Error);
}

TEST_CASE("log rationality") {
    auto q = is_log_rational(Rational(1, 4), Rational(1, 2));
    REQUIRE(q.has_value());
    CHECK(*q == Rational(2));
    CHECK_FALSE(is_log_rational(Rational(1, 3), Rational(1, 2)).has_value());
    auto half = is_log_rational(Rational(1, 2), Rational(1, 4));
    REQUIRE(half.has_value());
    CHECK(*half == Rational(1, 2));
}

TEST_CASE("rational helpers") {
    CHECK(pow_rational(Rational(2, 3), 3) == Rational(8, 27));
    CHECK(pow_rational(Rational(2, 3), -2) == Rational(9, 4));
    auto pp8 = is_perfect_power(Integer(8));
    REQUIRE(pp8.has_value());
    CHECK(pp8->first == 2);
    CHECK(pp8->second == 3);
    auto pp36 = is_perfect_power(Integer(36));
    REQUIRE(pp36.has_value());
    CHECK(pp36->first == 6);
    CHECK(pp36->second == 2);
    CHECK_FALSE(is_perfect_power(Integer(12)).has_value());
    CHECK_FALSE(is_perfect_power(Integer(3)).has_value());
    CHECK(parse_rational("1/3") == Rational(1, 3));
    CHECK(format_rational(Rational(22, 7)) == "22/7");
}
