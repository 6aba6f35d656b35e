#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "selfsim/equivalence.hpp"

using namespace selfsim;
using namespace selfsim::testing;

TEST_CASE("dimension comparison outcomes") {
    DimensionComparison same = compare_dimensions(cantor(), cantor());
    CHECK(same.verdict == DimVerdict::EqualExact);

    // Incommensurable pair with distinct dimensions: log2/log3 vs 1/2.
    DimensionComparison diff = compare_dimensions(cantor(), quarter());
    CHECK(diff.verdict == DimVerdict::DifferentNumeric);

    // Commensurable (root 1/2) but the Moran roots differ: exact dismissal.
    IfsSpec a = make_equal_gap_line_ifs({Rational(1, 4), Rational(1, 4)}, "a");
    IfsSpec b = make_equal_gap_line_ifs({Rational(1, 2), Rational(1, 8)}, "b");
    DimensionComparison de = compare_dimensions(a, b);
    CHECK(de.verdict == DimVerdict::DifferentExact);

    // Equal dimension 1/2 across incommensurable roots: numeric equality.
    IfsSpec c = make_equal_gap_line_ifs(
        {Rational(1, 9), Rational(1, 9), Rational(1, 9)}, "c");
    DimensionComparison en = compare_dimensions(a, c);
    CHECK(en.verdict == DimVerdict::EqualNumeric);
    CHECK(en.s_left == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(en.s_right == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("homogeneous domain certificate with integer exponents") {
    EquivalenceVerdict v = decide_homogeneous_domain(homog_3x9(), f_5map_9_81());
    CHECK(v.status == EqStatus::Equivalent);
    CHECK(v.base == 3);
    CHECK(v.power == 1);
    CHECK(v.exponents_integral);
    CHECK(v.exponents == std::vector<Rational>{Rational(1), Rational(1), Rational(2),
                                               Rational(2), Rational(2)});
    CHECK(v.integer_exponents == std::vector<Integer>{1, 1, 2, 2, 2});
}

TEST_CASE("perfect-power map counts are reduced before replay") {
    // Domain: 4 maps of ratio 1/8, so s = 2/3 and the map count 4 = 2^2 must
    // be reduced to base 2 before the ring replay (y^Q - 4 is reducible).
    IfsSpec domain = make_equal_gap_line_ifs(
        {Rational(1, 8), Rational(1, 8), Rational(1, 8), Rational(1, 8)}, "four-eighth");
    std::vector<Rational> tr(2, Rational(1, 8));
    tr.insert(tr.end(), 8, Rational(1, 64));
    IfsSpec target = make_equal_gap_line_ifs(tr, "mixed-eighth");
    EquivalenceVerdict v = decide_homogeneous_domain(domain, target);
    CHECK(v.status == EqStatus::Equivalent);
    CHECK(v.base == 2);  // 4 maps = 2^2
    CHECK(v.power == 2);
    CHECK(v.exponents_integral);
    CHECK(v.exponents == std::vector<Rational>{Rational(1), Rational(1), Rational(2),
                                               Rational(2), Rational(2), Rational(2),
                                               Rational(2), Rational(2), Rational(2),
                                               Rational(2)});
}

TEST_CASE("non-homogeneous domain yields no decision") {
    EquivalenceVerdict v = decide_homogeneous_domain(example61_K(), example61_F());
    CHECK(v.status == EqStatus::Unknown);
    CHECK_FALSE(v.note.empty());
}

TEST_CASE("irrational ratio logarithms yield no decision") {
    // Domain 2 x 1/4 has s = 1/2; target 3 x 1/9 has s = 1/2 as well, but
    // log(1/9)/log(1/4) is irrational so no mass certificate exists.
    EquivalenceVerdict v = decide_homogeneous_domain(quarter(), homog_3x9());
    CHECK(v.status == EqStatus::Unknown);
    CHECK(v.note.find("1/9") != std::string::npos);
}

TEST_CASE("dimension mismatch aborts the domain-side decision") {
    IfsSpec a = make_equal_gap_line_ifs({Rational(1, 4), Rational(1, 4)}, "a");
    IfsSpec b = make_equal_gap_line_ifs({Rational(1, 2), Rational(1, 8)}, "b");
    CHECK_THROWS_AS((void)decide_homogeneous_domain(a, b), Error);
}

TEST_CASE("embedding hypothesis dispatch") {
    EquivalenceVerdict v = decide_with_embedding_hypothesis(
        homog_3x9(), f_5map_9_81(), Hypothesis::HomogeneousDomain);
    CHECK(v.status == EqStatus::Equivalent);
    CHECK(v.hypothesis_used == Hypothesis::HomogeneousDomain);

    EquivalenceVerdict w = decide_with_embedding_hypothesis(
        f_5map_9_81(), homog_3x9(), Hypothesis::HomogeneousTarget);
    CHECK(w.status == EqStatus::Equivalent);
    CHECK(w.hypothesis_used == Hypothesis::HomogeneousTarget);

    CHECK_THROWS_AS((void)decide_with_embedding_hypothesis(
                        example61_K(), example61_F(), Hypothesis::HomogeneousDomain),
                    Error);
}

TEST_CASE("hypothesis flags an inconsistency when no certificate exists") {
    EquivalenceVerdict v = decide_with_embedding_hypothesis(
        quarter(), homog_3x9(), Hypothesis::HomogeneousDomain);
    CHECK(v.status == EqStatus::Unknown);
    CHECK(v.inconsistency);
}

TEST_CASE("the recorded counterexample pair is never equivalent") {
    EquivalenceVerdict v = decide(example61_K(), example61_F(), std::nullopt);
    CHECK(v.status == EqStatus::NotEquivalentExternal);
    CHECK(v.citation.find("Xi") != std::string::npos);
    CHECK(v.dimension_check.verdict == DimVerdict::EqualExact);

    EquivalenceVerdict rev = decide(example61_F(), example61_K(), std::nullopt);
    CHECK(rev.status == EqStatus::NotEquivalentExternal);
}

TEST_CASE("distinct dimensions give unknown with an explanation") {
    EquivalenceVerdict v = decide(cantor(), quarter(), std::nullopt);
    CHECK(v.status == EqStatus::Unknown);
    CHECK(v.note.find("dimension") != std::string::npos);
}

TEST_CASE("decide dispatches to the homogeneous side") {
    EquivalenceVerdict v = decide(homog_3x9(), f_5map_9_81(), std::nullopt);
    CHECK(v.status == EqStatus::Equivalent);
    // Homogeneous side on the right works as well.
    EquivalenceVerdict w = decide(f_5map_9_81(), homog_3x9(), std::nullopt);
    CHECK(w.status == EqStatus::Equivalent);
}

TEST_CASE("decide on two non-homogeneous commensurable systems stays unknown") {
    // {1/3,1/9} vs {1/9,1/3}: same multiset, trivially same dimension, but
    // neither side is homogeneous and no external fact matches.
    IfsSpec a = make_equal_gap_line_ifs({Rational(1, 3), Rational(1, 9)}, "a");
    IfsSpec b = make_equal_gap_line_ifs({Rational(1, 9), Rational(1, 3)}, "b");
    EquivalenceVerdict v = decide(a, b, std::nullopt);
    CHECK(v.status == EqStatus::Unknown);
}

TEST_CASE("verdict serialization") {
    EquivalenceVerdict v = decide(homog_3x9(), f_5map_9_81(), std::nullopt);
    std::string js = verdict_to_json(v);
    CHECK(js.find("\"status\": \"Equivalent\"") != std::string::npos);
    CHECK(js.find("\"exponents_integral\": true") != std::string::npos);

    std::string neq = verdict_to_json(decide(example61_K(), example61_F(), std::nullopt));
    CHECK(neq.find("NotEquivalentExternal") != std::string::npos);
    CHECK(neq.find("Xi") != std::string::npos);
}
