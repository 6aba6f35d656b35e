#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "selfsim/massdecomp.hpp"

using namespace selfsim;
using namespace selfsim::testing;

namespace {

PairSystem example_pair() { return make_pair_system(example61_K(), example61_F()); }

PairSystem cantor_pair() { return make_pair_system(cantor(), cantor()); }

std::vector<AlgebraicMass> level1_targets(const PairSystem& psys) {
    Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1);
    std::vector<AlgebraicMass> t;
    for (const Word& w : j1.words)
        t.push_back(AlgebraicMass::monomial(psys.joint, word_exponent(psys.target_exps, w)));
    return t;
}

} // namespace

TEST_CASE("base group partition of the worked example") {
    PairSystem psys = example_pair();
    const ContextPtr& ctx = psys.joint;
    // Length-3 domain words have exponent histogram {3:8, 4:24, 5:24, 6:8}.
    MonomialMultiset pool = expand_power({{1, 2}, {2, 2}}, 3);
    std::vector<AlgebraicMass> targets = level1_targets(psys);
    REQUIRE(targets.size() == 28);

    GroupAssignment ga = group_partition(ctx, pool, targets);
    REQUIRE(ga.counts.size() == 28);

    MonomialMultiset used;
    int mass_x3 = 0, mass_x6 = 0;
    for (std::size_t t = 0; t < ga.counts.size(); ++t) {
        AlgebraicMass got = AlgebraicMass::from_multiset(ctx, ga.counts[t]);
        CHECK(got == targets[t]);
        if (targets[t] == AlgebraicMass::monomial(ctx, 3)) ++mass_x3;
        if (targets[t] == AlgebraicMass::monomial(ctx, 6)) ++mass_x6;
        for (const auto& [e, c] : ga.counts[t]) used[e] += c;
    }
    CHECK(mass_x3 == 20);
    CHECK(mass_x6 == 8);
    CHECK(used == pool); // exact totality, nothing left over
}

TEST_CASE("partition can be infeasible with matching totals") {
    PairSystem psys = example_pair();
    const ContextPtr& ctx = psys.joint;
    // Pool x + x + x^2 + x^2 has total mass 1; no subset sums to x^3.
    MonomialMultiset pool{{1, 2}, {2, 2}};
    AlgebraicMass x3 = AlgebraicMass::monomial(ctx, 3);
    AlgebraicMass rest = AlgebraicMass::one(ctx) - x3;
    CHECK_FALSE(try_group_partition(ctx, pool, {x3, rest}).has_value());
    CHECK_THROWS_AS((void)group_partition(ctx, pool, {x3, rest}), Error);
}

TEST_CASE("materialized groups take lexicographic fronts") {
    PairSystem psys = cantor_pair();
    const ContextPtr& ctx = psys.joint;
    // Pool: the four length-2 words, all mass x^2; two targets of mass x each.
    Cut i2 = stopping_cut(psys.source.spec, psys.delta, 2);
    MonomialMultiset hist = exponent_histogram(psys.source_exps, i2.words);
    std::vector<AlgebraicMass> targets(2, AlgebraicMass::monomial(ctx, 1));
    GroupAssignment ga = group_partition(ctx, hist, targets);
    auto groups = materialize_groups(ga, i2.words, psys.source_exps);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<Word>{w({1, 1}), w({1, 2})});
    CHECK(groups[1] == std::vector<Word>{w({2, 1}), w({2, 2})});
}

TEST_CASE("decompose identity short-circuit keeps the source") {
    PairSystem psys = cantor_pair();
    std::vector<Word> src{w({2, 1}), w({1, 2})}; // deliberately unsorted
    AlgebraicMass total = cut_mass(psys.joint, psys.source_exps, src);
    auto groups = decompose(psys, src, 5, {total});
    REQUIRE(groups.size() == 1);
    CHECK(groups[0] == std::vector<Word>{w({1, 2}), w({2, 1})}); // sorted, not refined
}

TEST_CASE("decompose refines and splits exactly") {
    PairSystem psys = cantor_pair();
    const ContextPtr& ctx = psys.joint;
    Cut i1 = stopping_cut(psys.source.spec, psys.delta, 1);
    std::vector<AlgebraicMass> targets(4, AlgebraicMass::monomial(ctx, 2));
    auto groups = decompose(psys, i1.words, 2, targets);
    REQUIRE(groups.size() == 4);
    for (const auto& g : groups) CHECK(g.size() == 1);
    CHECK(groups[0][0] == w({1, 1}));
    CHECK(groups[3][0] == w({2, 2}));
}

TEST_CASE("decompose rejects mass mismatch and overlapping sources") {
    PairSystem psys = cantor_pair();
    const ContextPtr& ctx = psys.joint;
    Cut i1 = stopping_cut(psys.source.spec, psys.delta, 1);
    CHECK_THROWS_AS(
        (void)decompose(psys, i1.words, 2, {AlgebraicMass::monomial(ctx, 1)}), Error);
    std::vector<Word> overlapping{w({1}), w({1, 2})};
    CHECK_THROWS_AS(
        (void)decompose(psys, overlapping, 2,
                        {cut_mass(ctx, psys.source_exps, overlapping)}),
        Error);
}

TEST_CASE("base length of the worked example is three") {
    PairSystem psys = example_pair();
    CHECK(find_base_length(psys) == 3);
}

TEST_CASE("base length of the identity pair is one") {
    PairSystem psys = cantor_pair();
    CHECK(find_base_length(psys) == 1);
}

TEST_CASE("minimal step constant on the identity pair") {
    PairSystem psys = cantor_pair();
    FindCResult fc = find_min_c(psys, 2);
    CHECK(fc.c == 1);
    CHECK(fc.forced_lower_bound == 1);
    CHECK(fc.base_length == 1);
}

TEST_CASE("minimal step constant on the worked example") {
    PairSystem psys = example_pair();
    FindCResult fc = find_min_c(psys, 2);
    // Forced bound: level-1 groups sit at source cut 1+c and must absorb a
    // base cell of exponent up to (base_length)*2; crossing demands
    // (h-1)*max_exponent = 4, and c = 4 is feasible at every horizon here.
    CHECK(fc.base_length == 3);
    CHECK(fc.forced_lower_bound == 4);
    CHECK(fc.c == 4);
}

TEST_CASE("step constant search respects the cap") {
    PairSystem psys = example_pair();
    Limits lim;
    lim.c_max = 3; // below the forced lower bound
    CHECK_THROWS_AS((void)find_min_c(psys, 2, lim), Error);
}

TEST_CASE("level construction on the worked example") {
    PairSystem psys = example_pair();
    BuildResult br = build_levels(psys, 5, 1);
    CHECK(br.step_c == 5);
    CHECK(br.base_length == 3);
    REQUIRE(br.levels.size() == 1);
    const TreeLevel& l1 = br.levels[0];
    CHECK(l1.target_cut_level == 1);
    CHECK(l1.source_cut_level == 6);
    REQUIRE(l1.rows.size() == 28);

    Cut i6 = stopping_cut(psys.source.spec, psys.delta, 6);
    std::size_t covered = 0;
    for (const TreeRow& row : l1.rows) {
        CHECK(std::is_sorted(row.group.begin(), row.group.end()));
        CHECK(row.parent == -1);
        AlgebraicMass got = cut_mass(psys.joint, psys.source_exps, row.group);
        AlgebraicMass want = AlgebraicMass::monomial(
            psys.joint, word_exponent(psys.target_exps, row.target));
        CHECK(got == want);
        covered += row.group.size();
    }
    CHECK(covered == i6.words.size());
}

TEST_CASE("two levels stay consistent") {
    PairSystem psys = example_pair();
    BuildResult br = build_levels(psys, 5, 2);
    REQUIRE(br.levels.size() == 2);
    const TreeLevel& l1 = br.levels[0];
    const TreeLevel& l2 = br.levels[1];
    CHECK(l2.target_cut_level == 6);
    CHECK(l2.source_cut_level == 11);
    REQUIRE(l2.rows.size() == 568);
    std::size_t total = 0;
    for (const TreeRow& row : l2.rows) {
        REQUIRE(row.parent >= 0);
        REQUIRE(static_cast<std::size_t>(row.parent) < l1.rows.size());
        const TreeRow& parent = l1.rows[static_cast<std::size_t>(row.parent)];
        // Child target extends its parent target.
        CHECK(row.target.compare(0, parent.target.size(), parent.target) == 0);
        total += row.group.size();
    }
    CHECK(total == 86464); // size of the domain cut at level 11
}
