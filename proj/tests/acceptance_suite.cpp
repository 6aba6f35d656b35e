// Acceptance gate: one [PASS]/[FAIL] line per numbered criterion, with pinned
// values and per-criterion wall-clock budgets.  Exit code = number of
// failures.  Usage: acceptance_suite [--criterion N]
//
// Criterion 4 pins an advertised constant (minimal step c = 5, forced lower
// bound 5) that the library's independently verified arithmetic contradicts;
// it is expected to fail and the divergence is documented in the README.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfsim/equivalence.hpp"
#include "selfsim/massdecomp.hpp"
#include "selfsim/surjection.hpp"

using namespace selfsim;

namespace {

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

IfsSpec example61_K() {
    return make_equal_gap_line_ifs(
        {Rational(1, 3), Rational(1, 3), Rational(1, 9), Rational(1, 9)}, "example61-K");
}

IfsSpec example61_F() {
    std::vector<Rational> r(20, Rational(1, 27));
    r.insert(r.end(), 8, Rational(1, 729));
    return make_equal_gap_line_ifs(r, "example61-F");
}

const PairSystem& example_pair() {
    static PairSystem psys = make_pair_system(example61_K(), example61_F());
    return psys;
}

const PartitionTree& example_tree_c5() {
    static PartitionTree tree = build_partition_tree(example_pair(), 2, 5);
    return tree;
}

struct Check {
    bool ok = true;
    std::ostringstream log;
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            if (!ok) log << "; ";
            ok = false;
            log << what;
        }
    }
};

// ---------------------------------------------------------------------------
// Criterion 1: dimension equality, exact and numeric
// ---------------------------------------------------------------------------

void c1(Check& c) {
    JointContext jc = build_joint_context(example61_K().ratios(), example61_F().ratios());
    const ContextPtr& ctx = jc.ctx;
    const AlgebraicMass one = AlgebraicMass::one(ctx);
    c.expect(AlgebraicMass::from_multiset(ctx, {{1, 2}, {2, 2}}) == one,
             "2x^2+2x != 1 in the quotient ring");
    c.expect(AlgebraicMass::from_multiset(ctx, {{3, 20}, {6, 8}}) == one,
             "8x^6+20x^3 != 1 in the quotient ring");
    const double sk = solve_dimension(example61_K().ratios());
    const double sf = solve_dimension(example61_F().ratios());
    c.expect(std::abs(sk - sf) < 1e-10, "numeric dimensions disagree");
    const double moran = 20.0 * std::pow(3.0, -3.0 * sf) + 8.0 * std::pow(3.0, -6.0 * sf);
    c.expect(std::abs(moran - 1.0) < 1e-10, "20*3^-3s + 8*3^-6s misses 1 beyond 1e-10");
    c.log << "s = " << sk;
}

// ---------------------------------------------------------------------------
// Criterion 2: expansion identity
// ---------------------------------------------------------------------------

void c2(Check& c) {
    MonomialMultiset cube = expand_power({{1, 2}, {2, 2}}, 3);
    MonomialMultiset expect{{3, 8}, {4, 24}, {5, 24}, {6, 8}};
    c.expect(cube == expect, "(2x^2+2x)^3 != 8x^6+24x^5+24x^4+8x^3");
    c.log << "(2x^2+2x)^3 expands to 8x^6+24x^5+24x^4+8x^3";
}

// ---------------------------------------------------------------------------
// Criterion 3: base group partition
// ---------------------------------------------------------------------------

void c3(Check& c) {
    const PairSystem& psys = example_pair();
    const ContextPtr& ctx = psys.joint;
    c.expect(AlgebraicMass::from_multiset(ctx, {{4, 2}, {5, 2}}) ==
                 AlgebraicMass::monomial(ctx, 3),
             "exchange identity 2x^5+2x^4 = x^3 fails");

    MonomialMultiset pool = expand_power({{1, 2}, {2, 2}}, 3);
    Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1);
    std::vector<AlgebraicMass> targets;
    for (const Word& w : j1.words)
        targets.push_back(
            AlgebraicMass::monomial(psys.joint, word_exponent(psys.target_exps, w)));

    GroupAssignment ga = group_partition(ctx, pool, targets);
    int n3 = 0, n6 = 0;
    MonomialMultiset used;
    for (std::size_t t = 0; t < ga.counts.size(); ++t) {
        const AlgebraicMass got = AlgebraicMass::from_multiset(ctx, ga.counts[t]);
        c.expect(got == targets[t], "group " + std::to_string(t) + " mass mismatch");
        if (targets[t] == AlgebraicMass::monomial(ctx, 3)) ++n3;
        if (targets[t] == AlgebraicMass::monomial(ctx, 6)) ++n6;
        for (const auto& [e, k] : ga.counts[t]) used[e] += k;
    }
    c.expect(n3 == 20, "expected 20 groups of mass x^3");
    c.expect(n6 == 8, "expected 8 groups of mass x^6");
    c.expect(used == pool, "groups do not exhaust the pool");
    c.log << "28 groups, masses exact";
}

// ---------------------------------------------------------------------------
// Criterion 4: minimal step constant (advertised c = 5, forced bound 5)
// ---------------------------------------------------------------------------

void c4(Check& c) {
    FindCResult fc = find_min_c(example_pair(), 2);
    c.expect(fc.forced_lower_bound == 5,
             "advertised forced lower bound 5; computed " +
                 std::to_string(fc.forced_lower_bound) +
                 " (= (base_length-1) * max letter exponent = 2*2)");
    c.expect(fc.c >= 5, "advertised minimal c >= 5; search finds c = " +
                            std::to_string(fc.c) +
                            " feasible (every level admits an exact partition)");
    c.log << (c.ok ? "" : "; ") << "base_length = " << fc.base_length
          << ", forced bound = " << fc.forced_lower_bound << ", c = " << fc.c;
}

// ---------------------------------------------------------------------------
// Criterion 5: depth-2 partition tree verified end to end
// ---------------------------------------------------------------------------

void c5(Check& c) {
    const PairSystem& psys = example_pair();
    const PartitionTree& tree = example_tree_c5();
    c.expect(tree.step_c == 5, "tree was not built at step 5");
    c.expect(tree.levels.size() == 2, "tree depth != 2");
    c.expect(tree.levels[1].source_cut_level == 11, "deep source cut != 11");
    std::size_t words = 0;
    for (const TreeRow& row : tree.levels[1].rows) words += row.group.size();
    c.expect(words == 86464, "level-2 groups should cover the 86464-word cut");
    for (int k = 1; k <= 2; ++k) {
        c.expect(verify_surjective(tree, psys, k),
                 "surjectivity verification failed at level " + std::to_string(k));
        LinearityReport lin = check_measure_linearity(tree, psys, k);
        c.expect(lin.linear && lin.constant_is_one,
                 "mass linearity with constant 1 failed at level " + std::to_string(k));
        c.expect(lin.c_tilde == "(1)", "c~ != 1 at level " + std::to_string(k));
        c.expect(check_almost_injectivity(tree, psys, k).almost_injective,
                 "almost-injectivity failed at level " + std::to_string(k));
    }
    const char* stress = std::getenv("SELFSIM_STRESS");
    if (stress && *stress && std::strcmp(stress, "0") != 0) {
        PartitionTree deep = build_partition_tree(psys, 3, 5);
        c.expect(verify_surjective(deep, psys, 3), "depth-3 surjectivity failed");
        LinearityReport lin3 = check_measure_linearity(deep, psys, 3);
        c.expect(lin3.linear && lin3.constant_is_one, "depth-3 linearity failed");
        std::size_t w3 = 0;
        for (const TreeRow& row : deep.levels[2].rows) w3 += row.group.size();
        c.log << "depth-3 stress: " << w3 << " words verified; ";
    } else {
        c.log << "depth-3 stress skipped (set SELFSIM_STRESS=1); ";
    }
    c.log << "86464 level-2 words verified";
}

// ---------------------------------------------------------------------------
// Criterion 6: Lipschitz sampling stability across depths
// ---------------------------------------------------------------------------

void c6(Check& c) {
    const PairSystem& psys = example_pair();
    const PartitionTree& tree = example_tree_c5();
    const std::uint64_t seed = 20260816;
    LipschitzReport r1 = estimate_lipschitz(tree, psys, 1, 10000, seed);
    LipschitzReport r2 = estimate_lipschitz(tree, psys, 2, 10000, seed);
    c.expect(r1.exact_numerator_ok, "a depth-1 pair violates the separation bound");
    c.expect(r2.exact_numerator_ok, "a depth-2 pair violates the separation bound");
    c.expect(std::isfinite(r1.sampled_max) && r1.sampled_max > 0, "degenerate depth-1 max");
    c.expect(std::isfinite(r2.sampled_max) && r2.sampled_max > 0, "degenerate depth-2 max");
    const double ratio = r1.sampled_max / r2.sampled_max;
    c.expect(ratio >= 2.0 / 3.0 && ratio <= 1.5,
             "depth-1/depth-2 maxima ratio " + std::to_string(ratio) +
                 " outside [2/3, 3/2]");
    // The exact suprema show the window cannot hold for any sampling outcome:
    // the finite-depth maximum grows with depth (the target cut lags the
    // source cut by c levels, so refining one level rescales the worst
    // consecutive pair by more than 3/2).
    ExactSupResult s1 = exact_lipschitz_sup(tree, psys, 1);
    ExactSupResult s2 = exact_lipschitz_sup(tree, psys, 2);
    c.log << (c.ok ? "" : "; ") << "max@1 = " << r1.sampled_max
          << ", max@2 = " << r2.sampled_max << ", ratio = " << ratio
          << "; exact sup@1 = " << format_rational(Rational(s1.numerator / s1.denominator))
          << " = " << s1.sup
          << ", exact sup@2 = " << format_rational(Rational(s2.numerator / s2.denominator))
          << " = " << s2.sup << ", exact ratio = " << s1.sup / s2.sup;
}

// ---------------------------------------------------------------------------
// Criterion 7: equivalence certificates and the recorded counterexample
// ---------------------------------------------------------------------------

void c7(Check& c) {
    IfsSpec k = make_equal_gap_line_ifs(
        {Rational(1, 9), Rational(1, 9), Rational(1, 9)}, "homogeneous-3x9");
    std::vector<Rational> fr{Rational(1, 9), Rational(1, 9), Rational(1, 81),
                             Rational(1, 81), Rational(1, 81)};
    IfsSpec f = make_equal_gap_line_ifs(fr, "five-map-9-81");
    EquivalenceVerdict v = decide_homogeneous_domain(k, f);
    c.expect(v.status == EqStatus::Equivalent, "homogeneous-domain decision not Equivalent");
    c.expect(v.exponents_integral, "exponents not integral");
    c.expect(v.exponents == std::vector<Rational>{Rational(1), Rational(1), Rational(2),
                                                  Rational(2), Rational(2)},
             "exponents differ from (1,1,2,2,2)");

    IfsSpec a = example61_K(), b = example61_F();
    c.expect(decide(a, b, std::nullopt).status == EqStatus::NotEquivalentExternal,
             "Example pair not flagged by the external record");
    c.expect(decide(b, a, std::nullopt).status == EqStatus::NotEquivalentExternal,
             "reversed pair not flagged");
    c.expect(decide_homogeneous_domain(a, b).status != EqStatus::Equivalent,
             "domain-side path claims Equivalent");
    c.expect(decide_homogeneous_domain(b, a).status != EqStatus::Equivalent,
             "reversed domain-side path claims Equivalent");
    bool hyp_rejected = false;
    try {
        (void)decide_with_embedding_hypothesis(a, b, Hypothesis::HomogeneousDomain);
    } catch (const Error& e) {
        hyp_rejected = e.code() == ErrorCode::HypothesisNotApplicable;
    }
    c.expect(hyp_rejected, "inapplicable hypothesis was not rejected");
    c.log << "certificate (1,1,2,2,2) exact; counterexample pair never Equivalent";
}

// ---------------------------------------------------------------------------
// Criterion 8: decomposition feasibility against a brute-force oracle
// ---------------------------------------------------------------------------

bool brute_force_feasible(const ContextPtr& ctx, const std::vector<long>& exps,
                          const std::vector<AlgebraicMass>& targets) {
    const std::size_t n = exps.size(), t = targets.size();
    std::vector<AlgebraicMass> rem = targets;
    std::vector<std::size_t> assigned(n, 0);
    std::function<bool(std::size_t)> dfs = [&](std::size_t i) -> bool {
        if (i == n) {
            for (const auto& r : rem)
                if (!r.is_zero()) return false;
            return true;
        }
        // Words with equal exponents are interchangeable: force non-decreasing
        // target indices within a run to skip symmetric assignments.
        std::size_t min_k = (i > 0 && exps[i] == exps[i - 1]) ? assigned[i - 1] : 0;
        for (std::size_t k = min_k; k < t; ++k) {
            const AlgebraicMass mono = AlgebraicMass::monomial(ctx, exps[i]);
            rem[k] = rem[k] - mono;
            assigned[i] = k;
            if (dfs(i + 1)) return true;
            rem[k] = rem[k] + mono;
        }
        return false;
    };
    return dfs(0);
}

void c8(Check& c) {
    const PairSystem& psys = example_pair();
    const ContextPtr& ctx = psys.joint;
    std::mt19937_64 rng(123);

    // All length-3 domain words, lexicographic.
    std::vector<Word> all3;
    for (char a = 0; a < 4; ++a)
        for (char b = 0; b < 4; ++b)
            for (char d = 0; d < 4; ++d) all3.push_back(Word{a, b, d});

    int feasible_seen = 0, infeasible_seen = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const bool three = inst % 3 == 2;
        const std::size_t nwords =
            three ? 4 + rng() % 7 : 4 + rng() % 9; // <= 10 for three targets
        std::vector<Word> pool = all3;
        for (std::size_t i = 0; i + 1 < pool.size(); ++i)
            std::swap(pool[i], pool[i + rng() % (pool.size() - i)]);
        pool.resize(nwords);
        std::sort(pool.begin(), pool.end());
        std::vector<long> exps;
        for (const Word& w : pool) exps.push_back(word_exponent(psys.source_exps, w));
        const AlgebraicMass total = cut_mass(ctx, psys.source_exps, pool);
        const std::size_t ntargets = three ? 3 : 2;

        std::vector<AlgebraicMass> targets;
        if (inst % 2 == 0) {
            // Split the pool itself: feasible by construction.
            std::vector<AlgebraicMass> parts(ntargets, AlgebraicMass::zero(ctx));
            for (std::size_t i = 0; i < pool.size(); ++i) {
                std::size_t k = i < ntargets ? i : rng() % ntargets; // each part nonempty
                parts[k] = parts[k] + AlgebraicMass::monomial(ctx, exps[i]);
            }
            targets = parts;
        } else {
            // Random monomial demands with the exact total: often infeasible.
            AlgebraicMass acc = AlgebraicMass::zero(ctx);
            for (std::size_t k = 0; k + 1 < ntargets; ++k) {
                AlgebraicMass t = AlgebraicMass::zero(ctx);
                const int m = 1 + static_cast<int>(rng() % 3);
                for (int j = 0; j < m; ++j)
                    t = t + AlgebraicMass::monomial(ctx, 3 + static_cast<long>(rng() % 4));
                targets.push_back(t);
                acc = acc + t;
            }
            targets.push_back(total - acc);
        }

        bool lib_feasible = true;
        std::vector<std::vector<Word>> groups;
        try {
            groups = decompose(psys, pool, 0, targets);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Infeasible) throw;
            lib_feasible = false;
        }
        const bool oracle = brute_force_feasible(ctx, exps, targets);
        c.expect(lib_feasible == oracle,
                 "instance " + std::to_string(inst) + ": decompose says " +
                     (lib_feasible ? "feasible" : "infeasible") + ", oracle says " +
                     (oracle ? "feasible" : "infeasible"));
        if (lib_feasible) {
            ++feasible_seen;
            for (std::size_t g = 0; g < groups.size(); ++g)
                c.expect(cut_mass(ctx, psys.source_exps, groups[g]) == targets[g],
                         "instance " + std::to_string(inst) + ": group mass mismatch");
        } else {
            ++infeasible_seen;
        }
        if (!c.ok) break;
    }
    c.expect(feasible_seen >= 10 && infeasible_seen >= 10,
             "generator degenerate: " + std::to_string(feasible_seen) + " feasible / " +
                 std::to_string(infeasible_seen) + " infeasible");
    c.log << feasible_seen << " feasible + " << infeasible_seen
          << " infeasible instances, verdicts all matched";
}

// ---------------------------------------------------------------------------
// Criterion 9: stopping-cut invariants on random commensurable systems
// ---------------------------------------------------------------------------

void c9(Check& c) {
    std::mt19937_64 rng(77);
    int systems = 0, cuts = 0;
    while (systems < 50) {
        const long p = std::vector<long>{2, 3, 5}[rng() % 3];
        const std::size_t nmaps = 2 + rng() % 4;
        std::vector<Rational> ratios;
        Rational sum(0);
        for (std::size_t i = 0; i < nmaps; ++i) {
            const long e = 1 + static_cast<long>(rng() % 3);
            Rational r = pow_rational(Rational(1, p), e);
            ratios.push_back(r);
            sum = Rational(sum + r);
        }
        if (!(sum < Rational(1))) continue; // equal-gap layout needs slack
        ++systems;
        IfsSpec spec = make_equal_gap_line_ifs(ratios, "random");
        ContextPtr ctx = build_context(ratios);
        const Rational delta = ctx->ratio_root;
        auto exps = letter_exponents(spec, delta);
        c.expect(exps.has_value(), "letter exponents missing for a commensurable system");
        if (!exps) return;
        double rmin = 1.0;
        for (const Rational& r : ratios) rmin = std::min(rmin, to_double(r));
        const double s = ctx->s_value;
        const double dd = to_double(delta);
        for (long n = 1; n <= 4; ++n) {
            Cut cut = stopping_cut(spec, delta, n);
            ++cuts;
            c.expect(cut_mass(ctx, *exps, cut.words) == AlgebraicMass::one(ctx),
                     "cut mass != 1 at level " + std::to_string(n));
            const double count = static_cast<double>(cut.words.size());
            const double lo = std::pow(rmin, s) * std::pow(dd, -static_cast<double>(n) * s);
            const double hi = std::pow(dd, -static_cast<double>(n) * s) / std::pow(rmin, s);
            c.expect(count >= lo * (1 - 1e-9) && count <= hi * (1 + 1e-9),
                     "cut cardinality " + std::to_string(cut.words.size()) +
                         " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "] at level " + std::to_string(n));
        }
        if (!c.ok) return;
    }
    c.log << systems << " systems, " << cuts << " cuts: mass exact, cardinality in bounds";
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    void (*fn)(Check&);
};

const Criterion kCriteria[] = {
    {1, "dimension equality, exact ring identities and numeric root", 1.0, c1},
    {2, "cube expansion of the letter mass", 1.0, c2},
    {3, "base group partition into 20 + 8 exact masses", 10.0, c3},
    {4, "minimal step constant matches the advertised value", 60.0, c4},
    {5, "depth-2 partition tree fully verified", 120.0, c5},
    {6, "Lipschitz sampling maxima stable across depths", 300.0, c6},
    {7, "equivalence certificates and recorded counterexample", 1.0, c7},
    {8, "decomposition feasibility matches brute force on 200 instances", 120.0, c8},
    {9, "stopping-cut invariants on 50 random systems", 60.0, c9},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    const char* stress = std::getenv("SELFSIM_STRESS");
    const bool stressed = stress && *stress && std::strcmp(stress, "0") != 0;
    int failures = 0;
    for (const Criterion& cr : kCriteria) {
        if (only != 0 && cr.id != only) continue;
        // The optional depth-3 stress pass gets its own 30-minute allowance.
        const double budget = (cr.id == 5 && stressed) ? 1800.0 : cr.budget_seconds;
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget)
            check.expect(false, "over budget: " + std::to_string(secs) + "s > " +
                                    std::to_string(budget) + "s");
        std::ostringstream line;
        line << (check.ok ? "[PASS]" : "[FAIL]") << " criterion " << cr.id << ": " << cr.name
             << " (" << std::fixed << std::setprecision(2) << secs << "s of "
             << budget << "s)";
        const std::string detail = check.log.str();
        if (!detail.empty()) line << " -- " << detail;
        std::cout << line.str() << "\n";
        if (!check.ok) ++failures;
    }
    return failures;
}
