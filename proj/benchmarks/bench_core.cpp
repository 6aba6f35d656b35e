#include <benchmark/benchmark.h>

#include "selfsim/massdecomp.hpp"

using namespace selfsim;

namespace {

IfsSpec domain_spec() {
    return make_equal_gap_line_ifs(
        {Rational(1, 3), Rational(1, 3), Rational(1, 9), Rational(1, 9)}, "bench-K");
}

IfsSpec target_spec() {
    std::vector<Rational> r(20, Rational(1, 27));
    r.insert(r.end(), 8, Rational(1, 729));
    return make_equal_gap_line_ifs(r, "bench-F");
}

const PairSystem& pair_system() {
    static PairSystem psys = make_pair_system(domain_spec(), target_spec());
    return psys;
}

void BM_StoppingCut(benchmark::State& state) {
    IfsSpec spec = domain_spec();
    const long level = state.range(0);
    for (auto _ : state) {
        Cut cut = stopping_cut(spec, Rational(1, 3), level);
        benchmark::DoNotOptimize(cut.words.size());
    }
    state.SetLabel(std::to_string(stopping_cut(spec, Rational(1, 3), level).words.size()) +
                   " words");
}
BENCHMARK(BM_StoppingCut)->Arg(5)->Arg(8)->Arg(11);

void BM_MassArithmetic(benchmark::State& state) {
    const ContextPtr& ctx = pair_system().joint;
    AlgebraicMass a = AlgebraicMass::from_multiset(ctx, {{3, 7}, {4, 5}, {5, 2}});
    AlgebraicMass b = AlgebraicMass::monomial(ctx, 6);
    for (auto _ : state) {
        AlgebraicMass c = a * b + a;
        benchmark::DoNotOptimize(c.is_zero());
    }
}
BENCHMARK(BM_MassArithmetic);

void BM_MassInverse(benchmark::State& state) {
    const ContextPtr& ctx = pair_system().joint;
    AlgebraicMass m = AlgebraicMass::from_multiset(ctx, {{3, 2}, {5, 1}});
    for (auto _ : state) {
        AlgebraicMass inv = m.inverse();
        benchmark::DoNotOptimize(inv.is_zero());
    }
}
BENCHMARK(BM_MassInverse);

void BM_BaseGroupPartition(benchmark::State& state) {
    const PairSystem& psys = pair_system();
    const ContextPtr& ctx = psys.joint;
    MonomialMultiset pool = expand_power({{1, 2}, {2, 2}}, 3);
    Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1);
    std::vector<AlgebraicMass> targets;
    for (const Word& w : j1.words)
        targets.push_back(AlgebraicMass::monomial(ctx, word_exponent(psys.target_exps, w)));
    for (auto _ : state) {
        GroupAssignment ga = group_partition(ctx, pool, targets);
        benchmark::DoNotOptimize(ga.counts.size());
    }
}
BENCHMARK(BM_BaseGroupPartition);

void BM_LevelConstruction(benchmark::State& state) {
    const PairSystem& psys = pair_system();
    for (auto _ : state) {
        BuildResult br = build_levels(psys, 5, 1);
        benchmark::DoNotOptimize(br.levels.size());
    }
}
BENCHMARK(BM_LevelConstruction)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
