#include "selfsim/massdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "selfsim/errors.hpp"

namespace selfsim {

namespace {

std::string format_mass_list(const std::vector<AlgebraicMass>& targets) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < targets.size() && i < 8; ++i) {
        if (i) ss << ", ";
        ss << targets[i].str();
    }
    if (targets.size() > 8) ss << ", ...";
    return ss.str();
}

struct PartitionSearch {
    const ContextPtr& ctx;
    const Limits& limits;
    std::vector<long> exps;            // distinct exponents, ascending
    std::vector<long long> avail;      // pool counts per exponent
    std::vector<AlgebraicMass> mono;   // x^exps[i]
    std::vector<long double> val;      // numeric value in the shifted scale
    std::vector<AlgebraicMass> inv;    // (x^exps[i])^-1, built lazily
    long double tol = 0;
    std::vector<std::size_t> order;    // processing order over targets
    const std::vector<AlgebraicMass>* targets = nullptr;
    std::vector<MonomialMultiset> taken; // per original target index
    std::unordered_set<std::string> dead; // (t, avail) states with no solution
    std::uint64_t nodes = 0;

    std::string state_key(std::size_t t) const {
        std::string k = std::to_string(t);
        for (long long a : avail) {
            k += ':';
            k += std::to_string(a);
        }
        return k;
    }

    const AlgebraicMass& inverse_of(std::size_t i) {
        if (!inv[i].valid()) inv[i] = mono[i].inverse();
        return inv[i];
    }

    bool solve_target(std::size_t t, std::size_t idx, AlgebraicMass& rem, long double rem_ld,
                      MonomialMultiset& take) {
        if ((++nodes & 0x3ff) == 0) limits.check_deadline("group partition");
        if (idx + 1 == exps.size()) {
            // The remainder must be a nonnegative integer multiple of the last
            // monomial; solve for the count directly.
            if (rem.is_zero()) return close_target(t, take);
            const AlgebraicMass q = rem * inverse_of(idx);
            const auto& c = q.coeffs();
            for (std::size_t i = 1; i < c.size(); ++i)
                if (c[i] != 0) return false;
            const Rational n = c.empty() ? Rational(0) : c[0];
            if (n < 0 || denominator(n) != 1) return false;
            const Integer ni = numerator(n);
            if (ni > avail[idx]) return false;
            const long long count = ni.convert_to<long long>();
            if (count == 0) return close_target(t, take);
            // rem == count * x^e exactly (field), so the target closes exactly
            avail[idx] -= count;
            take[exps[idx]] = count;
            const bool ok = close_target(t, take);
            if (!ok) {
                avail[idx] += count;
                take.erase(exps[idx]);
            }
            return ok;
        }
        long long cap = avail[idx];
        if (val[idx] > 0) {
            const long double fit = (rem_ld + tol) / val[idx];
            if (fit < static_cast<long double>(cap))
                cap = fit <= 0 ? 0 : static_cast<long long>(fit);
        }
        for (long long n = cap; n >= 0; --n) {
            const long double next_ld = rem_ld - static_cast<long double>(n) * val[idx];
            if (next_ld < -tol) continue;
            avail[idx] -= n;
            if (n) take[exps[idx]] = n;
            AlgebraicMass next = rem;
            if (n) next = next - AlgebraicMass::from_multiset(ctx, {{exps[idx], Integer(n)}});
            if (solve_target(t, idx + 1, next, next_ld, take)) return true;
            avail[idx] += n;
            if (n) take.erase(exps[idx]);
        }
        return false;
    }

    bool close_target(std::size_t t, MonomialMultiset& take) {
        taken[order[t]] = take;
        if (solve_from(t + 1)) return true;
        taken[order[t]] = MonomialMultiset{};
        return false;
    }

    bool solve_from(std::size_t t) {
        if (t == targets->size()) return true;
        const std::string key = state_key(t);
        if (dead.count(key)) return false;
        const AlgebraicMass& target = (*targets)[order[t]];
        AlgebraicMass rem = target;
        // numeric shadow in the shifted scale
        long double rem_ld = 0;
        {
            const double e = target.eval();
            rem_ld = static_cast<long double>(e) / shift_scale;
        }
        MonomialMultiset take;
        if (solve_target(t, 0, rem, rem_ld, take)) return true;
        dead.insert(key);
        return false;
    }

    long double shift_scale = 1.0L;
};

} // namespace

std::optional<GroupAssignment> try_group_partition(const ContextPtr& ctx,
                                                   const MonomialMultiset& available,
                                                   const std::vector<AlgebraicMass>& targets,
                                                   const Limits& limits) {
    if (!ctx) fail(ErrorCode::PreconditionFailed, "group partition needs a ring context");
    for (const auto& [e, c] : available) {
        if (c < 0) fail(ErrorCode::PreconditionFailed, "negative pool count");
        (void)e;
    }
    AlgebraicMass pool_mass = AlgebraicMass::from_multiset(ctx, available);
    AlgebraicMass target_mass = AlgebraicMass::zero(ctx);
    for (const auto& t : targets) target_mass = target_mass + t;
    if (!(pool_mass == target_mass))
        fail(ErrorCode::PreconditionFailed,
             "group partition mass mismatch: pool " + pool_mass.str() + " vs targets " +
                 target_mass.str());

    PartitionSearch s{ctx, limits};
    for (const auto& [e, c] : available) {
        if (c == 0) continue;
        s.exps.push_back(e);
        s.avail.push_back(c.convert_to<long long>());
    }
    if (s.exps.empty()) {
        // empty pool: feasible iff every target is zero mass (i.e. none, since
        // masses here are positive); nonzero targets already failed mass check
        GroupAssignment ga;
        ga.counts.assign(targets.size(), MonomialMultiset{});
        return ga;
    }
    const long e0 = s.exps.front();
    const long double x0 = static_cast<long double>(to_double(ctx->x_value));
    s.shift_scale = std::pow(x0, static_cast<long double>(e0));
    for (long e : s.exps) s.val.push_back(std::pow(x0, static_cast<long double>(e - e0)));
    for (long e : s.exps) s.mono.push_back(AlgebraicMass::monomial(ctx, e));
    s.inv.resize(s.exps.size());
    // prune tolerance: well below the smallest monomial in the shifted scale
    s.tol = s.val.back() * 1e-9L;

    s.targets = &targets;
    s.taken.assign(targets.size(), MonomialMultiset{});
    s.order.resize(targets.size());
    std::iota(s.order.begin(), s.order.end(), std::size_t{0});
    std::stable_sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
        return targets[a].eval() > targets[b].eval();
    });

    if (!s.solve_from(0)) return std::nullopt;
    GroupAssignment ga;
    ga.counts = std::move(s.taken);
    return ga;
}

GroupAssignment group_partition(const ContextPtr& ctx, const MonomialMultiset& available,
                                const std::vector<AlgebraicMass>& targets,
                                const Limits& limits) {
    auto r = try_group_partition(ctx, available, targets, limits);
    if (!r)
        fail(ErrorCode::Infeasible,
             "no exact grouping of the pool into target masses [" + format_mass_list(targets) +
                 "] exists at this granularity");
    return *r;
}

std::vector<std::vector<Word>> materialize_groups(const GroupAssignment& assignment,
                                                  const std::vector<Word>& pool,
                                                  const std::vector<long>& letter_exps) {
    std::map<long, std::vector<Word>> buckets;
    for (const auto& w : pool) buckets[word_exponent(letter_exps, w)].push_back(w);
    for (auto& [e, v] : buckets) {
        std::sort(v.begin(), v.end());
        (void)e;
    }
    std::map<long, std::size_t> cursor;
    std::vector<std::vector<Word>> out;
    out.reserve(assignment.counts.size());
    for (const auto& take : assignment.counts) {
        std::vector<Word> group;
        for (const auto& [e, cnt] : take) {
            auto it = buckets.find(e);
            const long long n = cnt.convert_to<long long>();
            if (it == buckets.end() ||
                cursor[e] + static_cast<std::size_t>(n) > it->second.size())
                fail(ErrorCode::PreconditionFailed,
                     "assignment takes more monomials than the pool holds");
            for (long long i = 0; i < n; ++i) group.push_back(it->second[cursor[e]++]);
        }
        std::sort(group.begin(), group.end());
        out.push_back(std::move(group));
    }
    return out;
}

namespace {

// true if a is a proper prefix of b
bool proper_prefix(const Word& a, const Word& b) {
    return a.size() < b.size() && b.compare(0, a.size(), a) == 0;
}

void require_prefix_free(const std::vector<Word>& words) {
    std::vector<Word> sorted = words;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i] == sorted[i + 1])
            fail(ErrorCode::PreconditionFailed,
                 "duplicate cell word '" + format_word(sorted[i]) + "'");
        if (proper_prefix(sorted[i], sorted[i + 1]))
            fail(ErrorCode::PreconditionFailed,
                 "cell words overlap: '" + format_word(sorted[i]) + "' contains '" +
                     format_word(sorted[i + 1]) + "'");
    }
}

} // namespace

std::vector<std::vector<Word>> decompose(const PairSystem& psys,
                                         const std::vector<Word>& source_words,
                                         long to_cut_level,
                                         const std::vector<AlgebraicMass>& targets,
                                         const Limits& limits) {
    if (source_words.empty())
        fail(ErrorCode::PreconditionFailed, "decompose needs a nonempty source");
    if (targets.empty()) fail(ErrorCode::PreconditionFailed, "decompose needs targets");
    require_prefix_free(source_words);

    const AlgebraicMass source_mass =
        cut_mass(psys.joint, psys.source_exps, source_words);
    if (targets.size() == 1 && targets[0] == source_mass) {
        std::vector<Word> part = source_words;
        std::sort(part.begin(), part.end());
        return {part};
    }

    AlgebraicMass total = AlgebraicMass::zero(psys.joint);
    for (const auto& t : targets) total = total + t;
    if (!(total == source_mass))
        fail(ErrorCode::PreconditionFailed,
             "decomposition mass mismatch: source " + source_mass.str() + " vs targets " +
                 total.str());

    std::vector<Word> pool;
    for (const auto& w : source_words) {
        auto refined = refine_cell(psys.source.spec, w, psys.delta, to_cut_level, limits);
        pool.insert(pool.end(), refined.begin(), refined.end());
        limits.check_words(pool.size(), "decompose refinement");
    }
    std::sort(pool.begin(), pool.end());

    MonomialMultiset hist = exponent_histogram(psys.source_exps, pool);
    auto assignment = try_group_partition(psys.joint, hist, targets, limits);
    if (!assignment)
        fail(ErrorCode::Infeasible,
             "no exact partition of " + std::to_string(pool.size()) +
                 " refined cells into target masses [" + format_mass_list(targets) +
                 "] at cut level " + std::to_string(to_cut_level));
    return materialize_groups(*assignment, pool, psys.source_exps);
}

// ---------------------------------------------------------------------------
// Level construction
// ---------------------------------------------------------------------------

namespace {

std::vector<AlgebraicMass> cut_word_masses(const ContextPtr& ctx,
                                           const std::vector<long>& letter_exps,
                                           const std::vector<Word>& words) {
    std::vector<AlgebraicMass> masses;
    masses.reserve(words.size());
    for (const auto& w : words)
        masses.push_back(AlgebraicMass::monomial(ctx, word_exponent(letter_exps, w)));
    return masses;
}

// every word must lie in the source cut at level n: exponent >= n and the
// parent's exponent < n; a deeper word cannot be expressed as a union of
// level-n cells, which sinks this step constant
void require_in_cut(const std::vector<long>& letter_exps, const std::vector<Word>& words,
                    long n, int c) {
    for (const auto& w : words) {
        const long e = word_exponent(letter_exps, w);
        if (e < n)
            fail(ErrorCode::PreconditionFailed,
                 "word '" + format_word(w) + "' is too coarse for cut level " +
                     std::to_string(n));
        const long pe = w.empty() ? 0 : e - letter_exps[static_cast<unsigned char>(w.back())];
        if (!w.empty() && pe >= n)
            fail(ErrorCode::Infeasible,
                 "cell '" + format_word(w) + "' lies below the cut at level " +
                     std::to_string(n) + "; step constant " + std::to_string(c) +
                     " is too small");
    }
}

std::vector<Word> refine_words(const IfsSpec& spec, const std::vector<Word>& words,
                               const Rational& delta, long n, const Limits& limits) {
    std::vector<Word> out;
    for (const auto& w : words) {
        auto r = refine_cell(spec, w, delta, n, limits);
        out.insert(out.end(), r.begin(), r.end());
        limits.check_words(out.size(), "cut refinement");
    }
    std::sort(out.begin(), out.end());
    return out;
}

void all_words_of_length(std::size_t alphabet, int h, std::vector<Word>& out,
                         const Limits& limits) {
    Word cur;
    std::function<void(int)> rec = [&](int left) {
        if (left == 0) {
            out.push_back(cur);
            limits.check_words(out.size(), "base enumeration");
            return;
        }
        for (std::size_t i = 0; i < alphabet; ++i) {
            cur.push_back(static_cast<char>(i));
            rec(left - 1);
            cur.pop_back();
        }
    };
    rec(h);
}

} // namespace

int find_base_length(const PairSystem& psys, const Limits& limits) {
    if (!psys.joint) fail(ErrorCode::NotCommensurable, "pair has no joint ring context");
    const Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1, limits);
    const std::vector<AlgebraicMass> target_masses =
        cut_word_masses(psys.joint, psys.target_exps, j1.words);

    MonomialMultiset letters;
    for (long a : psys.source_exps) letters[a] += 1;

    const double m = static_cast<double>(psys.source.spec.maps.size());
    double count = 1;
    for (int h = 1;; ++h) {
        count *= m;
        if (count > static_cast<double>(limits.word_budget))
            fail(ErrorCode::Infeasible,
                 "no feasible base length within the word budget (tried up to length " +
                     std::to_string(h - 1) + ")");
        const MonomialMultiset hist = expand_power(letters, h);
        if (try_group_partition(psys.joint, hist, target_masses, limits)) return h;
        limits.check_deadline("base length scan");
    }
}

BuildResult build_levels(const PairSystem& psys, int c, int depth, const Limits& limits) {
    if (!psys.joint) fail(ErrorCode::NotCommensurable, "pair has no joint ring context");
    if (c < 1) fail(ErrorCode::PreconditionFailed, "step constant must be >= 1");
    if (depth < 1) fail(ErrorCode::PreconditionFailed, "depth must be >= 1");

    BuildResult res;
    res.step_c = c;
    res.base_length = find_base_length(psys, limits);

    const Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1, limits);
    const std::vector<AlgebraicMass> j1_masses =
        cut_word_masses(psys.joint, psys.target_exps, j1.words);

    // Base: group the length-h source words against the level-1 target masses,
    // then refine every group into the level-1 source cut.
    MonomialMultiset letters;
    for (long a : psys.source_exps) letters[a] += 1;
    const MonomialMultiset base_hist = expand_power(letters, res.base_length);
    auto assignment = try_group_partition(psys.joint, base_hist, j1_masses, limits);
    if (!assignment)
        fail(ErrorCode::Infeasible, "level-1 grouping infeasible at base length " +
                                        std::to_string(res.base_length));
    std::vector<Word> base_pool;
    all_words_of_length(psys.source.spec.maps.size(), res.base_length, base_pool, limits);
    auto base_groups = materialize_groups(*assignment, base_pool, psys.source_exps);

    TreeLevel level1;
    level1.target_cut_level = 1;
    level1.source_cut_level = 1 + c;
    for (std::size_t i = 0; i < j1.words.size(); ++i) {
        TreeRow row;
        row.target = j1.words[i];
        row.group = refine_words(psys.source.spec, base_groups[i], psys.delta,
                                 level1.source_cut_level, limits);
        require_in_cut(psys.source_exps, row.group, level1.source_cut_level, c);
        row.parent = -1;
        level1.rows.push_back(std::move(row));
    }
    res.levels.push_back(std::move(level1));

    for (int k = 2; k <= depth; ++k) {
        const TreeLevel& prev = res.levels.back();
        TreeLevel next;
        next.target_cut_level = 1 + static_cast<long>(k - 1) * c;
        next.source_cut_level = 1 + static_cast<long>(k) * c;
        std::size_t level_words = 0;
        for (std::size_t pi = 0; pi < prev.rows.size(); ++pi) {
            const TreeRow& parent = prev.rows[pi];
            const auto children = refine_cell(psys.target.spec, parent.target, psys.delta,
                                              next.target_cut_level, limits);
            const auto child_masses =
                cut_word_masses(psys.joint, psys.target_exps, children);
            auto parts = decompose(psys, parent.group, next.source_cut_level, child_masses,
                                   limits);
            for (std::size_t ci = 0; ci < children.size(); ++ci) {
                TreeRow row;
                row.target = children[ci];
                // the identity case returns the group unrefined; the level cut
                // is strict, so refine here (a no-op for already-refined parts)
                row.group = refine_words(psys.source.spec, parts[ci], psys.delta,
                                         next.source_cut_level, limits);
                require_in_cut(psys.source_exps, row.group, next.source_cut_level, c);
                row.parent = static_cast<long>(pi);
                level_words += row.group.size();
                limits.check_words(level_words, "partition level");
                next.rows.push_back(std::move(row));
            }
            limits.check_deadline("partition level");
        }
        res.levels.push_back(std::move(next));
    }
    return res;
}

FindCResult find_min_c(const PairSystem& psys, int horizon_k, const Limits& limits) {
    if (!psys.joint) fail(ErrorCode::NotCommensurable, "pair has no joint ring context");
    if (horizon_k < 1) fail(ErrorCode::PreconditionFailed, "horizon must be >= 1");

    FindCResult res;
    res.base_length = find_base_length(psys, limits);
    long a_max = 0;
    for (long a : psys.source_exps) a_max = std::max(a_max, a);
    res.forced_lower_bound =
        std::max(1, static_cast<int>((res.base_length - 1) * a_max));

    std::string last_failure;
    for (int c = res.forced_lower_bound; c <= limits.c_max; ++c) {
        try {
            build_levels(psys, c, horizon_k, limits);
            res.c = c;
            return res;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Infeasible) throw;
            last_failure = e.what();
        }
        limits.check_deadline("step constant scan");
    }
    fail(ErrorCode::NoFeasibleC,
         "no step constant up to " + std::to_string(limits.c_max) +
             " admits the construction to depth " + std::to_string(horizon_k) +
             (last_failure.empty() ? "" : "; last failure: " + last_failure));
}

} // namespace selfsim
