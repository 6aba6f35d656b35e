#pragma once

#include <optional>
#include <vector>

#include "selfsim/algebra.hpp"
#include "selfsim/ifs.hpp"
#include "selfsim/limits.hpp"

namespace selfsim {

// Exact multiset partition: split an available pool of monomial masses into
// groups, one per target, each summing to its target exactly in the quotient
// ring.  Deterministic: targets are filled in descending numeric order and
// each group takes the largest feasible count of the smallest exponents first,
// which reproduces hand groupings like 2x^4 + 2x^5 = x^3.

struct GroupAssignment {
    // counts[t] maps exponent -> how many pool monomials x^exponent target t took;
    // indexed in the order the targets were given.
    std::vector<MonomialMultiset> counts;
};

std::optional<GroupAssignment> try_group_partition(const ContextPtr& ctx,
                                                   const MonomialMultiset& available,
                                                   const std::vector<AlgebraicMass>& targets,
                                                   const Limits& limits = Limits{});

// Throwing flavor: Infeasible when no grouping exists at this granularity.
GroupAssignment group_partition(const ContextPtr& ctx, const MonomialMultiset& available,
                                const std::vector<AlgebraicMass>& targets,
                                const Limits& limits = Limits{});

// Turn an assignment back into word lists: the pool is bucketed by exponent,
// each bucket sorted lexicographically, and every target takes from the bucket
// fronts in its given order.  Each returned group is lex-sorted.
std::vector<std::vector<Word>> materialize_groups(const GroupAssignment& assignment,
                                                  const std::vector<Word>& pool,
                                                  const std::vector<long>& letter_exps);

// Refine source cells to a cut level and partition the refined words into
// parts of exactly the prescribed masses (given in the joint quotient ring).
// The single-target identity case returns the source unchanged.
std::vector<std::vector<Word>> decompose(const PairSystem& psys,
                                         const std::vector<Word>& source_words,
                                         long to_cut_level,
                                         const std::vector<AlgebraicMass>& targets,
                                         const Limits& limits = Limits{});

// One row of a partition-tree level: a target-system cut word and the group
// of source-system cut words whose cells map into it.
struct TreeRow {
    Word target;
    std::vector<Word> group; // lex-sorted source cut words
    long parent = -1;        // row index into the previous level, -1 at level 1
};

struct TreeLevel {
    long target_cut_level = 0; // targets lie in the target-system cut at this level
    long source_cut_level = 0; // groups lie in the source-system cut at this level
    std::vector<TreeRow> rows;
};

struct BuildResult {
    int step_c = 1;
    int base_length = 1;
    std::vector<TreeLevel> levels; // levels[k-1] = level k
};

// Smallest word length h such that the length-h source words can be grouped
// into the level-1 target masses.  Independent of the step constant.
int find_base_length(const PairSystem& psys, const Limits& limits = Limits{});

// Build the level structure: level k maps each target cut word at level
// 1+(k-1)c to its group inside the source cut at level 1+kc.
BuildResult build_levels(const PairSystem& psys, int c, int depth,
                         const Limits& limits = Limits{});

struct FindCResult {
    int c = 0;                   // smallest feasible step constant found
    int forced_lower_bound = 1;  // word-containment bound max(1, (h-1)*a_max)
    int base_length = 1;
};

// Scan step constants from the containment-forced bound upward until the
// whole construction succeeds to the requested depth.
FindCResult find_min_c(const PairSystem& psys, int horizon_k, const Limits& limits = Limits{});

} // namespace selfsim
