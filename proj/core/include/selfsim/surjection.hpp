#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/massdecomp.hpp"

namespace selfsim {

// Hierarchical cell-to-cell map between two commensurable systems: level k
// assigns every target cut word at level 1+(k-1)c a group of source cut words
// at level 1+kc whose cells map into it. Groups carry exactly the target
// cell's mass, so the induced point map is a measure-compatible surjection.
struct PartitionTree {
    Rational delta;
    int step_c = 1;
    int base_length = 1;
    std::vector<TreeLevel> levels; // levels[k-1] = level k
};

// Builds to the requested depth; when step_c is not supplied the smallest
// feasible step constant for that depth is searched first.
PartitionTree build_partition_tree(const PairSystem& psys, int depth,
                                   std::optional<int> step_c = std::nullopt,
                                   const Limits& limits = Limits{});

std::string tree_to_json(const PartitionTree& tree, const PairSystem& psys);

// The target cut word whose group contains the address's source cut cell at
// level k. Successive k give prefix-nested outputs.
Word evaluate(const PartitionTree& tree, const PairSystem& psys, const Word& address, int k);

// Recomputes both cuts and checks: targets enumerate the full target cut,
// every group is nonempty, the groups partition the full source cut, and the
// level is consistent with the next one (children groups refine parents).
bool verify_surjective(const PartitionTree& tree, const PairSystem& psys, int k,
                       const Limits& limits = Limits{});

struct LinearityReport {
    bool linear = false;          // all ratios equal one common constant
    bool constant_is_one = false; // that constant is exactly 1
    std::string c_tilde;          // ring-element form of the common ratio
    std::optional<Word> witness;  // first cell breaking the common ratio
};

// mass(preimage)/mass(cell) per target cell, exact in the quotient ring.
LinearityReport check_measure_linearity(const PartitionTree& tree, const PairSystem& psys,
                                        int level);

struct CellMap;

// Same check on a flat cell map: target cells with no preimage get ratio 0.
LinearityReport check_measure_linearity(const CellMap& map, const Limits& limits = Limits{});

struct InjectivityReport {
    bool almost_injective = false;
    std::vector<std::pair<Word, Word>> witnesses; // overlapping target pairs
};

// Distinct groups must map onto mass-disjoint target unions: target words
// pairwise distinct and prefix-free.
InjectivityReport check_almost_injectivity(const PartitionTree& tree, const PairSystem& psys,
                                           int level);

struct FragmentationResult {
    bool bounded = false;
    long alpha = 0;  // meaningful when bounded
    long level = 0;  // the source cut level n the index was computed for
    std::optional<Word> unresolved; // a level-n cell the built depth cannot certify
};

// Smallest alpha such that the image of every source cut cell at level n
// provably contains a full target cut cell at level n+alpha, certified by a
// group lying entirely inside the cell's subtree.
FragmentationResult fragmentation_index(const PartitionTree& tree, const PairSystem& psys,
                                        long n, const Limits& limits = Limits{});

struct ScaleBucket {
    long k_star = 0;            // deepest tree level at which the pair shared a cut cell
    std::uint64_t pairs = 0;
    double max_ratio = 0;       // max sampled |g(x)-g(x')| / |x-x'| at this scale
    double analytic_bound = 0;  // scale's distortion bound, dominates max_ratio
};

struct LipschitzReport {
    std::uint64_t samples = 0;  // pairs evaluated (skips excluded)
    std::uint64_t skipped = 0;  // pairs whose truncations coincided
    std::uint64_t seed = 0;
    double sampled_max = 0;
    double analytic_bound = 0;  // max over populated scales
    bool exact_numerator_ok = true; // every pair passed the exact image-diameter bound
    std::vector<ScaleBucket> per_scale;
};

// Seed-deterministic sampling of address pairs at depth k: x is the
// representative of the address's deepest source cut cell, g(x) the
// representative of the evaluated target cell. Every pair is checked exactly
// against the image-diameter bound at its separation scale.
LipschitzReport estimate_lipschitz(const PartitionTree& tree, const PairSystem& psys,
                                   int depth_k, std::uint64_t samples, std::uint64_t seed,
                                   const std::string& csv_path = "");

struct ExactSupResult {
    double sup = 0;
    Rational numerator;   // |g - g'| between the witness pair's target representatives
    Rational denominator; // |x - x'| between the witness pair's source representatives
    Word left, right;     // consecutive source cells attaining the supremum
};

// Exact supremum of |g(x)-g(x')| / |x-x'| over all pairs of distinct source
// cut cells at tree level depth_k, with x and g(x) at cell representatives as
// in estimate_lipschitz. On the line the denominator is additive and the
// numerator subadditive along the x-sorted cells, so the pairwise maximum is
// attained on a consecutive pair; the scan compares exact rationals. Requires
// line-exact one-dimensional systems.
ExactSupResult exact_lipschitz_sup(const PartitionTree& tree, const PairSystem& psys,
                                   int depth_k);

// Finite cell-to-cell carrier of a map between two systems: a total table
// from every source cut word to a target cut word.
struct CellMap {
    IfsSpec source_ifs;
    IfsSpec target_ifs;
    Rational delta;
    long source_level = 0;
    long target_level = 0;
    double lip = 1.0;        // Lipschitz constant estimate used by localize
    bool lip_assumed = true; // true when lip was never estimated
    std::vector<std::pair<Word, Word>> table; // sorted by source word
};

CellMap cell_map_from_tree(const PartitionTree& tree, const PairSystem& psys, int level,
                           std::optional<double> lip = std::nullopt);
CellMap identity_cell_map(const IfsSpec& spec, const Rational& delta, long level,
                          const Limits& limits = Limits{});
std::string cell_map_to_json(const CellMap& map);
CellMap cell_map_from_json(const std::string& text);

struct RestrictionResult {
    CellMap map;
    // per reassigned source word: the replacement target it collapses onto
    std::vector<std::pair<Word, Word>> reassigned;
    // per source word: image-diameter witness before and after (after <= before)
    std::vector<std::pair<Rational, Rational>> diameter_witness;
    bool diameter_monotone = true;
};

// Keep only the target cells satisfying the predicate; a source cell whose
// image is dropped is collapsed onto the lexicographically least kept target
// reachable from the nearest ancestor whose subtree still hits the kept
// region (the parent when possible).
RestrictionResult restrict_to_intersection(const CellMap& map,
                                           const std::function<bool(const Word&)>& keep);

struct CellDensity {
    Word target;
    std::uint64_t preimage_count = 0;
    std::string density;        // exact ring-element form
    double density_value = 0;
};

struct LocalizationReport {
    std::vector<CellDensity> cells;
    Word selected;
    long selected_level = 0;
    std::uint64_t selected_count = 0;
    double selected_density = 0;
    std::uint64_t q_bound = 0;      // max preimage count over all cells
    double epsilon = 0;
    bool epsilon_met = false;       // selected density > 1 - epsilon
    double delta_n = 0;             // (lip / target separation) * delta^level
    double lip = 1.0;
    bool lip_assumed = true;
};

// Exact preimage densities per target cell; selects the cell witnessing
// density > 1-epsilon with the smallest preimage count.
LocalizationReport localize(const CellMap& map, double epsilon,
                            const Limits& limits = Limits{});

} // namespace selfsim
