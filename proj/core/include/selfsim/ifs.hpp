#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfsim/algebra.hpp"
#include "selfsim/limits.hpp"
#include "selfsim/rational.hpp"

namespace selfsim {

using Vec = std::vector<Rational>;
using Mat = std::vector<std::vector<Rational>>;

// x |-> ratio * rotation * x + translation.  rotation empty means identity.
struct Similitude {
    Rational ratio;
    Mat rotation; // d x d orthogonal, or empty for identity
    Vec translation;

    bool has_rotation() const { return !rotation.empty(); }
};

Vec apply(const Similitude& s, const Vec& x);
Similitude compose(const Similitude& outer, const Similitude& inner);

struct IfsSpec {
    int dimension = 1;
    std::string label;
    std::vector<Similitude> maps;

    std::vector<Rational> ratios() const;
};

// JSON round-trip (schema in README).  Serialization is canonical: parsing the
// output reproduces the spec bit-exactly.
IfsSpec parse_ifs_json(const std::string& text);
std::string ifs_to_json(const IfsSpec& spec);
IfsSpec load_ifs_file(const std::string& path);

// Structural validation shared by all entry points: >= 2 maps, <= 255 maps,
// ratios in (0,1), shapes consistent, rotations orthogonal (exactly, or within
// 1e-12 for approximate inputs).
void validate_spec(const IfsSpec& spec);

// ---------------------------------------------------------------------------
// Separation certificate
// ---------------------------------------------------------------------------

// Sound certificate that the first-level pieces are pairwise disjoint.
// d == 1: the convex hull [hull_lo, hull_hi] is exact and delta_lower equals
// the true least gap between pieces (piece hull endpoints lie in the piece).
// d >= 2: an invariant ball B(ball_center, ball_radius) with phi_i(B) ⊆ B and
// pairwise disjoint images; bounds are certified via exact rational sqrt
// brackets and are generally not tight.
struct SeparationCert {
    Rational delta_lower;
    Rational diam_lower;
    Rational diam_upper;
    bool line_exact = false;
    Rational hull_lo, hull_hi; // d == 1 only
    Vec ball_center;           // d >= 2 only
    Rational ball_radius;      // d >= 2 only
};

SeparationCert validate_ssc(const IfsSpec& spec); // throws SscUnverifiable

// Conjugate so the attractor contains the origin and has diameter 1 (exact for
// d == 1; within 2*r_max^depth for d >= 2, where the diameter is estimated
// from depth-level representative points).
IfsSpec normalize(const IfsSpec& spec, int depth = 8);

// Line system with the maps laid out left to right on [0,1], separated by
// equal gaps (1 - sum r_i) / (n - 1).  Requires sum r_i < 1.
IfsSpec make_equal_gap_line_ifs(const std::vector<Rational>& ratios,
                                const std::string& label);

// ---------------------------------------------------------------------------
// Words and cuts
// ---------------------------------------------------------------------------

// A word is a byte string of 0-based letters; lexicographic order on the
// string is lexicographic order on the address.  The text form is 1-based and
// dot-separated ("1.3.2"); the empty word prints as "".
using Word = std::string;

std::string format_word(const Word& w);
Word parse_word(const std::string& text, std::size_t alphabet_size);
Word wedge(const Word& a, const Word& b);
Rational word_ratio(const IfsSpec& spec, const Word& w);

struct Cut {
    Rational delta;
    long level = 0;
    std::vector<Word> words; // lexicographic
};

// All words with r_w <= delta^n < r_parent.  Deterministic lexicographic DFS;
// integer exponent arithmetic is used when every ratio is a power of delta.
Cut stopping_cut(const IfsSpec& spec, const Rational& delta, long n,
                 const Limits& limits = Limits{});

// The members of the level-n cut lying below `word`; {word} if the word is
// already at or below the cut.
std::vector<Word> refine_cell(const IfsSpec& spec, const Word& word, const Rational& delta,
                              long n, const Limits& limits = Limits{});

// Letter exponents e_i with ratio_i = delta^{e_i}, when all are integers.
std::optional<std::vector<long>> letter_exponents(const IfsSpec& spec, const Rational& delta);
long word_exponent(const std::vector<long>& letter_exps, const Word& w);

// Sum of masses x^{exp(w)} over the words, with exponents taken against the
// supplied per-letter table (so the caller picks the ring).
AlgebraicMass cut_mass(const ContextPtr& ctx, const std::vector<long>& letter_exps,
                       const std::vector<Word>& words);
std::map<long, Integer> exponent_histogram(const std::vector<long>& letter_exps,
                                           const std::vector<Word>& words);

// ---------------------------------------------------------------------------
// Cell geometry
// ---------------------------------------------------------------------------

struct CellGeometry {
    Vec representative; // phi_w(0)
    Rational ratio;     // r_w
    Rational diam_upper;
    Vec box_lo, box_hi; // axis-aligned enclosure
};

CellGeometry cell_geometry(const IfsSpec& spec, const SeparationCert& cert, const Word& w);

// Certified bounds on dist(K_w1, K_w2); exact on the line.
// Throws PrefixOverlap when either word prefixes the other (equal included).
std::pair<Rational, Rational> cell_distance_bounds(const IfsSpec& spec,
                                                   const SeparationCert& cert,
                                                   const Word& w1, const Word& w2);

// d == 1 helper: exact hull interval of a cell.
std::pair<Rational, Rational> cell_interval(const IfsSpec& spec, const SeparationCert& cert,
                                            const Word& w);

// ---------------------------------------------------------------------------
// Prepared bundles
// ---------------------------------------------------------------------------

struct System {
    IfsSpec spec;
    SeparationCert cert;
    ContextPtr ctx; // own-ring context; null when the ratios are incommensurable
};

System prepare_system(const IfsSpec& spec);

// Two systems sharing one ring: delta is the joint ratio root and the letter
// exponents on both sides are relative to it.  Construction fails with
// NotCommensurable or DimensionMismatch when the rings cannot be merged.
struct PairSystem {
    System source; // the surjection's domain
    System target;
    ContextPtr joint;
    Rational delta;
    std::vector<long> source_exps, target_exps;
};

PairSystem make_pair_system(const IfsSpec& source_spec, const IfsSpec& target_spec);

} // namespace selfsim
