#pragma once

#include <optional>
#include <string>
#include <vector>

#include "selfsim/ifs.hpp"

namespace selfsim {

enum class DimVerdict { EqualExact, EqualNumeric, DifferentExact, DifferentNumeric };

struct DimensionComparison {
    DimVerdict verdict = DimVerdict::DifferentNumeric;
    double s_left = 0;
    double s_right = 0;
    bool exact = false; // settled in a joint coefficient ring, not numerically
};

// Exact when both ratio lists are commensurable with a common root (then both
// Moran relations either hold for one x or provably cannot); numeric within
// tol otherwise.
DimensionComparison compare_dimensions(const IfsSpec& a, const IfsSpec& b, double tol = 1e-10);

enum class EqStatus { Equivalent, NotEquivalentExternal, Unknown };
enum class Hypothesis { None, HomogeneousDomain, HomogeneousTarget };

// Every Equivalent verdict carries a replayable certificate: the ratios of the
// non-homogeneous side are base^{-power * alpha_j / 1} with rational alpha_j
// and sum_j (#maps)^{-alpha_j} == 1 verified exactly.
struct EquivalenceVerdict {
    EqStatus status = EqStatus::Unknown;
    Hypothesis hypothesis_used = Hypothesis::None;
    DimensionComparison dimension_check{};
    Integer base = 0;                // #maps of the homogeneous side, power-reduced
    unsigned power = 1;              // #maps == base^power
    std::vector<Rational> exponents; // log lambda_j / log r per non-homogeneous map
    bool exponents_integral = false;
    std::vector<Integer> integer_exponents; // filled when exponents_integral
    std::string citation;            // source of a NotEquivalentExternal verdict
    bool inconsistency = false;      // stated hypothesis contradicts rationality
    std::string note;
};

// Unconditional decision when the domain system is homogeneous: rational
// log-ratios of the target against the domain ratio certify equivalence.
// Total in the homogeneity input (Unknown with a note when not homogeneous);
// throws DimensionMismatch when the dimensions provably differ.
EquivalenceVerdict decide_homogeneous_domain(const IfsSpec& domain, const IfsSpec& target);

// Conditional decision under the user-supplied assumption that a Lipschitz
// map with positive-measure image exists; the side named by the hypothesis
// must be homogeneous (else HypothesisNotApplicable). A rationality failure
// together with the hypothesis is reported as a flagged inconsistency.
EquivalenceVerdict decide_with_embedding_hypothesis(const IfsSpec& k_spec, const IfsSpec& f_spec,
                                                    Hypothesis hypothesis);

// Registry-first top-level decision. Never derives NotEquivalent from its own
// reasoning; only recorded external facts produce NotEquivalentExternal.
EquivalenceVerdict decide(const IfsSpec& a, const IfsSpec& b,
                          std::optional<Hypothesis> hypothesis = std::nullopt);

const char* status_name(EqStatus s);
const char* hypothesis_name(Hypothesis h);
const char* dim_verdict_name(DimVerdict v);

std::string verdict_to_json(const EquivalenceVerdict& v);

} // namespace selfsim
