#include "selfsim/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "selfsim/algebra.hpp"
#include "selfsim/errors.hpp"

namespace selfsim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<Rational> homogeneous_ratio(const IfsSpec& spec) {
    const Rational& r = spec.maps.front().ratio;
    for (const Similitude& m : spec.maps)
        if (m.ratio != r) return std::nullopt;
    return r;
}

std::vector<Rational> sorted_ratios(const IfsSpec& spec) {
    std::vector<Rational> rs = spec.ratios();
    std::sort(rs.begin(), rs.end());
    return rs;
}

// Known non-equivalent pairs with published proofs: the artifact replays no
// such proof, it only recognizes the recorded ratio data.
struct ExternalFact {
    std::vector<Rational> left, right; // sorted ratio multisets
    const char* citation;
};

const std::vector<ExternalFact>& external_registry() {
    static const std::vector<ExternalFact> facts = [] {
        std::vector<ExternalFact> v;
        ExternalFact f;
        f.left = {Rational(1, 9), Rational(1, 9), Rational(1, 3), Rational(1, 3)};
        f.right.assign(8, Rational(1, 729));
        for (int i = 0; i < 20; ++i) f.right.push_back(Rational(1, 27));
        std::sort(f.right.begin(), f.right.end());
        f.citation = "Xi & Xiong (2021), Example 1.1";
        v.push_back(std::move(f));
        return v;
    }();
    return facts;
}

// Certificate core shared by both deciders: the homogeneous side
// has n_maps equal ratios; the other side's ratios are r^{alpha_j}. Verifies
// sum n_maps^{-alpha_j} == 1 exactly after reducing n_maps to a non-power base.
void attach_certificate(EquivalenceVerdict& v, std::size_t n_maps,
                        std::vector<Rational> alphas) {
    Integer base(static_cast<unsigned long>(n_maps));
    unsigned power = 1;
    if (auto pp = is_perfect_power(base)) {
        base = pp->first;
        power = pp->second;
    }
    std::vector<Rational> gammas;
    gammas.reserve(alphas.size());
    for (const Rational& a : alphas) gammas.push_back(Rational(a * power));
    if (!moran_power_sum_is_one(base, gammas))
        fail(ErrorCode::DimensionMismatch,
             "certified exponents violate the Moran identity; the dimensions differ");
    v.status = EqStatus::Equivalent;
    v.base = base;
    v.power = power;
    v.exponents = std::move(alphas);
    v.exponents_integral = std::all_of(v.exponents.begin(), v.exponents.end(),
                                       [](const Rational& a) { return denominator(a) == 1; });
    if (v.exponents_integral)
        for (const Rational& a : v.exponents) v.integer_exponents.push_back(numerator(a));
}

} // namespace

DimensionComparison compare_dimensions(const IfsSpec& a, const IfsSpec& b, double tol) {
    validate_spec(a);
    validate_spec(b);
    DimensionComparison cmp;
    cmp.s_left = solve_dimension(a.ratios());
    cmp.s_right = solve_dimension(b.ratios());
    try {
        build_joint_context(a.ratios(), b.ratios());
        cmp.exact = true;
        cmp.verdict = DimVerdict::EqualExact;
        return cmp;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DimensionMismatch) {
            // Common ring exists but the second Moran relation fails in it.
            cmp.exact = true;
            cmp.verdict = DimVerdict::DifferentExact;
            return cmp;
        }
        if (e.code() != ErrorCode::NotCommensurable) throw;
    }
    cmp.exact = false;
    cmp.verdict = std::fabs(cmp.s_left - cmp.s_right) <= tol ? DimVerdict::EqualNumeric
                                                             : DimVerdict::DifferentNumeric;
    return cmp;
}

EquivalenceVerdict decide_homogeneous_domain(const IfsSpec& domain, const IfsSpec& target) {
    validate_spec(domain);
    validate_spec(target);
    EquivalenceVerdict v;
    v.dimension_check = compare_dimensions(domain, target);

    auto r = homogeneous_ratio(domain);
    if (!r) {
        v.status = EqStatus::Unknown;
        v.note = "domain system is not homogeneous; the rationality criterion does not apply";
        return v;
    }
    if (v.dimension_check.verdict == DimVerdict::DifferentExact ||
        v.dimension_check.verdict == DimVerdict::DifferentNumeric)
        fail(ErrorCode::DimensionMismatch, "the systems have different dimensions");

    std::vector<Rational> alphas;
    alphas.reserve(target.maps.size());
    for (const Similitude& m : target.maps) {
        auto a = is_log_rational(m.ratio, *r);
        if (!a) {
            v.status = EqStatus::Unknown;
            v.note = "log(" + format_rational(m.ratio) + ")/log(" + format_rational(*r) +
                     ") is irrational; the criterion is silent";
            return v;
        }
        alphas.push_back(*a);
    }
    attach_certificate(v, domain.maps.size(), std::move(alphas));
    v.hypothesis_used = Hypothesis::None;
    return v;
}

EquivalenceVerdict decide_with_embedding_hypothesis(const IfsSpec& k_spec, const IfsSpec& f_spec,
                                                    Hypothesis hypothesis) {
    validate_spec(k_spec);
    validate_spec(f_spec);
    if (hypothesis == Hypothesis::None)
        fail(ErrorCode::PreconditionFailed, "an embedding hypothesis must name a homogeneous side");

    const IfsSpec& stated = hypothesis == Hypothesis::HomogeneousDomain ? k_spec : f_spec;
    const IfsSpec& other = hypothesis == Hypothesis::HomogeneousDomain ? f_spec : k_spec;
    auto rho = homogeneous_ratio(stated);
    if (!rho)
        fail(ErrorCode::HypothesisNotApplicable,
             std::string("the ") +
                 (hypothesis == Hypothesis::HomogeneousDomain ? "domain" : "target") +
                 " system is not homogeneous");

    EquivalenceVerdict v;
    v.hypothesis_used = hypothesis;
    v.dimension_check = compare_dimensions(k_spec, f_spec);
    if (v.dimension_check.verdict == DimVerdict::DifferentExact ||
        v.dimension_check.verdict == DimVerdict::DifferentNumeric)
        fail(ErrorCode::DimensionMismatch, "the systems have different dimensions");

    std::vector<Rational> alphas;
    alphas.reserve(other.maps.size());
    for (const Similitude& m : other.maps) {
        auto a = is_log_rational(m.ratio, *rho);
        if (!a) {
            // An asserted embedding forces every ratio to be a rational power
            // of rho, so an irrational exponent is an inconsistency in the
            // supplied assumption, not a refutation.
            v.status = EqStatus::Unknown;
            v.inconsistency = true;
            v.note = "hypothesis asserted, but log(" + format_rational(m.ratio) + ")/log(" +
                     format_rational(*rho) + ") is irrational; assumption flagged as inconsistent";
            return v;
        }
        alphas.push_back(*a);
    }
    attach_certificate(v, stated.maps.size(), std::move(alphas));
    return v;
}

EquivalenceVerdict decide(const IfsSpec& a, const IfsSpec& b,
                          std::optional<Hypothesis> hypothesis) {
    validate_spec(a);
    validate_spec(b);

    const auto ra = sorted_ratios(a);
    const auto rb = sorted_ratios(b);
    for (const ExternalFact& f : external_registry()) {
        if ((ra == f.left && rb == f.right) || (ra == f.right && rb == f.left)) {
            EquivalenceVerdict v;
            v.status = EqStatus::NotEquivalentExternal;
            v.citation = f.citation;
            v.dimension_check = compare_dimensions(a, b);
            v.note = "recorded external fact; not derived by this library";
            return v;
        }
    }

    DimensionComparison dims = compare_dimensions(a, b);
    if (dims.verdict == DimVerdict::DifferentExact ||
        dims.verdict == DimVerdict::DifferentNumeric) {
        EquivalenceVerdict v;
        v.status = EqStatus::Unknown;
        v.dimension_check = dims;
        v.note = "dimensions differ, which rules out equivalence, but non-equivalence "
                 "certificates are outside this library's scope";
        return v;
    }

    if (hypothesis && *hypothesis != Hypothesis::None)
        return decide_with_embedding_hypothesis(a, b, *hypothesis);

    if (homogeneous_ratio(a)) return decide_homogeneous_domain(a, b);
    if (homogeneous_ratio(b)) return decide_homogeneous_domain(b, a);

    EquivalenceVerdict v;
    v.status = EqStatus::Unknown;
    v.dimension_check = dims;
    v.note = "neither system is homogeneous and no applicable record or hypothesis exists";
    return v;
}

const char* status_name(EqStatus s) {
    switch (s) {
        case EqStatus::Equivalent: return "Equivalent";
        case EqStatus::NotEquivalentExternal: return "NotEquivalentExternal";
        case EqStatus::Unknown: return "Unknown";
    }
    return "Unknown";
}

const char* hypothesis_name(Hypothesis h) {
    switch (h) {
        case Hypothesis::None: return "None";
        case Hypothesis::HomogeneousDomain: return "HomogeneousDomain";
        case Hypothesis::HomogeneousTarget: return "HomogeneousTarget";
    }
    return "None";
}

const char* dim_verdict_name(DimVerdict v) {
    switch (v) {
        case DimVerdict::EqualExact: return "EqualExact";
        case DimVerdict::EqualNumeric: return "EqualNumeric";
        case DimVerdict::DifferentExact: return "DifferentExact";
        case DimVerdict::DifferentNumeric: return "DifferentNumeric";
    }
    return "DifferentNumeric";
}

std::string verdict_to_json(const EquivalenceVerdict& v) {
    ordered_json j;
    j["status"] = status_name(v.status);
    j["hypothesis_used"] = hypothesis_name(v.hypothesis_used);
    ordered_json cert = ordered_json::object();
    if (v.status == EqStatus::Equivalent) {
        cert["base"] = v.base.str();
        cert["power"] = v.power;
        ordered_json exps = ordered_json::array();
        for (const Rational& a : v.exponents) exps.push_back(format_rational(a));
        cert["exponents"] = exps;
        cert["exponents_integral"] = v.exponents_integral;
        if (v.exponents_integral) {
            ordered_json ints = ordered_json::array();
            for (const Integer& e : v.integer_exponents) ints.push_back(e.str());
            cert["integer_exponents"] = ints;
        }
        cert["moran_replay"] = "exact";
    } else if (v.status == EqStatus::NotEquivalentExternal) {
        cert["citation"] = v.citation;
    }
    j["certificate"] = cert;
    j["dimension_check"] = v.dimension_check.exact ? "exact" : "numeric";
    j["dimension_verdict"] = dim_verdict_name(v.dimension_check.verdict);
    j["dimension_left"] = v.dimension_check.s_left;
    j["dimension_right"] = v.dimension_check.s_right;
    if (v.inconsistency) j["inconsistency"] = true;
    if (!v.note.empty()) j["note"] = v.note;
    return j.dump(2) + "\n";
}

} // namespace selfsim
