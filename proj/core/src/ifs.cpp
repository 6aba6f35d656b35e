#include "selfsim/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfsim/errors.hpp"

namespace selfsim {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Similitudes
// ---------------------------------------------------------------------------

Vec apply(const Similitude& s, const Vec& x) {
    const std::size_t d = x.size();
    Vec y(d, Rational(0));
    if (s.has_rotation()) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) y[i] += s.rotation[i][j] * x[j];
    } else {
        y = x;
    }
    for (std::size_t i = 0; i < d; ++i) y[i] = s.ratio * y[i] + s.translation[i];
    return y;
}

Similitude compose(const Similitude& outer, const Similitude& inner) {
    const std::size_t d = outer.translation.size();
    Similitude out;
    out.ratio = outer.ratio * inner.ratio;
    // rotation = R_outer * R_inner (empty matrix = identity)
    if (outer.has_rotation() && inner.has_rotation()) {
        Mat r(d, std::vector<Rational>(d, Rational(0)));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k)
                    r[i][j] += outer.rotation[i][k] * inner.rotation[k][j];
        out.rotation = std::move(r);
    } else if (outer.has_rotation()) {
        out.rotation = outer.rotation;
    } else if (inner.has_rotation()) {
        out.rotation = inner.rotation;
    }
    // translation = phi_outer(inner.translation)
    out.translation = selfsim::apply(outer, inner.translation);
    return out;
}

std::vector<Rational> IfsSpec::ratios() const {
    std::vector<Rational> r;
    r.reserve(maps.size());
    for (const auto& m : maps) r.push_back(m.ratio);
    return r;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool exactly_orthogonal(const Mat& r) {
    const std::size_t d = r.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            Rational dot(0);
            for (std::size_t k = 0; k < d; ++k) dot += r[k][i] * r[k][j];
            if (dot != Rational(i == j ? 1 : 0)) return false;
        }
    return true;
}

bool approx_orthogonal(const Mat& r, double tol) {
    const std::size_t d = r.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double dot = 0;
            for (std::size_t k = 0; k < d; ++k) dot += to_double(r[k][i]) * to_double(r[k][j]);
            if (std::abs(dot - (i == j ? 1.0 : 0.0)) > tol) return false;
        }
    return true;
}

} // namespace

void validate_spec(const IfsSpec& spec) {
    if (spec.dimension < 1)
        fail(ErrorCode::PreconditionFailed, "ambient dimension must be >= 1");
    if (spec.maps.size() < 2)
        fail(ErrorCode::PreconditionFailed, "dust-like requires >= 2 maps");
    if (spec.maps.size() > 255)
        fail(ErrorCode::PreconditionFailed, "at most 255 maps supported");
    const std::size_t d = static_cast<std::size_t>(spec.dimension);
    for (const auto& m : spec.maps) {
        if (!(m.ratio > 0 && m.ratio < 1))
            fail(ErrorCode::PreconditionFailed, "ratios must lie in (0,1)");
        if (m.translation.size() != d)
            fail(ErrorCode::PreconditionFailed, "translation size != dimension");
        if (m.has_rotation()) {
            if (m.rotation.size() != d)
                fail(ErrorCode::PreconditionFailed, "rotation shape != dimension");
            for (const auto& row : m.rotation)
                if (row.size() != d)
                    fail(ErrorCode::PreconditionFailed, "rotation shape != dimension");
            if (!exactly_orthogonal(m.rotation) && !approx_orthogonal(m.rotation, 1e-12))
                fail(ErrorCode::PreconditionFailed, "rotation is not orthogonal");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

Rational rational_from_json(const ordered_json& j, const char* what) {
    if (!j.is_string())
        fail(ErrorCode::ParseError, std::string(what) + " must be a rational string \"p/q\"");
    return parse_rational(j.get<std::string>());
}

} // namespace

IfsSpec parse_ifs_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::ParseError, "invalid JSON");
    if (!j.is_object() || !j.contains("dimension") || !j.contains("maps"))
        fail(ErrorCode::ParseError, "spec must be an object with dimension and maps");
    IfsSpec spec;
    if (!j["dimension"].is_number_integer())
        fail(ErrorCode::ParseError, "dimension must be an integer");
    spec.dimension = j["dimension"].get<int>();
    spec.label = j.value("label", std::string{});
    if (!j["maps"].is_array()) fail(ErrorCode::ParseError, "maps must be an array");
    for (const auto& jm : j["maps"]) {
        if (!jm.is_object() || !jm.contains("ratio") || !jm.contains("translation"))
            fail(ErrorCode::ParseError, "each map needs ratio and translation");
        Similitude m;
        m.ratio = rational_from_json(jm["ratio"], "ratio");
        if (!jm["translation"].is_array())
            fail(ErrorCode::ParseError, "translation must be an array");
        for (const auto& t : jm["translation"])
            m.translation.push_back(rational_from_json(t, "translation entry"));
        if (jm.contains("rotation") && !jm["rotation"].is_null()) {
            if (!jm["rotation"].is_array())
                fail(ErrorCode::ParseError, "rotation must be an array of rows or null");
            for (const auto& row : jm["rotation"]) {
                if (!row.is_array()) fail(ErrorCode::ParseError, "rotation rows must be arrays");
                std::vector<Rational> r;
                for (const auto& e : row) r.push_back(rational_from_json(e, "rotation entry"));
                m.rotation.push_back(std::move(r));
            }
        }
        spec.maps.push_back(std::move(m));
    }
    validate_spec(spec);
    return spec;
}

std::string ifs_to_json(const IfsSpec& spec) {
    ordered_json j;
    j["dimension"] = spec.dimension;
    j["label"] = spec.label;
    j["maps"] = ordered_json::array();
    for (const auto& m : spec.maps) {
        ordered_json jm;
        jm["ratio"] = format_rational(m.ratio);
        jm["translation"] = ordered_json::array();
        for (const auto& t : m.translation) jm["translation"].push_back(format_rational(t));
        if (m.has_rotation()) {
            jm["rotation"] = ordered_json::array();
            for (const auto& row : m.rotation) {
                ordered_json jr = ordered_json::array();
                for (const auto& e : row) jr.push_back(format_rational(e));
                jm["rotation"].push_back(std::move(jr));
            }
        } else {
            jm["rotation"] = nullptr;
        }
        j["maps"].push_back(std::move(jm));
    }
    return j.dump(2) + "\n";
}

IfsSpec load_ifs_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot open spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ifs_json(ss.str());
}

// ---------------------------------------------------------------------------
// Separation certificates
// ---------------------------------------------------------------------------

namespace {

// d == 1: rotations are the scalars [1] or [-1].
long line_sign(const Similitude& m) {
    if (!m.has_rotation()) return 1;
    const Rational& v = m.rotation[0][0];
    if (v == 1) return 1;
    if (v == -1) return -1;
    fail(ErrorCode::PreconditionFailed, "line rotations must be the scalar 1 or -1");
}

Rational line_apply(const Similitude& m, long sign, const Rational& x) {
    return m.ratio * Rational(sign) * x + m.translation[0];
}

// Exact convex hull of a line attractor: guess the min/max achieving
// (map, endpoint) pattern from a numeric iteration, solve exactly, verify.
std::pair<Rational, Rational> line_hull(const IfsSpec& spec) {
    const std::size_t n = spec.maps.size();
    std::vector<long> sign(n);
    std::vector<double> r(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        sign[i] = line_sign(spec.maps[i]);
        r[i] = to_double(spec.maps[i].ratio);
        t[i] = to_double(spec.maps[i].translation[0]);
    }
    // numeric interval iteration from the fixed-point spread
    double a = 1e300, b = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = t[i] / (1 - r[i] * static_cast<double>(sign[i]));
        a = std::min(a, f);
        b = std::max(b, f);
    }
    for (int it = 0; it < 400; ++it) {
        double na = 1e300, nb = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
            const double ia = r[i] * sign[i] * a + t[i];
            const double ib = r[i] * sign[i] * b + t[i];
            na = std::min({na, ia, ib});
            nb = std::max({nb, ia, ib});
        }
        a = na;
        b = nb;
    }
    // pattern: which (map, endpoint) attains each extreme
    auto scan = [&](bool want_min) {
        std::size_t bi = 0;
        int be = 0;
        double best = want_min ? 1e300 : -1e300;
        for (std::size_t i = 0; i < n; ++i)
            for (int e = 0; e < 2; ++e) {
                const double v = r[i] * sign[i] * (e ? b : a) + t[i];
                if (want_min ? v < best : v > best) {
                    best = v;
                    bi = i;
                    be = e;
                }
            }
        return std::make_pair(bi, be);
    };
    const auto [i0, e0] = scan(true);
    const auto [i1, e1] = scan(false);
    // Solve A = phi_{i0}(E0), B = phi_{i1}(E1) with E = A or B, exactly.
    // Write A = c0 + m0*X0, B = c1 + m1*X1 where X is A or B.
    const Rational m0 = spec.maps[i0].ratio * Rational(sign[i0]);
    const Rational m1 = spec.maps[i1].ratio * Rational(sign[i1]);
    const Rational c0 = spec.maps[i0].translation[0];
    const Rational c1 = spec.maps[i1].translation[0];
    // unknowns (A, B): A - m0*X0 = c0; B - m1*X1 = c1
    Rational M[2][2] = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    M[0][e0 == 0 ? 0 : 1] -= m0;
    M[1][e1 == 0 ? 0 : 1] -= m1;
    const Rational det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    if (det == 0) fail(ErrorCode::SscUnverifiable, "degenerate hull system");
    Rational A = (c0 * M[1][1] - c1 * M[0][1]) / det;
    Rational B = (M[0][0] * c1 - M[1][0] * c0) / det;
    if (A > B) std::swap(A, B);
    // exact invariance check
    Rational va = A, vb = B;
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        const Rational ia = line_apply(spec.maps[i], sign[i], A);
        const Rational ib = line_apply(spec.maps[i], sign[i], B);
        const Rational lo = std::min(ia, ib), hi = std::max(ia, ib);
        if (first) {
            va = lo;
            vb = hi;
            first = false;
        } else {
            va = std::min(va, lo);
            vb = std::max(vb, hi);
        }
    }
    if (va != A || vb != B)
        fail(ErrorCode::SscUnverifiable, "could not certify the hull interval exactly");
    return {A, B};
}

// d >= 2: exact fixed point of one similitude by Gaussian elimination on
// (I - ratio*R) p = t.
Vec fixed_point(const Similitude& m, std::size_t d) {
    std::vector<std::vector<Rational>> a(d, std::vector<Rational>(d + 1, Rational(0)));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            Rational rij = m.has_rotation() ? m.rotation[i][j] : Rational(i == j ? 1 : 0);
            a[i][j] = Rational(i == j ? 1 : 0) - m.ratio * rij;
        }
        a[i][d] = m.translation[i];
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        while (piv < d && a[piv][col] == 0) ++piv;
        if (piv == d) fail(ErrorCode::PreconditionFailed, "similitude has no fixed point");
        std::swap(a[piv], a[col]);
        for (std::size_t row = 0; row < d; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const Rational f = a[row][col] / a[col][col];
            for (std::size_t j = col; j <= d; ++j) a[row][j] -= f * a[col][j];
        }
    }
    Vec p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = a[i][d] / a[i][i];
    return p;
}

Rational dist2(const Vec& x, const Vec& y) {
    Rational s(0);
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

} // namespace

SeparationCert validate_ssc(const IfsSpec& spec) {
    validate_spec(spec);
    SeparationCert cert;
    const std::size_t d = static_cast<std::size_t>(spec.dimension);
    const std::size_t n = spec.maps.size();

    if (d == 1) {
        auto [A, B] = line_hull(spec);
        if (A == B) fail(ErrorCode::SscUnverifiable, "attractor degenerates to a point");
        struct Piece {
            Rational lo, hi;
        };
        std::vector<Piece> pieces;
        for (const auto& m : spec.maps) {
            const long s = line_sign(m);
            Rational ia = line_apply(m, s, A), ib = line_apply(m, s, B);
            if (ia > ib) std::swap(ia, ib);
            pieces.push_back({ia, ib});
        }
        std::sort(pieces.begin(), pieces.end(),
                  [](const Piece& x, const Piece& y) { return x.lo < y.lo; });
        Rational min_gap;
        bool first = true;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const Rational gap = pieces[i + 1].lo - pieces[i].hi;
            if (gap <= 0)
                fail(ErrorCode::SscUnverifiable, "first-level piece hulls touch or overlap");
            if (first || gap < min_gap) min_gap = gap;
            first = false;
        }
        cert.line_exact = true;
        cert.hull_lo = A;
        cert.hull_hi = B;
        cert.delta_lower = min_gap;
        cert.diam_lower = cert.diam_upper = B - A;
        return cert;
    }

    // d >= 2: invariant ball certificate
    std::vector<Vec> fixes;
    for (const auto& m : spec.maps) fixes.push_back(fixed_point(m, d));
    Vec c(d, Rational(0));
    for (const auto& p : fixes)
        for (std::size_t i = 0; i < d; ++i) c[i] += p[i];
    for (std::size_t i = 0; i < d; ++i) c[i] /= Rational(static_cast<long>(n));

    Rational R(0);
    std::vector<Vec> centers;
    for (const auto& m : spec.maps) {
        const Vec mc = selfsim::apply(m, c);
        centers.push_back(mc);
        const Rational u = sqrt_rational_bounds(dist2(mc, c)).second;
        const Rational need = u / (Rational(1) - m.ratio);
        R = std::max(R, need);
    }
    if (R == 0) fail(ErrorCode::SscUnverifiable, "attractor degenerates to a point");

    Rational min_sep;
    bool first = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Rational lo = sqrt_rational_bounds(dist2(centers[i], centers[j])).first;
            const Rational sep = lo - (spec.maps[i].ratio + spec.maps[j].ratio) * R;
            if (sep <= 0)
                fail(ErrorCode::SscUnverifiable, "invariant-ball images touch or overlap");
            if (first || sep < min_sep) min_sep = sep;
            first = false;
        }
    cert.delta_lower = min_sep;
    cert.ball_center = c;
    cert.ball_radius = R;
    cert.diam_upper = 2 * R;
    Rational dl(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dl = std::max(dl, sqrt_rational_bounds(dist2(fixes[i], fixes[j])).first);
    cert.diam_lower = dl;
    return cert;
}

IfsSpec normalize(const IfsSpec& spec, int depth) {
    const SeparationCert cert = validate_ssc(spec);
    const std::size_t d = static_cast<std::size_t>(spec.dimension);
    Vec p(d, Rational(0));
    Rational lambda(1);
    if (cert.line_exact) {
        p[0] = cert.hull_lo;
        lambda = cert.hull_hi - cert.hull_lo;
    } else {
        p = fixed_point(spec.maps[0], d);
        // diameter estimate from representative points at a clamped depth
        std::size_t budget = 2048, m = spec.maps.size();
        int use_depth = depth;
        while (use_depth > 1) {
            double count = std::pow(static_cast<double>(m), use_depth);
            if (count <= static_cast<double>(budget)) break;
            --use_depth;
        }
        std::vector<Vec> pts{p};
        for (int lvl = 0; lvl < use_depth; ++lvl) {
            std::vector<Vec> next;
            next.reserve(pts.size() * m);
            for (const auto& q : pts)
                for (const auto& mp : spec.maps) next.push_back(selfsim::apply(mp, q));
            pts = std::move(next);
        }
        Rational best2(0);
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const Rational q2 = dist2(pts[i], pts[j]);
                if (q2 > best2) {
                    best2 = q2;
                    bi = i;
                    bj = j;
                }
            }
        (void)bi;
        (void)bj;
        lambda = sqrt_rational_bounds(best2).second;
        if (lambda == 0) fail(ErrorCode::PreconditionFailed, "cannot normalize a point attractor");
    }
    IfsSpec out = spec;
    for (auto& m : out.maps) {
        const Vec img = selfsim::apply(m, p);
        for (std::size_t i = 0; i < d; ++i) m.translation[i] = (img[i] - p[i]) / lambda;
    }
    return out;
}

IfsSpec make_equal_gap_line_ifs(const std::vector<Rational>& ratios, const std::string& label) {
    if (ratios.size() < 2)
        fail(ErrorCode::PreconditionFailed, "dust-like requires >= 2 maps");
    Rational total(0);
    for (const auto& r : ratios) {
        if (!(r > 0 && r < 1))
            fail(ErrorCode::PreconditionFailed, "ratios must lie in (0,1)");
        total += r;
    }
    if (total >= 1)
        fail(ErrorCode::PreconditionFailed,
             "equal-gap line placement needs ratio sum < 1, got " + format_rational(total));
    const Rational gap = (Rational(1) - total) / Rational(static_cast<long>(ratios.size()) - 1);
    IfsSpec spec;
    spec.dimension = 1;
    spec.label = label;
    Rational offset(0);
    for (const auto& r : ratios) {
        Similitude m;
        m.ratio = r;
        m.translation = {offset};
        spec.maps.push_back(std::move(m));
        offset += r + gap;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

std::string format_word(const Word& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(static_cast<unsigned>(static_cast<unsigned char>(w[i])) + 1);
    }
    return out;
}

Word parse_word(const std::string& text, std::size_t alphabet_size) {
    Word w;
    if (text.empty()) return w;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t dot = text.find('.', pos);
        const std::string tok = text.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            fail(ErrorCode::ParseError, "bad word token: '" + tok + "'");
        const unsigned long v = std::stoul(tok);
        if (v < 1 || v > alphabet_size)
            fail(ErrorCode::ParseError, "letter " + tok + " outside the alphabet");
        w.push_back(static_cast<char>(v - 1));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return w;
}

Word wedge(const Word& a, const Word& b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return a.substr(0, n);
}

Rational word_ratio(const IfsSpec& spec, const Word& w) {
    Rational r(1);
    for (char c : w) r *= spec.maps[static_cast<unsigned char>(c)].ratio;
    return r;
}

// ---------------------------------------------------------------------------
// Cuts
// ---------------------------------------------------------------------------

std::optional<std::vector<long>> letter_exponents(const IfsSpec& spec, const Rational& delta) {
    std::vector<long> exps;
    for (const auto& m : spec.maps) {
        if (m.ratio == delta) {
            exps.push_back(1);
            continue;
        }
        auto q = is_log_rational(m.ratio, delta);
        if (!q || denominator(*q) != 1 || *q <= 0) return std::nullopt;
        exps.push_back(static_cast<long>(numerator(*q).convert_to<long long>()));
    }
    return exps;
}

long word_exponent(const std::vector<long>& letter_exps, const Word& w) {
    long e = 0;
    for (char c : w) e += letter_exps[static_cast<unsigned char>(c)];
    return e;
}

namespace {

void cut_dfs_int(const IfsSpec& spec, const std::vector<long>& exps, long n, Word& cur,
                 long cur_exp, std::vector<Word>& out, const Limits& limits,
                 std::uint64_t& visited) {
    if (cur_exp >= n) {
        out.push_back(cur);
        limits.check_words(out.size(), "stopping cut");
        return;
    }
    if ((++visited & 0xfff) == 0) limits.check_deadline("stopping cut");
    for (std::size_t i = 0; i < spec.maps.size(); ++i) {
        cur.push_back(static_cast<char>(i));
        cut_dfs_int(spec, exps, n, cur, cur_exp + exps[i], out, limits, visited);
        cur.pop_back();
    }
}

void cut_dfs_rat(const IfsSpec& spec, const Rational& target, Word& cur, const Rational& cur_r,
                 std::vector<Word>& out, const Limits& limits, std::uint64_t& visited) {
    if (cur_r <= target) {
        out.push_back(cur);
        limits.check_words(out.size(), "stopping cut");
        return;
    }
    if ((++visited & 0xfff) == 0) limits.check_deadline("stopping cut");
    for (std::size_t i = 0; i < spec.maps.size(); ++i) {
        cur.push_back(static_cast<char>(i));
        cut_dfs_rat(spec, target, cur, cur_r * spec.maps[i].ratio, out, limits, visited);
        cur.pop_back();
    }
}

} // namespace

Cut stopping_cut(const IfsSpec& spec, const Rational& delta, long n, const Limits& limits) {
    if (!(delta > 0 && delta < 1))
        fail(ErrorCode::PreconditionFailed, "delta must lie in (0,1)");
    if (n < 1) fail(ErrorCode::PreconditionFailed, "cut level must be >= 1");
    Cut cut;
    cut.delta = delta;
    cut.level = n;
    Word cur;
    std::uint64_t visited = 0;
    if (auto exps = letter_exponents(spec, delta)) {
        cut_dfs_int(spec, *exps, n, cur, 0, cut.words, limits, visited);
    } else {
        cut_dfs_rat(spec, pow_rational(delta, n), cur, Rational(1), cut.words, limits, visited);
    }
    return cut;
}

std::vector<Word> refine_cell(const IfsSpec& spec, const Word& word, const Rational& delta,
                              long n, const Limits& limits) {
    std::vector<Word> out;
    std::uint64_t visited = 0;
    Word cur = word;
    if (auto exps = letter_exponents(spec, delta)) {
        cut_dfs_int(spec, *exps, n, cur, word_exponent(*exps, word), out, limits, visited);
    } else {
        cut_dfs_rat(spec, pow_rational(delta, n), cur, word_ratio(spec, word), out, limits,
                    visited);
    }
    return out;
}

AlgebraicMass cut_mass(const ContextPtr& ctx, const std::vector<long>& letter_exps,
                       const std::vector<Word>& words) {
    MonomialMultiset ms;
    for (const auto& w : words) ms[word_exponent(letter_exps, w)] += 1;
    return AlgebraicMass::from_multiset(ctx, ms);
}

std::map<long, Integer> exponent_histogram(const std::vector<long>& letter_exps,
                                           const std::vector<Word>& words) {
    std::map<long, Integer> h;
    for (const auto& w : words) h[word_exponent(letter_exps, w)] += 1;
    return h;
}

// ---------------------------------------------------------------------------
// Cell geometry
// ---------------------------------------------------------------------------

namespace {

Similitude word_map(const IfsSpec& spec, const Word& w) {
    Similitude acc;
    acc.ratio = 1;
    acc.translation = Vec(static_cast<std::size_t>(spec.dimension), Rational(0));
    for (char c : w) acc = compose(acc, spec.maps[static_cast<unsigned char>(c)]);
    return acc;
}

} // namespace

std::pair<Rational, Rational> cell_interval(const IfsSpec& spec, const SeparationCert& cert,
                                            const Word& w) {
    if (!cert.line_exact)
        fail(ErrorCode::PreconditionFailed, "cell_interval requires a line system");
    const Similitude m = word_map(spec, w);
    const long s = line_sign(m);
    Rational a = line_apply(m, s, cert.hull_lo);
    Rational b = line_apply(m, s, cert.hull_hi);
    if (a > b) std::swap(a, b);
    return {a, b};
}

CellGeometry cell_geometry(const IfsSpec& spec, const SeparationCert& cert, const Word& w) {
    const Similitude m = word_map(spec, w);
    CellGeometry g;
    g.representative = m.translation; // phi_w(0)
    g.ratio = m.ratio;
    g.diam_upper = m.ratio * cert.diam_upper;
    if (cert.line_exact) {
        auto [a, b] = cell_interval(spec, cert, w);
        g.box_lo = {a};
        g.box_hi = {b};
    } else {
        const Vec c = selfsim::apply(m, cert.ball_center);
        const Rational r = m.ratio * cert.ball_radius;
        g.box_lo.resize(c.size());
        g.box_hi.resize(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            g.box_lo[i] = c[i] - r;
            g.box_hi[i] = c[i] + r;
        }
    }
    return g;
}

std::pair<Rational, Rational> cell_distance_bounds(const IfsSpec& spec,
                                                   const SeparationCert& cert,
                                                   const Word& w1, const Word& w2) {
    const Word w = wedge(w1, w2);
    if (w.size() == w1.size() || w.size() == w2.size())
        fail(ErrorCode::PrefixOverlap, "words overlap: '" + format_word(w1) + "' and '" +
                                           format_word(w2) + "'");
    const Rational lower = word_ratio(spec, w) * cert.delta_lower;
    Rational upper;
    if (cert.line_exact) {
        auto [a1, b1] = cell_interval(spec, cert, w1);
        auto [a2, b2] = cell_interval(spec, cert, w2);
        upper = std::max({Rational(0), Rational(a2 - b1), Rational(a1 - b2)});
    } else {
        const Similitude m1 = word_map(spec, w1), m2 = word_map(spec, w2);
        const Vec c1 = selfsim::apply(m1, cert.ball_center), c2 = selfsim::apply(m2, cert.ball_center);
        upper = sqrt_rational_bounds(dist2(c1, c2)).second +
                (m1.ratio + m2.ratio) * cert.ball_radius;
    }
    return {lower, upper};
}

// ---------------------------------------------------------------------------
// Prepared bundles
// ---------------------------------------------------------------------------

System prepare_system(const IfsSpec& spec) {
    System sys;
    sys.spec = spec;
    sys.cert = validate_ssc(spec);
    if (auto rr = try_ratio_root(spec.ratios())) sys.ctx = build_context(spec.ratios());
    return sys;
}

PairSystem make_pair_system(const IfsSpec& source_spec, const IfsSpec& target_spec) {
    PairSystem ps;
    ps.source = prepare_system(source_spec);
    ps.target = prepare_system(target_spec);
    const JointContext jc = build_joint_context(source_spec.ratios(), target_spec.ratios());
    ps.joint = jc.ctx;
    ps.delta = jc.ctx->ratio_root;
    ps.source_exps = jc.exponents_a;
    ps.target_exps = jc.exponents_b;
    return ps;
}

} // namespace selfsim
