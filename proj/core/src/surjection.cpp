#include "selfsim/surjection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfsim/errors.hpp"
#include "selfsim/version.hpp"

namespace selfsim {

namespace {

using ordered_json = nlohmann::ordered_json;

bool has_prefix(const Word& w, const Word& p) {
    return w.size() >= p.size() && w.compare(0, p.size(), p) == 0;
}

const TreeLevel& level_at(const PartitionTree& tree, int k) {
    if (k < 1 || k > static_cast<int>(tree.levels.size()))
        fail(ErrorCode::PreconditionFailed,
             "tree level " + std::to_string(k) + " out of range (depth " +
                 std::to_string(tree.levels.size()) + ")");
    return tree.levels[static_cast<std::size_t>(k - 1)];
}

void check_address_letters(const IfsSpec& spec, const Word& address) {
    for (char ch : address)
        if (static_cast<unsigned char>(ch) >= spec.maps.size())
            fail(ErrorCode::PreconditionFailed, "address letter out of alphabet");
}

// First prefix whose exponent reaches n; nullopt when the address runs out.
std::optional<Word> truncate_address(const std::vector<long>& exps, const Word& address, long n) {
    long e = 0;
    for (std::size_t i = 0; i < address.size(); ++i) {
        e += exps[static_cast<unsigned char>(address[i])];
        if (e >= n) return address.substr(0, i + 1);
    }
    return std::nullopt;
}

// Exact diameter on the line, certified upper bound otherwise.
Rational diameter_bound(const IfsSpec& spec, const SeparationCert& cert) {
    if (spec.dimension == 1 && cert.line_exact) return Rational(cert.hull_hi - cert.hull_lo);
    return cert.diam_upper;
}

Rational dist2_exact(const Vec& a, const Vec& b) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rational d = Rational(a[i] - b[i]);
        acc = Rational(acc + d * d);
    }
    return acc;
}

std::string format_point(const Vec& v) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ';';
        os << to_double(v[i]);
    }
    return os.str();
}

} // namespace

PartitionTree build_partition_tree(const PairSystem& psys, int depth,
                                   std::optional<int> step_c, const Limits& limits) {
    if (depth < 1)
        fail(ErrorCode::PreconditionFailed, "tree depth must be >= 1");
    int c;
    if (step_c) {
        c = *step_c;
        if (c < 1) fail(ErrorCode::PreconditionFailed, "step constant must be >= 1");
    } else {
        c = find_min_c(psys, depth, limits).c;
    }
    BuildResult br = build_levels(psys, c, depth, limits);
    PartitionTree tree;
    tree.delta = psys.delta;
    tree.step_c = br.step_c;
    tree.base_length = br.base_length;
    tree.levels = std::move(br.levels);
    return tree;
}

std::string tree_to_json(const PartitionTree& tree, const PairSystem& psys) {
    ordered_json j;
    j["version"] = kVersion;
    j["delta"] = format_rational(tree.delta);
    j["step_c"] = tree.step_c;
    j["base_length"] = tree.base_length;
    j["source_ifs"] = ordered_json::parse(ifs_to_json(psys.source.spec));
    j["target_ifs"] = ordered_json::parse(ifs_to_json(psys.target.spec));
    ordered_json levels = ordered_json::array();
    for (const TreeLevel& lvl : tree.levels) {
        ordered_json rows = ordered_json::array();
        for (const TreeRow& row : lvl.rows) {
            ordered_json r;
            r["target"] = format_word(row.target);
            ordered_json grp = ordered_json::array();
            for (const Word& w : row.group) grp.push_back(format_word(w));
            r["group"] = grp;
            rows.push_back(std::move(r));
        }
        levels.push_back(std::move(rows));
    }
    j["levels"] = std::move(levels);
    return j.dump(2) + "\n";
}

Word evaluate(const PartitionTree& tree, const PairSystem& psys, const Word& address, int k) {
    const TreeLevel& lvl = level_at(tree, k);
    check_address_letters(psys.source.spec, address);
    auto trunc = truncate_address(psys.source_exps, address, lvl.source_cut_level);
    if (!trunc)
        fail(ErrorCode::AddressTooShort,
             "address does not reach cut level " + std::to_string(lvl.source_cut_level));
    for (const TreeRow& row : lvl.rows)
        if (std::binary_search(row.group.begin(), row.group.end(), *trunc)) return row.target;
    fail(ErrorCode::PreconditionFailed,
         "cell '" + format_word(*trunc) + "' is missing from every group at level " +
             std::to_string(k));
}

bool verify_surjective(const PartitionTree& tree, const PairSystem& psys, int k,
                       const Limits& limits) {
    const TreeLevel& lvl = level_at(tree, k);
    const long tn = 1 + static_cast<long>(k - 1) * tree.step_c;
    const long sn = 1 + static_cast<long>(k) * tree.step_c;
    if (lvl.target_cut_level != tn || lvl.source_cut_level != sn) return false;

    // Targets enumerate the full target cut, each exactly once.
    Cut jcut = stopping_cut(psys.target.spec, psys.delta, tn, limits);
    std::vector<Word> targets;
    targets.reserve(lvl.rows.size());
    for (const TreeRow& row : lvl.rows) targets.push_back(row.target);
    std::sort(targets.begin(), targets.end());
    if (targets != jcut.words) return false;

    // Nonempty groups that partition the full source cut.
    Cut icut = stopping_cut(psys.source.spec, psys.delta, sn, limits);
    std::vector<Word> pooled;
    pooled.reserve(icut.words.size());
    for (const TreeRow& row : lvl.rows) {
        if (row.group.empty()) return false;
        pooled.insert(pooled.end(), row.group.begin(), row.group.end());
    }
    std::sort(pooled.begin(), pooled.end());
    if (pooled != icut.words) return false;

    // Consistency with the next level, when built: children refine both the
    // parent's target cell and the parent's group, as word sets.
    if (k < static_cast<int>(tree.levels.size())) {
        const TreeLevel& nxt = tree.levels[static_cast<std::size_t>(k)];
        std::vector<std::vector<Word>> child_groups(lvl.rows.size());
        std::vector<std::vector<Word>> child_targets(lvl.rows.size());
        for (const TreeRow& row : nxt.rows) {
            if (row.parent < 0 || row.parent >= static_cast<long>(lvl.rows.size())) return false;
            auto pi = static_cast<std::size_t>(row.parent);
            child_groups[pi].insert(child_groups[pi].end(), row.group.begin(), row.group.end());
            child_targets[pi].push_back(row.target);
        }
        for (std::size_t i = 0; i < lvl.rows.size(); ++i) {
            std::vector<Word> expect_t =
                refine_cell(psys.target.spec, lvl.rows[i].target, psys.delta,
                            nxt.target_cut_level, limits);
            std::sort(expect_t.begin(), expect_t.end());
            std::sort(child_targets[i].begin(), child_targets[i].end());
            if (expect_t != child_targets[i]) return false;

            std::vector<Word> expect_g;
            for (const Word& w : lvl.rows[i].group) {
                auto ref = refine_cell(psys.source.spec, w, psys.delta, nxt.source_cut_level,
                                       limits);
                expect_g.insert(expect_g.end(), ref.begin(), ref.end());
            }
            std::sort(expect_g.begin(), expect_g.end());
            std::sort(child_groups[i].begin(), child_groups[i].end());
            if (expect_g != child_groups[i]) return false;
        }
    }
    return true;
}

LinearityReport check_measure_linearity(const PartitionTree& tree, const PairSystem& psys,
                                        int level) {
    const TreeLevel& lvl = level_at(tree, level);
    if (lvl.rows.empty()) fail(ErrorCode::PreconditionFailed, "tree level has no rows");
    LinearityReport rep;
    AlgebraicMass common;
    bool have = false;
    for (const TreeRow& row : lvl.rows) {
        AlgebraicMass gm = cut_mass(psys.joint, psys.source_exps, row.group);
        long je = word_exponent(psys.target_exps, row.target);
        AlgebraicMass ratio = gm * AlgebraicMass::monomial(psys.joint, je).inverse();
        if (!have) {
            common = ratio;
            have = true;
            rep.c_tilde = ratio.str();
        } else if (ratio != common) {
            rep.linear = false;
            rep.witness = row.target;
            return rep;
        }
    }
    rep.linear = true;
    rep.constant_is_one = (common == AlgebraicMass::one(psys.joint));
    return rep;
}

LinearityReport check_measure_linearity(const CellMap& map, const Limits& limits) {
    PairSystem psys = make_pair_system(map.source_ifs, map.target_ifs);
    Cut jcut = stopping_cut(psys.target.spec, psys.delta, map.target_level, limits);

    // Preimage mass per target cell, exact in the joint ring.
    std::map<Word, MonomialMultiset> pre;
    for (const auto& [src, tgt] : map.table)
        pre[tgt][word_exponent(psys.source_exps, src)] += 1;

    LinearityReport rep;
    AlgebraicMass common;
    bool have = false;
    for (const Word& j : jcut.words) {
        AlgebraicMass pm = AlgebraicMass::zero(psys.joint);
        auto it = pre.find(j);
        if (it != pre.end()) pm = AlgebraicMass::from_multiset(psys.joint, it->second);
        long je = word_exponent(psys.target_exps, j);
        AlgebraicMass ratio = pm * AlgebraicMass::monomial(psys.joint, je).inverse();
        if (!have) {
            common = ratio;
            have = true;
            rep.c_tilde = ratio.str();
        } else if (ratio != common) {
            rep.linear = false;
            rep.witness = j;
            return rep;
        }
    }
    rep.linear = true;
    rep.constant_is_one = (common == AlgebraicMass::one(psys.joint));
    return rep;
}

InjectivityReport check_almost_injectivity(const PartitionTree& tree, const PairSystem& psys,
                                           int level) {
    (void)psys;
    const TreeLevel& lvl = level_at(tree, level);
    std::vector<Word> targets;
    targets.reserve(lvl.rows.size());
    for (const TreeRow& row : lvl.rows) targets.push_back(row.target);
    std::sort(targets.begin(), targets.end());
    InjectivityReport rep;
    // In sorted order any equal or nested pair shows up adjacently.
    for (std::size_t i = 0; i + 1 < targets.size(); ++i)
        if (has_prefix(targets[i + 1], targets[i]))
            rep.witnesses.emplace_back(targets[i], targets[i + 1]);
    rep.almost_injective = rep.witnesses.empty();
    return rep;
}

FragmentationResult fragmentation_index(const PartitionTree& tree, const PairSystem& psys,
                                        long n, const Limits& limits) {
    if (n < 1) fail(ErrorCode::PreconditionFailed, "cut level must be >= 1");
    Cut src = stopping_cut(psys.source.spec, psys.delta, n, limits);
    FragmentationResult res;
    res.level = n;
    long alpha = 0;
    std::size_t visited = 0;
    for (const Word& cell : src.words) {
        if ((++visited & 0xFF) == 0) limits.check_deadline("fragmentation_index");
        bool found = false;
        for (std::size_t li = 0; li < tree.levels.size() && !found; ++li) {
            const TreeLevel& lvl = tree.levels[li];
            for (const TreeRow& row : lvl.rows) {
                // Groups are lex-sorted, so first/last sharing the prefix
                // means the whole group sits inside the cell's subtree.
                if (row.group.empty()) continue;
                if (has_prefix(row.group.front(), cell) && has_prefix(row.group.back(), cell)) {
                    alpha = std::max(alpha, std::max(0L, lvl.target_cut_level - n));
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            res.bounded = false;
            res.unresolved = cell;
            return res;
        }
    }
    res.bounded = true;
    res.alpha = alpha;
    return res;
}

LipschitzReport estimate_lipschitz(const PartitionTree& tree, const PairSystem& psys,
                                   int depth_k, std::uint64_t samples, std::uint64_t seed,
                                   const std::string& csv_path) {
    const TreeLevel& lvl = level_at(tree, depth_k);
    const int c = tree.step_c;

    // Source-cut word -> target word at level depth_k.
    std::vector<std::pair<Word, Word>> index;
    for (const TreeRow& row : lvl.rows)
        for (const Word& w : row.group) index.emplace_back(w, row.target);
    std::sort(index.begin(), index.end());

    // Min target exponent per tree level: level l targets live in the cut at
    // 1+(l-1)c, whose cells have diameter <= delta^minexp * diam(F).
    std::vector<long> min_target_exp(static_cast<std::size_t>(depth_k) + 1, 0);
    for (int l = 1; l <= depth_k; ++l) {
        const TreeLevel& tl = tree.levels[static_cast<std::size_t>(l - 1)];
        long me = 0;
        bool first = true;
        for (const TreeRow& row : tl.rows) {
            long e = word_exponent(psys.target_exps, row.target);
            if (first || e < me) me = e;
            first = false;
        }
        min_target_exp[static_cast<std::size_t>(l)] = me;
    }

    const Rational diam_f = diameter_bound(psys.target.spec, psys.target.cert);
    const Rational delta_k = psys.source.cert.delta_lower;
    const double diam_f_d = to_double(diam_f);
    const double delta_k_d = to_double(delta_k);
    const double delta_d = to_double(psys.delta);
    const int dim = psys.source.spec.dimension;

    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) fail(ErrorCode::PreconditionFailed, "cannot open csv path: " + csv_path);
        csv << "x,xp,gx,gxp,ratio\n" << std::setprecision(17);
    }

    std::mt19937_64 rng(seed);
    const auto nmaps = static_cast<std::uint64_t>(psys.source.spec.maps.size());
    const std::size_t addr_len = static_cast<std::size_t>(1 + depth_k * c + 4);
    auto draw_address = [&]() {
        Word w(addr_len, '\0');
        for (std::size_t i = 0; i < addr_len; ++i)
            w[i] = static_cast<char>(rng() % nmaps);
        return w;
    };
    auto lookup = [&](const Word& w) -> const Word& {
        auto it = std::lower_bound(index.begin(), index.end(), w,
                                   [](const auto& p, const Word& key) { return p.first < key; });
        if (it == index.end() || it->first != w)
            fail(ErrorCode::PreconditionFailed, "sampled cell missing from the level's groups");
        return it->second;
    };

    LipschitzReport rep;
    rep.seed = seed;
    std::map<long, ScaleBucket> buckets;

    for (std::uint64_t s = 0; s < samples; ++s) {
        Word a = draw_address();
        Word b = draw_address();
        auto ta = truncate_address(psys.source_exps, a, lvl.source_cut_level);
        auto tb = truncate_address(psys.source_exps, b, lvl.source_cut_level);
        // Address length 1+kc+4 crosses every cut level up to 1+kc.
        if (!ta || !tb || *ta == *tb) {
            ++rep.skipped;
            continue;
        }
        const Word& ja = lookup(*ta);
        const Word& jb = lookup(*tb);

        CellGeometry gx = cell_geometry(psys.source.spec, psys.source.cert, *ta);
        CellGeometry gxp = cell_geometry(psys.source.spec, psys.source.cert, *tb);
        CellGeometry gg = cell_geometry(psys.target.spec, psys.target.cert, ja);
        CellGeometry ggp = cell_geometry(psys.target.spec, psys.target.cert, jb);

        // Deepest tree level whose source cut both addresses share.
        long ew = word_exponent(psys.source_exps, wedge(a, b));
        long k_star = 0;
        if (ew >= 1 + c) k_star = std::min<long>(depth_k, (ew - 1) / c);

        // Exact numerator bound at the separation scale.
        Rational num_bound = diam_f;
        if (k_star >= 1)
            num_bound = Rational(
                pow_rational(psys.delta, min_target_exp[static_cast<std::size_t>(k_star)]) *
                diam_f);
        bool pair_ok;
        if (dim == 1) {
            Rational dg = Rational(gg.representative[0] - ggp.representative[0]);
            if (dg < 0) dg = Rational(-dg);
            pair_ok = dg <= num_bound;
        } else {
            pair_ok = dist2_exact(gg.representative, ggp.representative) <=
                      Rational(num_bound * num_bound);
        }
        if (!pair_ok) rep.exact_numerator_ok = false;

        double num_d = std::sqrt(to_double(dist2_exact(gg.representative, ggp.representative)));
        double den_d = std::sqrt(to_double(dist2_exact(gx.representative, gxp.representative)));
        if (den_d == 0) {
            ++rep.skipped;
            continue;
        }
        double ratio = num_d / den_d;
        ++rep.samples;

        ScaleBucket& bk = buckets[k_star];
        bk.k_star = k_star;
        ++bk.pairs;
        bk.max_ratio = std::max(bk.max_ratio, ratio);
        // |x-x'| >= delta_K * delta^{(k*+1)c}: the wedge exponent of two
        // distinct cut words at level 1+k*c..(k*+1)c never exceeds (k*+1)c.
        double nb = k_star >= 1
                        ? std::pow(delta_d, static_cast<double>(
                                                min_target_exp[static_cast<std::size_t>(k_star)])) *
                              diam_f_d
                        : diam_f_d;
        bk.analytic_bound = nb / (delta_k_d * std::pow(delta_d, static_cast<double>((k_star + 1) * c)));

        if (csv.is_open())
            csv << format_point(gx.representative) << ',' << format_point(gxp.representative)
                << ',' << format_point(gg.representative) << ','
                << format_point(ggp.representative) << ',' << ratio << '\n';

        rep.sampled_max = std::max(rep.sampled_max, ratio);
    }

    for (auto& [ks, bk] : buckets) {
        rep.analytic_bound = std::max(rep.analytic_bound, bk.analytic_bound);
        rep.per_scale.push_back(bk);
    }
    return rep;
}

ExactSupResult exact_lipschitz_sup(const PartitionTree& tree, const PairSystem& psys,
                                   int depth_k) {
    if (psys.source.spec.dimension != 1 || psys.target.spec.dimension != 1 ||
        !psys.source.cert.line_exact || !psys.target.cert.line_exact)
        fail(ErrorCode::PreconditionFailed,
             "exact supremum scan requires line-exact one-dimensional systems");
    const TreeLevel& lvl = level_at(tree, depth_k);

    struct Item {
        Rational x, g;
        const Word* w;
    };
    std::vector<Item> items;
    for (const TreeRow& row : lvl.rows) {
        CellGeometry tg = cell_geometry(psys.target.spec, psys.target.cert, row.target);
        for (const Word& w : row.group) {
            CellGeometry sg = cell_geometry(psys.source.spec, psys.source.cert, w);
            items.push_back({sg.representative[0], tg.representative[0], &w});
        }
    }
    if (items.size() < 2)
        fail(ErrorCode::PreconditionFailed, "supremum scan needs at least two source cells");
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.x < b.x; });

    ExactSupResult res;
    Rational bn(0), bd(1);
    std::size_t bi = 0;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        // Distinct cut cells have disjoint intervals, so the sorted left
        // endpoints are strictly increasing and dx > 0.
        Rational dx = Rational(items[i + 1].x - items[i].x);
        Rational dg = Rational(items[i + 1].g - items[i].g);
        if (dg < 0) dg = Rational(-dg);
        if (Rational(bn * dx) < Rational(dg * bd)) {
            bn = dg;
            bd = dx;
            bi = i;
        }
    }
    res.numerator = bn;
    res.denominator = bd;
    res.sup = to_double(Rational(bn / bd));
    res.left = *items[bi].w;
    res.right = *items[bi + 1].w;
    return res;
}

CellMap cell_map_from_tree(const PartitionTree& tree, const PairSystem& psys, int level,
                           std::optional<double> lip) {
    const TreeLevel& lvl = level_at(tree, level);
    CellMap map;
    map.source_ifs = psys.source.spec;
    map.target_ifs = psys.target.spec;
    map.delta = tree.delta;
    map.source_level = lvl.source_cut_level;
    map.target_level = lvl.target_cut_level;
    map.lip = lip.value_or(1.0);
    map.lip_assumed = !lip.has_value();
    for (const TreeRow& row : lvl.rows)
        for (const Word& w : row.group) map.table.emplace_back(w, row.target);
    std::sort(map.table.begin(), map.table.end());
    return map;
}

CellMap identity_cell_map(const IfsSpec& spec, const Rational& delta, long level,
                          const Limits& limits) {
    Cut cut = stopping_cut(spec, delta, level, limits);
    CellMap map;
    map.source_ifs = spec;
    map.target_ifs = spec;
    map.delta = delta;
    map.source_level = level;
    map.target_level = level;
    for (const Word& w : cut.words) map.table.emplace_back(w, w);
    return map;
}

std::string cell_map_to_json(const CellMap& map) {
    ordered_json j;
    j["version"] = kVersion;
    j["delta"] = format_rational(map.delta);
    j["source_level"] = map.source_level;
    j["target_level"] = map.target_level;
    j["lip"] = map.lip;
    j["lip_assumed"] = map.lip_assumed;
    j["source_ifs"] = ordered_json::parse(ifs_to_json(map.source_ifs));
    j["target_ifs"] = ordered_json::parse(ifs_to_json(map.target_ifs));
    ordered_json table = ordered_json::array();
    for (const auto& [src, tgt] : map.table) {
        ordered_json row;
        row["source"] = format_word(src);
        row["target"] = format_word(tgt);
        table.push_back(std::move(row));
    }
    j["table"] = std::move(table);
    return j.dump(2) + "\n";
}

CellMap cell_map_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorCode::ParseError, std::string("invalid cell-map json: ") + e.what());
    }
    try {
        CellMap map;
        map.delta = parse_rational(j.at("delta").get<std::string>());
        map.source_level = j.at("source_level").get<long>();
        map.target_level = j.at("target_level").get<long>();
        if (j.contains("lip")) map.lip = j.at("lip").get<double>();
        if (j.contains("lip_assumed")) map.lip_assumed = j.at("lip_assumed").get<bool>();
        map.source_ifs = parse_ifs_json(j.at("source_ifs").dump());
        map.target_ifs = parse_ifs_json(j.at("target_ifs").dump());
        for (const auto& row : j.at("table")) {
            Word s = parse_word(row.at("source").get<std::string>(), map.source_ifs.maps.size());
            Word t = parse_word(row.at("target").get<std::string>(), map.target_ifs.maps.size());
            map.table.emplace_back(std::move(s), std::move(t));
        }
        std::sort(map.table.begin(), map.table.end());
        for (std::size_t i = 0; i + 1 < map.table.size(); ++i)
            if (map.table[i].first == map.table[i + 1].first)
                fail(ErrorCode::ParseError, "duplicate source word in cell-map table");
        if (map.delta <= 0 || map.delta >= 1)
            fail(ErrorCode::ParseError, "cell-map delta must lie in (0,1)");
        if (map.source_level < 1 || map.target_level < 1)
            fail(ErrorCode::ParseError, "cell-map levels must be >= 1");
        return map;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorCode::ParseError, std::string("invalid cell-map json: ") + e.what());
    }
}

RestrictionResult restrict_to_intersection(const CellMap& map,
                                           const std::function<bool(const Word&)>& keep) {
    RestrictionResult res;
    res.map = map;

    std::vector<bool> kept(map.table.size());
    bool any_kept = false;
    for (std::size_t i = 0; i < map.table.size(); ++i) {
        kept[i] = keep(map.table[i].second);
        any_kept = any_kept || kept[i];
    }
    if (!any_kept)
        fail(ErrorCode::EmptyIntersection, "no source cell maps into the kept region");

    SeparationCert tcert = validate_ssc(map.target_ifs);
    const Rational diam_f = diameter_bound(map.target_ifs, tcert);

    // Rows sorted by source word: all sources extending a prefix form one
    // contiguous range.
    auto prefix_range = [&](const Word& p) {
        auto lo = std::lower_bound(res.map.table.begin(), res.map.table.end(), p,
                                   [](const auto& row, const Word& key) { return row.first < key; });
        auto hi = lo;
        while (hi != res.map.table.end() && has_prefix(hi->first, p)) ++hi;
        return std::make_pair(lo, hi);
    };

    for (std::size_t i = 0; i < res.map.table.size(); ++i) {
        const Word before_target = map.table[i].second;
        Rational before = Rational(word_ratio(map.target_ifs, before_target) * diam_f);
        Rational after = before;
        if (!kept[i]) {
            const Word& src = map.table[i].first;
            // Nearest ancestor whose subtree still reaches the kept region.
            bool assigned = false;
            for (std::size_t plen = src.size(); !assigned; --plen) {
                Word p = src.substr(0, plen);
                auto [lo, hi] = prefix_range(p);
                const Word* best = nullptr;
                for (auto it = lo; it != hi; ++it) {
                    auto ri = static_cast<std::size_t>(it - res.map.table.begin());
                    if (!kept[ri]) continue;
                    if (!best || map.table[ri].second < *best) best = &map.table[ri].second;
                }
                if (best) {
                    res.map.table[i].second = *best;
                    res.reassigned.emplace_back(src, *best);
                    assigned = true;
                }
                if (plen == 0) break;
            }
            if (!assigned)
                fail(ErrorCode::EmptyIntersection,
                     "no kept target reachable from any ancestor of '" + format_word(src) + "'");
            // Collapsed cells map to a single point: witness diameter 0.
            after = Rational(0);
        }
        if (after > before) res.diameter_monotone = false;
        res.diameter_witness.emplace_back(before, after);
    }
    return res;
}

LocalizationReport localize(const CellMap& map, double epsilon, const Limits& limits) {
    PairSystem psys = make_pair_system(map.source_ifs, map.target_ifs);
    if (psys.delta != map.delta)
        fail(ErrorCode::PreconditionFailed,
             "cell-map delta disagrees with the pair's joint ratio root");
    Cut jcut = stopping_cut(psys.target.spec, psys.delta, map.target_level, limits);

    std::map<Word, MonomialMultiset> pre;
    std::map<Word, std::uint64_t> counts;
    for (const auto& [src, tgt] : map.table) {
        pre[tgt][word_exponent(psys.source_exps, src)] += 1;
        ++counts[tgt];
    }

    LocalizationReport rep;
    rep.epsilon = epsilon;
    rep.lip = map.lip;
    rep.lip_assumed = map.lip_assumed;
    rep.selected_level = map.target_level;

    bool have_sel = false, sel_meets = false;
    double best_density = -1;
    for (const Word& j : jcut.words) {
        CellDensity cd;
        cd.target = j;
        auto ci = counts.find(j);
        cd.preimage_count = ci == counts.end() ? 0 : ci->second;
        AlgebraicMass pm = AlgebraicMass::zero(psys.joint);
        auto pi = pre.find(j);
        if (pi != pre.end()) pm = AlgebraicMass::from_multiset(psys.joint, pi->second);
        long je = word_exponent(psys.target_exps, j);
        AlgebraicMass density = pm * AlgebraicMass::monomial(psys.joint, je).inverse();
        cd.density = density.str();
        cd.density_value = density.eval();
        rep.cells.push_back(cd);
        rep.q_bound = std::max(rep.q_bound, cd.preimage_count);

        const bool meets = cd.density_value > 1.0 - epsilon;
        bool better;
        if (!have_sel) {
            better = true;
        } else if (meets != sel_meets) {
            better = meets;
        } else if (meets) {
            // Among qualifying cells prefer the smallest preimage count.
            better = cd.preimage_count < rep.selected_count;
        } else {
            better = cd.density_value > best_density;
        }
        if (better) {
            have_sel = true;
            sel_meets = meets;
            best_density = cd.density_value;
            rep.selected = j;
            rep.selected_count = cd.preimage_count;
            rep.selected_density = cd.density_value;
        }
    }
    rep.epsilon_met = sel_meets;
    rep.delta_n = map.lip / to_double(psys.target.cert.delta_lower) *
                  std::pow(to_double(psys.delta), static_cast<double>(map.target_level));
    return rep;
}

} // namespace selfsim
