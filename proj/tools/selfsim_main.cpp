// Command-line front end: ingest IFS spec files, run the library pipelines,
// emit deterministic JSON reports.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "selfsim/equivalence.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/massdecomp.hpp"
#include "selfsim/polynomial.hpp"
#include "selfsim/surjection.hpp"
#include "selfsim/version.hpp"

namespace {

using namespace selfsim;
using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::ParseError, "cannot read file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct LoadedSpec {
    std::string path;
    std::string hash;
    IfsSpec spec;
};

LoadedSpec load_spec(const std::string& path) {
    LoadedSpec ls;
    ls.path = path;
    const std::string content = read_file(path);
    ls.hash = fnv1a64_hex(content);
    ls.spec = parse_ifs_json(content);
    validate_spec(ls.spec);
    return ls;
}

ordered_json meta(const std::string& command, const std::vector<const LoadedSpec*>& inputs) {
    ordered_json j;
    j["version"] = kVersion;
    j["command"] = command;
    ordered_json ins = ordered_json::array();
    for (const LoadedSpec* ls : inputs) {
        ordered_json e;
        e["path"] = ls->path;
        e["fnv1a64"] = ls->hash;
        ins.push_back(std::move(e));
    }
    j["inputs"] = std::move(ins);
    return j;
}

long env_long(const char* name, long fallback, long lo) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    long parsed = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || parsed < lo)
        fail(ErrorCode::ParseError, std::string(name) + " has an invalid value: " + v);
    return parsed;
}

double env_double(const char* name, double fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    double parsed = std::strtod(v, &end);
    if (end == v || *end != '\0' || !(parsed > 0))
        fail(ErrorCode::ParseError, std::string(name) + " has an invalid value: " + v);
    return parsed;
}

Limits make_limits() {
    Limits lim;
    lim.word_budget = static_cast<std::size_t>(
        env_long("SELFSIM_WORD_BUDGET", static_cast<long>(lim.word_budget), 1));
    lim.c_max = static_cast<int>(env_long("SELFSIM_C_MAX", lim.c_max, 1));
    lim.time_budget_seconds = env_double("SELFSIM_TIME_BUDGET", lim.time_budget_seconds);
    return lim.with_deadline();
}

void emit(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) fail(ErrorCode::ParseError, "cannot write file: " + out_path);
        f << text;
    }
}

void emit(const ordered_json& j, const std::string& out_path) {
    emit(j.dump(2) + "\n", out_path);
}

// ---------------------------------------------------------------------------
// dim
// ---------------------------------------------------------------------------

int run_dim(const std::string& spec_path, const std::string& out_path) {
    LoadedSpec ls = load_spec(spec_path);
    ordered_json j = meta("dim", {&ls});
    j["label"] = ls.spec.label;
    j["map_count"] = ls.spec.maps.size();
    j["dimension"] = solve_dimension(ls.spec.ratios());
    auto rr = try_ratio_root(ls.spec.ratios());
    j["commensurable"] = rr.has_value();
    if (rr) {
        ContextPtr ctx = build_context(ls.spec.ratios());
        j["ratio_root"] = format_rational(ctx->ratio_root);
        ordered_json exps = ordered_json::array();
        for (long e : ctx->exponents) exps.push_back(e);
        j["letter_exponents"] = std::move(exps);
        j["moran_poly"] = poly_to_string(ctx->moran_poly);
        j["min_poly"] = poly_to_string(ctx->min_poly);
        j["x_value"] = ctx->x_value;
        j["x_interval"] = {format_rational(ctx->x_lo), format_rational(ctx->x_hi)};
        j["s_value"] = ctx->s_value;
    }
    emit(j, out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// equiv
// ---------------------------------------------------------------------------

int run_equiv(const std::string& k_path, const std::string& f_path,
              const std::string& hypothesis, const std::string& out_path) {
    LoadedSpec k = load_spec(k_path);
    LoadedSpec f = load_spec(f_path);
    std::optional<Hypothesis> hyp;
    if (hypothesis == "homogeneous-domain") hyp = Hypothesis::HomogeneousDomain;
    else if (hypothesis == "homogeneous-target") hyp = Hypothesis::HomogeneousTarget;
    else if (!hypothesis.empty())
        fail(ErrorCode::ParseError, "unknown hypothesis: " + hypothesis);
    EquivalenceVerdict v = decide(k.spec, f.spec, hyp);
    ordered_json j = meta("equiv", {&k, &f});
    j.update(ordered_json::parse(verdict_to_json(v)));
    emit(j, out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

std::vector<Word> words_of_length(const IfsSpec& spec, int h, const Limits& lim) {
    std::vector<Word> out;
    Word cur;
    auto rec = [&](auto&& self, int rem) -> void {
        if (rem == 0) {
            out.push_back(cur);
            lim.check_words(out.size(), "decompose word enumeration");
            return;
        }
        for (std::size_t i = 0; i < spec.maps.size(); ++i) {
            cur.push_back(static_cast<char>(i));
            self(self, rem - 1);
            cur.pop_back();
        }
    };
    rec(rec, h);
    return out;
}

int run_decompose(const std::string& k_path, const std::string& f_path, bool find_c,
                  int horizon, const std::string& out_path) {
    LoadedSpec k = load_spec(k_path);
    LoadedSpec f = load_spec(f_path);
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    ordered_json j = meta(find_c ? "decompose --find-c" : "decompose", {&k, &f});
    j["delta"] = format_rational(psys.delta);

    if (find_c) {
        FindCResult fc = find_min_c(psys, horizon, lim);
        j["horizon"] = horizon;
        j["c"] = fc.c;
        j["forced_lower_bound"] = fc.forced_lower_bound;
        j["base_length"] = fc.base_length;
        emit(j, out_path);
        return 0;
    }

    const int h = find_base_length(psys, lim);
    j["base_length"] = h;
    Cut j1 = stopping_cut(psys.target.spec, psys.delta, 1, lim);
    std::vector<AlgebraicMass> targets;
    targets.reserve(j1.words.size());
    for (const Word& w : j1.words)
        targets.push_back(
            AlgebraicMass::monomial(psys.joint, word_exponent(psys.target_exps, w)));
    std::vector<Word> pool = words_of_length(psys.source.spec, h, lim);
    std::vector<std::vector<Word>> groups = decompose(psys, pool, 0, targets, lim);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < groups.size(); ++i) {
        ordered_json row;
        row["target"] = format_word(j1.words[i]);
        row["mass"] = targets[i].str();
        ordered_json grp = ordered_json::array();
        for (const Word& w : groups[i]) grp.push_back(format_word(w));
        row["group"] = std::move(grp);
        rows.push_back(std::move(row));
    }
    j["groups"] = std::move(rows);
    emit(j, out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// surject
// ---------------------------------------------------------------------------

struct SurjectArgs {
    std::string k_path, f_path, out_path, csv_path, address;
    int depth = 2;
    int level = 0; // 0 = all (verify) / deepest (eval, lipschitz, map)
    int step_c = 0; // 0 = auto
    std::uint64_t samples = 10000;
    std::uint64_t seed = 1;
    double lip = 0; // 0 = unset
};

PartitionTree build_tree(const PairSystem& psys, const SurjectArgs& a, const Limits& lim) {
    std::optional<int> c;
    if (a.step_c > 0) c = a.step_c;
    return build_partition_tree(psys, a.depth, c, lim);
}

ordered_json lipschitz_json(const LipschitzReport& rep) {
    ordered_json l;
    l["sampled_max"] = rep.sampled_max;
    l["analytic_bound"] = rep.analytic_bound;
    l["samples"] = rep.samples;
    l["seed"] = rep.seed;
    l["skipped"] = rep.skipped;
    l["exact_numerator_ok"] = rep.exact_numerator_ok;
    ordered_json scales = ordered_json::array();
    for (const ScaleBucket& b : rep.per_scale) {
        ordered_json s;
        s["k_star"] = b.k_star;
        s["pairs"] = b.pairs;
        s["max_ratio"] = b.max_ratio;
        s["analytic_bound"] = b.analytic_bound;
        scales.push_back(std::move(s));
    }
    l["per_scale"] = std::move(scales);
    return l;
}

int run_surject_build(const LoadedSpec& k, const LoadedSpec& f, const SurjectArgs& a) {
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    PartitionTree tree = build_tree(psys, a, lim);
    emit(tree_to_json(tree, psys), a.out_path);
    return 0;
}

int run_surject_verify(const LoadedSpec& k, const LoadedSpec& f, const SurjectArgs& a) {
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    PartitionTree tree = build_tree(psys, a, lim);
    ordered_json j = meta("surject verify", {&k, &f});
    j["depth"] = a.depth;
    j["step_c"] = tree.step_c;
    j["base_length"] = tree.base_length;
    bool all_ok = true;
    ordered_json levels = ordered_json::array();
    const int lo = a.level > 0 ? a.level : 1;
    const int hi = a.level > 0 ? a.level : a.depth;
    for (int lvl = lo; lvl <= hi; ++lvl) {
        ordered_json r;
        r["level"] = lvl;
        const bool surj = verify_surjective(tree, psys, lvl, lim);
        LinearityReport lin = check_measure_linearity(tree, psys, lvl);
        InjectivityReport inj = check_almost_injectivity(tree, psys, lvl);
        r["surjective"] = surj;
        r["mass_exact"] = lin.linear && lin.constant_is_one;
        r["c_tilde"] = lin.c_tilde;
        FragmentationResult fr =
            fragmentation_index(tree, psys, tree.levels[lvl - 1].target_cut_level, lim);
        if (fr.bounded) {
            r["alpha"] = fr.alpha;
        } else {
            r["alpha"] = nullptr;
            r["alpha_unresolved_cell"] = format_word(*fr.unresolved);
        }
        r["almost_injective"] = inj.almost_injective;
        if (a.samples > 0) {
            LipschitzReport lp = estimate_lipschitz(tree, psys, lvl, a.samples, a.seed, "");
            r["lipschitz"] = lipschitz_json(lp);
            all_ok = all_ok && lp.exact_numerator_ok;
        } else {
            r["lipschitz"] = nullptr;
        }
        all_ok = all_ok && surj && lin.linear && lin.constant_is_one && inj.almost_injective;
        levels.push_back(std::move(r));
    }
    j["levels"] = std::move(levels);
    j["all_checks_passed"] = all_ok;
    emit(j, a.out_path);
    return all_ok ? 0 : 1;
}

int run_surject_eval(const LoadedSpec& k, const LoadedSpec& f, const SurjectArgs& a) {
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    PartitionTree tree = build_tree(psys, a, lim);
    const Word address = parse_word(a.address, psys.source.spec.maps.size());
    const int deepest = a.level > 0 ? a.level : a.depth;
    ordered_json j = meta("surject eval", {&k, &f});
    j["address"] = format_word(address);
    ordered_json outs = ordered_json::array();
    for (int lvl = 1; lvl <= deepest; ++lvl) {
        ordered_json o;
        o["level"] = lvl;
        o["target"] = format_word(evaluate(tree, psys, address, lvl));
        outs.push_back(std::move(o));
    }
    j["targets"] = std::move(outs);
    emit(j, a.out_path);
    return 0;
}

int run_surject_lipschitz(const LoadedSpec& k, const LoadedSpec& f, const SurjectArgs& a) {
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    PartitionTree tree = build_tree(psys, a, lim);
    const int lvl = a.level > 0 ? a.level : a.depth;
    LipschitzReport rep = estimate_lipschitz(tree, psys, lvl, a.samples, a.seed, a.csv_path);
    ordered_json j = meta("surject lipschitz", {&k, &f});
    j["depth"] = a.depth;
    j["level"] = lvl;
    j["step_c"] = tree.step_c;
    j.update(lipschitz_json(rep));
    if (psys.source.spec.dimension == 1 && psys.target.spec.dimension == 1 &&
        psys.source.cert.line_exact && psys.target.cert.line_exact) {
        ExactSupResult sup = exact_lipschitz_sup(tree, psys, lvl);
        j["exact_sup"] = sup.sup;
        j["exact_sup_ratio"] = format_rational(Rational(sup.numerator / sup.denominator));
        j["exact_sup_witness"] = {format_word(sup.left), format_word(sup.right)};
    }
    if (!a.csv_path.empty()) j["csv"] = a.csv_path;
    emit(j, a.out_path);
    return rep.exact_numerator_ok ? 0 : 1;
}

int run_surject_map(const LoadedSpec& k, const LoadedSpec& f, const SurjectArgs& a) {
    const Limits lim = make_limits();
    PairSystem psys = make_pair_system(k.spec, f.spec);
    PartitionTree tree = build_tree(psys, a, lim);
    const int lvl = a.level > 0 ? a.level : a.depth;
    std::optional<double> lip;
    if (a.lip > 0) lip = a.lip;
    CellMap map = cell_map_from_tree(tree, psys, lvl, lip);
    emit(cell_map_to_json(map), a.out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// localize
// ---------------------------------------------------------------------------

int run_localize(const std::string& map_path, double epsilon, const std::string& out_path) {
    const std::string content = read_file(map_path);
    CellMap map = cell_map_from_json(content);
    const Limits lim = make_limits();
    LocalizationReport rep = localize(map, epsilon, lim);
    ordered_json j;
    j["version"] = kVersion;
    j["command"] = "localize";
    ordered_json ins = ordered_json::array();
    {
        ordered_json e;
        e["path"] = map_path;
        e["fnv1a64"] = fnv1a64_hex(content);
        ins.push_back(std::move(e));
    }
    j["inputs"] = std::move(ins);
    j["epsilon"] = rep.epsilon;
    j["epsilon_met"] = rep.epsilon_met;
    j["selected"] = format_word(rep.selected);
    j["selected_level"] = rep.selected_level;
    j["selected_count"] = rep.selected_count;
    j["selected_density"] = rep.selected_density;
    j["q_bound"] = rep.q_bound;
    j["delta_n"] = rep.delta_n;
    j["lip"] = rep.lip;
    j["lip_assumed"] = rep.lip_assumed;
    ordered_json cells = ordered_json::array();
    for (const CellDensity& cd : rep.cells) {
        ordered_json c;
        c["target"] = format_word(cd.target);
        c["preimage_count"] = cd.preimage_count;
        c["density"] = cd.density;
        c["density_value"] = cd.density_value;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);
    emit(j, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-arithmetic toolkit for dust-like self-similar sets: dimensions, "
                 "mass decomposition, hierarchical surjections, equivalence certificates."};
    app.require_subcommand(1);

    std::string spec_a, spec_b, out_path, hypothesis, map_path;
    double epsilon = 0.1;
    bool find_c = false;
    int horizon = 2;
    SurjectArgs sa;

    CLI::App* dim = app.add_subcommand("dim", "Dimension and coefficient-ring report");
    dim->add_option("spec", spec_a, "IFS spec file")->required();
    dim->add_option("--out", out_path, "also write the report to this file");

    CLI::App* equiv = app.add_subcommand("equiv", "Lipschitz-equivalence decision");
    equiv->add_option("spec_k", spec_a, "first IFS spec file")->required();
    equiv->add_option("spec_f", spec_b, "second IFS spec file")->required();
    equiv->add_option("--hypothesis", hypothesis,
                      "assume a positive-measure Lipschitz map exists "
                      "(homogeneous-domain | homogeneous-target)");
    equiv->add_option("--out", out_path, "also write the report to this file");

    CLI::App* dec = app.add_subcommand("decompose", "Base group partition / minimal step constant");
    dec->add_option("spec_k", spec_a, "source IFS spec file")->required();
    dec->add_option("spec_f", spec_b, "target IFS spec file")->required();
    dec->add_flag("--find-c", find_c, "search the smallest feasible step constant");
    dec->add_option("--horizon", horizon, "tree depth the step constant must support")
        ->check(CLI::PositiveNumber);
    dec->add_option("--out", out_path, "also write the report to this file");

    CLI::App* surject = app.add_subcommand("surject", "Hierarchical surjection pipelines");
    surject->require_subcommand(1);
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("spec_k", sa.k_path, "source IFS spec file")->required();
        cmd->add_option("spec_f", sa.f_path, "target IFS spec file")->required();
        cmd->add_option("--depth", sa.depth, "tree depth")->check(CLI::PositiveNumber);
        cmd->add_option("--c", sa.step_c, "step constant (default: smallest feasible)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--out", sa.out_path, "also write the output to this file");
    };
    CLI::App* sbuild = surject->add_subcommand("build", "Build and print the partition tree");
    add_common(sbuild);
    CLI::App* sverify = surject->add_subcommand("verify", "Verify structural invariants");
    add_common(sverify);
    sverify->add_option("--level", sa.level, "verify only this level")->check(CLI::PositiveNumber);
    sverify->add_option("--samples", sa.samples, "Lipschitz sample pairs per level (0 = skip)")
        ->default_val(std::uint64_t{0});
    sverify->add_option("--seed", sa.seed, "sampling seed");
    CLI::App* seval = surject->add_subcommand("eval", "Evaluate the map on an address");
    add_common(seval);
    seval->add_option("--address", sa.address, "dot-separated 1-based address")->required();
    seval->add_option("--level", sa.level, "deepest level to report")->check(CLI::PositiveNumber);
    CLI::App* slip = surject->add_subcommand("lipschitz", "Sample distortion ratios");
    add_common(slip);
    slip->add_option("--level", sa.level, "tree level to sample at (default: depth)")
        ->check(CLI::PositiveNumber);
    slip->add_option("--samples", sa.samples, "number of sampled pairs");
    slip->add_option("--seed", sa.seed, "sampling seed");
    slip->add_option("--csv", sa.csv_path, "write sampled pairs to this CSV file");
    CLI::App* smap = surject->add_subcommand("map", "Export a flat cell map at a level");
    add_common(smap);
    smap->add_option("--level", sa.level, "tree level to export (default: depth)")
        ->check(CLI::PositiveNumber);
    smap->add_option("--lip", sa.lip, "record this Lipschitz constant in the map");

    CLI::App* loc = app.add_subcommand("localize", "High-density cell selection on a cell map");
    loc->add_option("map", map_path, "cell-map JSON file")->required();
    loc->add_option("--epsilon", epsilon, "density threshold parameter")->required();
    loc->add_option("--out", out_path, "also write the report to this file");

    try {
        app.parse(argc, argv);
        if (dim->parsed()) return run_dim(spec_a, out_path);
        if (equiv->parsed()) return run_equiv(spec_a, spec_b, hypothesis, out_path);
        if (dec->parsed()) return run_decompose(spec_a, spec_b, find_c, horizon, out_path);
        if (surject->parsed()) {
            LoadedSpec k = load_spec(sa.k_path);
            LoadedSpec f = load_spec(sa.f_path);
            if (sbuild->parsed()) return run_surject_build(k, f, sa);
            if (sverify->parsed()) return run_surject_verify(k, f, sa);
            if (seval->parsed()) return run_surject_eval(k, f, sa);
            if (slip->parsed()) return run_surject_lipschitz(k, f, sa);
            if (smap->parsed()) return run_surject_map(k, f, sa);
        }
        if (loc->parsed()) return run_localize(map_path, epsilon, out_path);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
