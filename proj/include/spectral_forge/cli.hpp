#pragma once

// Subcommands of the spectral-forge tool. Every report embeds the scenario
// hash, tolerance and sample count; output order never depends on threading.

#include <iomanip>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "spectral_forge/scenario.hpp"

namespace spectral_forge {

enum ExitCode : int { exit_ok = 0, exit_verification = 1, exit_input = 2, exit_unsupported = 64 };

inline int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::schema:
        case ErrorKind::domain:
        case ErrorKind::split_unstable:
        case ErrorKind::cover_mismatch: return exit_input;
        case ErrorKind::unsupported:
        case ErrorKind::puncture:
        case ErrorKind::no_surjection: return exit_unsupported;
        default: return exit_verification;
    }
}

struct CliOptions {
    std::string scenario;
    std::optional<int> samples;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::string csv;
    std::string json_path;
};

struct CommandResult {
    json report;
    bool ok = true;
    std::string csv;
};

// Finite samples away from multiple fibres.
inline std::vector<BasePoint> ordinary_samples(const FamilySpec& e, const std::vector<BasePoint>& samples) {
    std::vector<BasePoint> out;
    for (const auto& b : samples)
        if (!b.infinity && !e.surface.multiple_fibre_index(b)) out.push_back(b);
    return out;
}

inline json cover_json(const SpectralCover& c, const std::vector<BasePoint>& samples) {
    json v = json::array();
    for (const auto& x : c.verticals) v.push_back({{"at", point_json(x.at)}, {"multiplicity", x.multiplicity}});
    json pts = json::array();
    for (const auto& b : samples) {
        if (c.has_vertical_at(b) || b.infinity) continue;
        auto p = c.at(b);
        pts.push_back({{"b", point_json(b)}, {"sheets", json::array({complex_json(p.first.value()), complex_json(p.second.value())})}});
    }
    json bis;
    if (auto* h = std::get_if<HyperBisection>(&c.bisection)) {
        json f = json::array();
        for (const auto& x : h->cover->f().coefficients()) f.push_back(x.get_str());
        bis = {{"kind", "hyperelliptic"}, {"f", f}, {"genus", h->cover->genus()}, {"t_degree", h->t_degree}};
    } else {
        const auto& s = std::get<SectionPair>(c.bisection);
        bis = {{"kind", "sections"}, {"sections", json::array({complex_json(s.first.value()), complex_json(s.second.value())})}};
    }
    return {{"verticals", v}, {"vertical_total", c.vertical_total()}, {"bisection", bis}, {"points", pts}};
}

inline std::optional<BasePoint> choose_b0(const Scenario& sc, const SpectralCover& c, const std::vector<BasePoint>& samples) {
    if (sc.run.b0) return sc.run.b0;
    auto branch = branch_locus(c);
    for (const auto& b : samples) {
        if (b.infinity || c.has_vertical_at(b) || sc.surface.multiple_fibre_index(b)) continue;
        bool clear = true;
        for (Complex r : branch) clear = clear && std::abs(r - b.value()) > 0.2;
        if (clear) return b;
    }
    return std::nullopt;
}

inline CommandResult cmd_cover(const Scenario& sc, const std::vector<BasePoint>& samples) {
    const FamilySpec& e = sc.family;
    SpectralCover c = cover_from_family(e, samples, sc.run.tol);
    CommandResult r;
    r.report = cover_json(c, samples);
    r.report["n_E"] = n_invariant(e.chern);
    r.report["discriminant"] = discriminant(e.chern).get_str();
    if (sc.cover) {
        // The declared cover must agree with the one carried by the family.
        double worst = 0.0;
        bool verticals_agree = sc.cover->vertical_total() == c.vertical_total();
        for (const auto& v : sc.cover->verticals) verticals_agree = verticals_agree && c.has_vertical_at(v.at);
        for (const auto& b : ordinary_samples(e, samples)) {
            if (c.has_vertical_at(b)) continue;
            worst = std::max(worst, pair_distance(sc.cover->at(b), c.at(b)));
        }
        r.report["declared_cover_distance"] = worst;
        r.report["declared_verticals_agree"] = verticals_agree;
        r.ok = verticals_agree && worst <= sc.run.tol;
    }
    return r;
}

inline CommandResult cmd_fm(const Scenario& sc, const std::vector<BasePoint>& samples) {
    const FamilySpec& e = sc.family;
    TransformedSheaf t = fm_transform(e, samples, sc.run.tol);
    CommandResult r;
    const char* kinds[] = {"sections", "pushforward", "extension"};
    r.report = {{"support", cover_json(t.support, samples)},
                {"phi0_vanishes", t.phi0_vanishes},
                {"line_data", kinds[static_cast<int>(t.line_data.kind)]},
                {"determinant", line_bundle_json(t.determinant)},
                {"determinant_correction_flagged", t.determinant_correction_flagged},
                {"chern", {{"c1_fibre_multiple", t.chern.c1_fibre_multiple}, {"c2", t.chern.c2}}}};
    auto b0 = choose_b0(sc, t.support, samples);
    if (!b0) fail(ErrorKind::unsupported, "no admissible base point for the descent twist");
    DescentTwist tw = descent_divisor(e, *b0);
    DescentTwist off = tw;
    off.enabled = false;
    double with = z_action_residual(e, tw, default_stalks()), without = z_action_residual(e, off, default_stalks());
    r.report["descent"] = {{"b0", point_json(*b0)},
                           {"d", tw.d},
                           {"a", complex_json(tw.a.value())},
                           {"b", complex_json(tw.b.value())},
                           {"residual", with},
                           {"residual_without_twist", without}};
    r.ok = with <= sc.run.tol;
    return r;
}

inline CommandResult cmd_roundtrip(const Scenario& sc, const std::vector<BasePoint>& samples) {
    RoundtripReport rt = roundtrip_check(sc.family, samples, sc.run.tol);
    CommandResult r;
    r.report = {{"status", to_string(rt.status)},
                {"samples_compared", rt.samples},
                {"fibre_mismatches", rt.fibre_mismatches},
                {"max_spectral_distance", rt.max_spectral_distance},
                {"determinant_ok", rt.determinant_ok},
                {"chern_ok", rt.chern_ok}};
    if (!rt.note.empty()) r.report["note"] = rt.note;
    r.ok = rt.status != RoundtripStatus::fail;
    return r;
}

inline json group_json(const GroupPresentation& g) {
    return {{"structure", g.str()}, {"free_rank", g.free_rank}, {"torsion", g.torsion}, {"divisible_rank", g.divisible_rank}};
}

inline CoverPtr scenario_double_cover(const Scenario& sc) {
    if (auto* p = std::get_if<PushforwardPresentation>(&sc.family.presentation)) return p->cover;
    if (sc.cover)
        if (auto* h = std::get_if<HyperBisection>(&sc.cover->bisection)) return h->cover;
    fail(ErrorKind::unsupported, "classification needs a double cover C -> B");
}

inline CommandResult cmd_classify(const Scenario& sc) {
    CoverPtr cover = scenario_double_cover(sc);
    P2WReport g = build_P2W_groups(sc.surface, *cover);
    CommandResult r;
    json sites = json::array();
    for (std::size_t j = 0; j < g.sites.size(); ++j)
        sites.push_back({{"at", point_json(sc.surface.multiple_fibres[j].at)},
                         {"multiplicity", sc.surface.multiple_fibres[j].multiplicity},
                         {"site", g.sites[j] == FibreSite::branch ? "branch" : "non_branch"}});
    r.report = {{"prym_genus", cover->genus()},
                {"prym_rank", g.prym_rank},
                {"components", g.components},
                {"ptt_order", g.ptt.torsion_order()},
                {"exact", g.exact},
                {"groups", {{"P2W", group_json(g.p2w)}, {"P2W0", group_json(g.p2w0)}, {"PTT", group_json(g.ptt)}, {"invariant", group_json(g.invariant)}}},
                {"multiple_fibres", sites}};
    r.ok = g.exact && g.prym_rank == cover->genus();
    return r;
}

inline json jump_json(const JumpRecord& j) {
    return {{"at", point_json(j.at)}, {"h", j.height}, {"mu", j.multiplicity}, {"l", j.length}, {"sequence", j.sequence},
            {"cover_multiplicity", j.cover_multiplicity}};
}

inline FamilySpec apply_run_jumps(const Scenario& sc) {
    FamilySpec e = sc.family;
    if (!sc.run.generic_jumps.empty()) e = attach_generic_jumps(e, sc.run.generic_jumps);
    if (sc.run.assigned) e = assign_jumping_sequence(e, sc.run.assigned->first, sc.run.assigned->second);
    return e;
}

inline CommandResult cmd_modify(const Scenario& sc, int n_samples) {
    FamilySpec e = apply_run_jumps(sc);
    CommandResult r;
    json jumps = json::array();
    for (const auto& j : all_jumps(e)) jumps.push_back(jump_json(j));
    SpectralCover c = cover_from_family(e, default_samples(e, n_samples), sc.run.tol);
    r.report = {{"jumps", jumps},
                {"steps", e.modifications.size()},
                {"n_E", n_invariant(e.chern)},
                {"vertical_total", c.vertical_total()},
                {"t_degree", c.t_degree()},
                {"chern", {{"c1_fibre_multiple", e.chern.c1_fibre_multiple}, {"c2", e.chern.c2}}},
                {"determinant", line_bundle_json(e.determinant)}};
    r.ok = n_invariant(e.chern) == c.vertical_total() + c.t_degree();
    return r;
}

struct PropCheck {
    std::string name;
    bool passed = true;
    bool skipped = false;
    json detail;
};

inline std::vector<PropCheck> run_props(const Scenario& sc, const std::vector<BasePoint>& samples) {
    std::vector<PropCheck> out;
    const double tol = sc.run.tol;
    FamilySpec e = apply_run_jumps(sc);
    auto guard = [&](const std::string& name, auto&& body) {
        PropCheck c{name, true, false, json::object()};
        try {
            body(c);
        } catch (const Error& err) {
            c.passed = false;
            c.detail["error"] = to_string(err.kind());
            c.detail["message"] = err.what();
        }
        out.push_back(std::move(c));
    };

    std::optional<SpectralCover> cover;
    guard("cover_consistency", [&](PropCheck& c) {
        cover = cover_from_family(e, samples, tol);
        c.detail["vertical_total"] = cover->vertical_total();
        c.detail["t_degree"] = cover->t_degree();
        c.passed = n_invariant(e.chern) == cover->vertical_total() + cover->t_degree();
    });
    if (!cover) return out;
    const auto finite = ordinary_samples(e, samples);

    guard("invariance", [&](PropCheck& c) {
        double d = invariance_defect(*cover, e.determinant, finite);
        c.detail["defect"] = d;
        c.passed = d <= tol;
    });
    guard("perturbation_detected", [&](PropCheck& c) {
        SpectralCover bent = *cover;
        if (auto* h = std::get_if<HyperBisection>(&bent.bisection)) h->A = h->A.scaled(1.0 + 1e-3);
        else {
            auto& s = std::get<SectionPair>(bent.bisection);
            s.first = canonical_rep(s.first.value() * (1.0 + 1e-3), bent.curve);
        }
        double d = invariance_defect(bent, e.determinant, finite);
        c.detail["defect"] = d;
        c.passed = d > tol;
    });
    guard("regular_fibres", [&](PropCheck& c) {
        int irregular = 0;
        for (const auto& b : finite)
            if (!cover->has_vertical_at(b) && !is_regular(fiber_class_at(e, b))) ++irregular;
        c.detail["irregular"] = irregular;
        c.passed = irregular == 0 || std::holds_alternative<SplitPresentation>(e.presentation);
    });
    guard("descent", [&](PropCheck& c) {
        auto b0 = choose_b0(sc, *cover, samples);
        if (!b0) {
            c.skipped = true;
            return;
        }
        DescentTwist tw = descent_divisor(e, *b0);
        DescentTwist off = tw;
        off.enabled = false;
        double with = z_action_residual(e, tw, default_stalks()), without = z_action_residual(e, off, default_stalks());
        c.detail = {{"residual", with}, {"residual_without_twist", without}};
        c.passed = with <= tol && without > 0.1;
    });
    guard("roundtrip", [&](PropCheck& c) {
        RoundtripReport rt = roundtrip_check(e, samples, tol);
        c.detail["status"] = to_string(rt.status);
        c.skipped = rt.status == RoundtripStatus::hypothesis_violated;
        c.passed = rt.status != RoundtripStatus::fail;
    });
    guard("jump_calculus", [&](PropCheck& c) {
        json jumps = json::array();
        for (const auto& j : all_jumps(e)) {
            jumps.push_back(jump_json(j));
            int sum = 0;
            for (int h : j.sequence) sum += h;
            bool ok = sum == j.multiplicity && std::is_sorted(j.sequence.rbegin(), j.sequence.rend()) && j.height <= j.multiplicity;
            // Pushing the current height and popping it again restores the sequence.
            FamilySpec pushed = push_jump(e, j.at, j.height);
            ok = ok && jumping_sequence(allowable_mod(pushed, j.at), j.at).sequence == j.sequence;
            ok = ok && jumping_sequence(pushed, j.at).length == j.length + 1;
            c.passed = c.passed && ok;
        }
        c.detail["jumps"] = jumps;
    });
    guard("prym_invisibility", [&](PropCheck& c) {
        auto* p = std::get_if<PushforwardPresentation>(&e.presentation);
        if (!p) {
            c.skipped = true;
            return;
        }
        auto points = integral_x_points(*p->cover, 40);
        if (points.empty()) {
            c.skipped = true;
            return;
        }
        std::mt19937_64 rng(sc.run.seed);
        std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
        std::uniform_int_distribution<int> coef(-3, 3);
        int changed = 0;
        for (int k = 0; k < sc.run.prym_twists; ++k) {
            DivisorClass d = DivisorClass::zero(p->cover);
            for (int i = 0; i < 4; ++i) d = class_add(d, class_scale(DivisorClass::point(p->cover, points[pick(rng)]), coef(rng)));
            FamilySpec t = twist_pushforward(e, d);
            SpectralCover ct = cover_from_family(t, samples, tol);
            bool same = t.determinant.same_as(e.determinant, e.surface);
            for (const auto& b : finite)
                if (!cover->has_vertical_at(b)) same = same && pair_distance(ct.at(b), cover->at(b)) <= tol;
            if (!same) ++changed;
        }
        FamilySpec deg1 = twist_pushforward(e, DivisorClass::effective_point(p->cover, points.front()));
        bool visible = !deg1.determinant.same_as(e.determinant, e.surface);
        c.detail = {{"twists", sc.run.prym_twists}, {"changed", changed}, {"degree_one_visible", visible}};
        c.passed = changed == 0 && visible;
    });
    return out;
}

inline CommandResult cmd_props(const Scenario& sc, const std::vector<BasePoint>& samples) {
    CommandResult r;
    json checks = json::array();
    for (const auto& c : run_props(sc, samples)) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped}, {"detail", c.detail}});
        r.ok = r.ok && c.passed;
    }
    r.report["checks"] = checks;
    return r;
}

inline std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline CommandResult cmd_sample(const Scenario& sc, const std::vector<BasePoint>& samples) {
    SpectralCover c = cover_from_family(sc.family, samples, sc.run.tol);
    CommandResult r;
    std::ostringstream csv;
    csv << "b_re,b_im,sheet,alpha_re,alpha_im\n";
    int rows = 0;
    for (const auto& b : ordinary_samples(sc.family, samples)) {
        if (c.has_vertical_at(b)) continue;
        auto p = c.at(b);
        int sheet = 0;
        for (const TatePoint& a : {p.first, p.second}) {
            csv << format_double(b.value().real()) << ',' << format_double(b.value().imag()) << ',' << sheet++ << ','
                << format_double(a.value().real()) << ',' << format_double(a.value().imag()) << '\n';
            ++rows;
        }
    }
    r.csv = csv.str();
    r.report = {{"rows", rows}, {"columns", json::array({"b_re", "b_im", "sheet", "alpha_re", "alpha_im"})}};
    return r;
}

inline int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral covers and Fourier-Mukai data of rank-2 bundles on elliptic surfaces", "spectral-forge"};
    app.require_subcommand(1, 1);
    CliOptions o;
    int samples = 32;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"cover", "spectral cover of the scenario family"},
        {"fm", "Fourier-Mukai transform and descent twist"},
        {"roundtrip", "inverse transform after transform"},
        {"classify", "groups parametrising bundles with a given cover"},
        {"modify", "jump data after elementary modifications"},
        {"props", "run the invariant suite"},
        {"sample", "sampled cover points as CSV"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--scenario", o.scenario, "scenario JSON")->required();
        s->add_option("--samples", samples, "number of base samples")->check(CLI::PositiveNumber);
        s->add_option("--tol", tol, "tolerance")->check(CLI::PositiveNumber);
        s->add_option("--seed", seed, "random seed");
        s->add_option("--csv", o.csv, "CSV output path");
        s->add_option("--json", o.json_path, "JSON report path");
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    if (sub->count("--samples")) o.samples = samples;
    if (sub->count("--tol")) o.tol = tol;
    if (sub->count("--seed")) o.seed = seed;

    try {
        std::ifstream in(o.scenario);
        if (!in) schema_error("cannot open scenario '" + o.scenario + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            schema_error(std::string("scenario is not valid JSON: ") + e.what());
        }
        const std::string hash = fnv1a_hex(doc.dump());
        if (!doc.is_object()) schema_error("scenario must be a JSON object");
        if (o.samples) doc["run"]["samples"] = *o.samples;
        if (o.tol) doc["run"]["tol"] = *o.tol;
        if (o.seed) doc["run"]["seed"] = *o.seed;
        Scenario sc = [&] {
            try {
                return parse_scenario(doc);
            } catch (const json::exception& e) {
                schema_error(e.what());
            }
        }();
        sc.hash = hash;
        if (sc.declared_determinant && !sc.declared_determinant->same_as(sc.family.determinant, sc.surface))
            fail(ErrorKind::inconsistent_family, "declared determinant differs from the family determinant");

        const std::vector<BasePoint> samples_list = default_samples(sc.family, sc.run.samples);
        CommandResult r;
        if (command == "cover") r = cmd_cover(sc, samples_list);
        else if (command == "fm") r = cmd_fm(sc, samples_list);
        else if (command == "roundtrip") r = cmd_roundtrip(sc, samples_list);
        else if (command == "classify") r = cmd_classify(sc);
        else if (command == "modify") r = cmd_modify(sc, sc.run.samples);
        else if (command == "props") r = cmd_props(sc, samples_list);
        else r = cmd_sample(sc, samples_list);

        json report = {{"command", command},
                       {"scenario_hash", hash},
                       {"tolerance", sc.run.tol},
                       {"samples", sc.run.samples},
                       {"seed", sc.run.seed},
                       {"ok", r.ok}};
        report.update(r.report);
        const std::string text = report.dump(2) + "\n";
        if (!o.json_path.empty()) {
            std::ofstream f(o.json_path);
            if (!f) schema_error("cannot write '" + o.json_path + "'");
            f << text;
        }
        if (command == "sample") {
            if (!o.csv.empty()) {
                std::ofstream f(o.csv);
                if (!f) schema_error("cannot write '" + o.csv + "'");
                f << r.csv;
                out << text;
            } else {
                out << r.csv;
            }
        } else {
            out << text;
        }
        return r.ok ? exit_ok : exit_verification;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    }
}

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"spectral-forge"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_command(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spectral_forge
