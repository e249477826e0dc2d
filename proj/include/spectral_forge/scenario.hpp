#pragma once

// Scenario documents: a JSON description of a surface, a family on it and the
// run parameters, parsed into library objects.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spectral_forge/fourier_mukai.hpp"
#include "spectral_forge/modifications.hpp"

namespace spectral_forge {

using json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& what) { fail(ErrorKind::schema, what); }

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline double number(const json& j, const char* what) {
    if (!j.is_number()) schema_error(std::string(what) + " must be a number");
    return j.get<double>();
}

inline long integer(const json& j, const char* what) {
    if (!j.is_number_integer()) schema_error(std::string(what) + " must be an integer");
    return j.get<long>();
}

// [re, im] or a bare real number.
inline Complex parse_complex(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema_error("complex numbers are [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

// "p/q", an integer, or [num, den].
inline Rational parse_rational(const json& j) {
    Rational r;
    if (j.is_number_integer()) {
        r = Rational(j.get<long>());
    } else if (j.is_string()) {
        try {
            r = Rational(j.get<std::string>());
        } catch (const std::invalid_argument&) {
            schema_error("bad rational '" + j.get<std::string>() + "'");
        }
        if (r.get_den() == 0) schema_error("zero denominator");
    } else if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
        if (j[1].get<long>() == 0) schema_error("zero denominator");
        r = Rational(j[0].get<long>(), j[1].get<long>());
    } else {
        schema_error("rationals are integers, \"p/q\" strings or [num, den]");
    }
    r.canonicalize();
    return r;
}

// "inf", a real rational, or [re_num, re_den, im_num, im_den].
inline BasePoint parse_point(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return BasePoint::at_infinity();
    if (j.is_array() && j.size() == 4) {
        Rational re = parse_rational(json::array({j[0], j[1]})), im = parse_rational(json::array({j[2], j[3]}));
        return {re, im, false};
    }
    return BasePoint::real(parse_rational(j));
}

inline json point_json(const BasePoint& b) {
    if (b.infinity) return "inf";
    if (b.im == 0) return b.re.get_str();
    return json::array({b.re.get_num().get_si(), b.re.get_den().get_si(), b.im.get_num().get_si(), b.im.get_den().get_si()});
}

// Exact polynomial over Q: entries are rationals or [re_num, re_den, im_num, im_den] with zero imaginary part.
inline QPoly parse_qpoly(const json& j) {
    if (!j.is_array() || j.empty()) schema_error("polynomials are non-empty ascending coefficient arrays");
    std::vector<Rational> c;
    for (const auto& x : j) {
        if (x.is_array() && x.size() == 4) {
            if (parse_rational(json::array({x[2], x[3]})) != 0) schema_error("the cover polynomial must be real");
            c.push_back(parse_rational(json::array({x[0], x[1]})));
        } else {
            c.push_back(parse_rational(x));
        }
    }
    return QPoly(c);
}

inline CPoly parse_cpoly(const json& j) {
    if (!j.is_array()) schema_error("complex polynomials are arrays of [re, im]");
    CPoly p;
    for (const auto& x : j) p.c.push_back(parse_complex(x));
    return p;
}

inline CoverPtr parse_cover(const json& j) {
    try {
        return make_cover(parse_qpoly(field(j, "f")));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::domain) schema_error(std::string("cover: ") + e.what());
        throw;
    }
}

inline SurfaceSpec parse_surface(const json& j) {
    Complex tau = parse_complex(field(j, "tau"));
    int d = j.contains("theta_degree") ? static_cast<int>(integer(j["theta_degree"], "theta_degree")) : 1;
    std::vector<MultipleFibre> fibres;
    if (j.contains("multiple_fibres")) {
        for (const auto& f : j["multiple_fibres"])
            fibres.push_back({parse_point(field(f, "at")), static_cast<int>(integer(field(f, "multiplicity"), "multiplicity"))});
    }
    try {
        return SurfaceSpec(TateCurve(tau), d, fibres);
    } catch (const Error& e) {
        schema_error(std::string("surface: ") + e.what());
    }
}

inline LineBundleOnX parse_line_bundle(const json& j, const SurfaceSpec& s) {
    LineBundleOnX l = LineBundleOnX::trivial(s);
    if (j.contains("base_degree")) l.base_degree = integer(j["base_degree"], "base_degree");
    if (j.contains("factor")) l.factor = parse_complex(j["factor"]);
    if (l.factor == Complex{}) schema_error("line bundle factor must be nonzero");
    if (j.contains("fibre_parts")) {
        const auto& fp = j["fibre_parts"];
        if (!fp.is_array() || fp.size() != s.multiple_fibres.size()) schema_error("one fibre part per multiple fibre");
        for (std::size_t i = 0; i < fp.size(); ++i) l.fibre_parts[i] = integer(fp[i], "fibre part");
    }
    return l.normalized(s);
}

inline json line_bundle_json(const LineBundleOnX& l) {
    return {{"base_degree", l.base_degree}, {"factor", complex_json(l.factor)}, {"fibre_parts", l.fibre_parts}};
}

inline DivisorClass parse_divisor(const json& j, const CoverPtr& cover) {
    DivisorClass acc = DivisorClass::zero(cover);
    if (j.contains("points")) {
        for (const auto& p : j["points"]) {
            CurvePoint cp{parse_rational(field(p, "x")), parse_rational(field(p, "w"))};
            if (!on_curve(*cover, cp)) schema_error("twist point is not on the cover");
            DivisorClass d = p.contains("effective") && p["effective"].get<bool>() ? DivisorClass::effective_point(cover, cp)
                                                                                   : DivisorClass::point(cover, cp);
            long n = p.contains("coefficient") ? integer(p["coefficient"], "coefficient") : 1;
            acc = class_add(acc, class_scale(d, n));
        }
    }
    return acc;
}

inline SpectralCover parse_spectral_cover(const json& j, const SurfaceSpec& s) {
    std::vector<VerticalComponent> verticals;
    if (j.contains("verticals"))
        for (const auto& v : j["verticals"])
            verticals.push_back({parse_point(field(v, "at")), static_cast<int>(integer(field(v, "multiplicity"), "multiplicity"))});
    if (j.contains("sections")) {
        const auto& sec = j["sections"];
        if (!sec.is_array() || sec.size() != 2) schema_error("sections are two complex numbers");
        return {s.curve, verticals, SectionPair{canonical_rep(parse_complex(sec[0]), s.curve), canonical_rep(parse_complex(sec[1]), s.curve)}};
    }
    const json& a = field(j, "A");
    BisectionMap A{parse_cpoly(field(a, "n0")), parse_cpoly(field(a, "n1")), parse_cpoly(field(a, "d0")), parse_cpoly(field(a, "d1"))};
    int t = static_cast<int>(integer(field(j, "t_degree"), "t_degree"));
    return {s.curve, verticals, HyperBisection{parse_cover(j), A, t}};
}

struct RunParams {
    int samples = 32;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::optional<BasePoint> b0;
    std::vector<std::pair<BasePoint, int>> generic_jumps;
    std::optional<std::pair<BasePoint, std::vector<int>>> assigned;
    int prym_twists = 20;
};

struct Scenario {
    json document;
    std::string hash;
    SurfaceSpec surface;
    FamilySpec family;
    std::optional<SpectralCover> cover;
    std::optional<LineBundleOnX> declared_determinant;
    RunParams run;
};

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline FamilySpec parse_family(const json& j, const SurfaceSpec& s, const std::optional<SpectralCover>& cover,
                               const std::optional<LineBundleOnX>& det, const RunParams& run) {
    const json& p = field(j, "presentation");
    const std::string type = field(p, "type").is_string() ? p["type"].get<std::string>() : "";
    FamilySpec e = [&]() -> FamilySpec {
        if (type == "split") return split_family(s, parse_line_bundle(field(p, "first"), s), parse_line_bundle(field(p, "second"), s));
        if (type == "pushforward") {
            CoverPtr c = parse_cover(p);
            Complex eta = parse_complex(field(p, "eta"));
            BisectionMap F = p.contains("F")
                                 ? BisectionMap{parse_cpoly(field(p["F"], "n0")), parse_cpoly(field(p["F"], "n1")),
                                                parse_cpoly(field(p["F"], "d0")), parse_cpoly(field(p["F"], "d1"))}
                                 : BisectionMap::invariant(eta, parse_cpoly(field(p, "P")), parse_cpoly(field(p, "Q")));
            std::optional<DivisorClass> tw;
            if (p.contains("twist")) tw = parse_divisor(p["twist"], c);
            std::vector<std::pair<long, long>> ft;
            if (p.contains("fibre_twist"))
                for (const auto& x : p["fibre_twist"]) {
                    if (!x.is_array() || x.size() != 2) schema_error("fibre twists are pairs [a', a'']");
                    ft.emplace_back(integer(x[0], "fibre twist"), integer(x[1], "fibre twist"));
                }
            int t = static_cast<int>(integer(field(p, "t_degree"), "t_degree"));
            return pushforward_family(s, c, F, eta, t, tw, ft);
        }
        if (type == "regular") {
            if (!cover) schema_error("a regular presentation needs the scenario cover");
            if (!det) schema_error("a regular presentation needs the scenario determinant");
            std::vector<BasePoint> samples = default_samples(*cover, run.samples);
            return build_regular_family(*cover, *det, s, samples, run.tol);
        }
        schema_error("presentation type must be split, pushforward or regular");
    }();
    if (j.contains("modifications")) {
        for (const auto& m : j["modifications"]) {
            BasePoint at = parse_point(field(m, "at"));
            if (m.contains("allowable") && m["allowable"].get<bool>()) {
                e = allowable_mod(e, at);
                continue;
            }
            int r = static_cast<int>(integer(field(m, "degree"), "degree"));
            if (m.contains("line_point"))
                e = elem_mod(e, {at, r, canonical_rep(parse_complex(m["line_point"]), s.curve), 1.0, StepKind::elementary});
            else
                e = push_jump(e, at, r);
        }
    }
    return e;
}

inline Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) schema_error("scenario must be a JSON object");
    RunParams run;
    if (doc.contains("run")) {
        const json& r = doc["run"];
        if (r.contains("samples")) run.samples = static_cast<int>(integer(r["samples"], "samples"));
        if (r.contains("tol")) run.tol = number(r["tol"], "tol");
        if (r.contains("seed")) run.seed = static_cast<std::uint64_t>(integer(r["seed"], "seed"));
        if (r.contains("b0")) run.b0 = parse_point(r["b0"]);
        if (r.contains("prym_twists")) run.prym_twists = static_cast<int>(integer(r["prym_twists"], "prym_twists"));
        if (r.contains("generic_jumps"))
            for (const auto& g : r["generic_jumps"])
                run.generic_jumps.emplace_back(parse_point(field(g, "at")), static_cast<int>(integer(field(g, "multiplicity"), "multiplicity")));
        if (r.contains("assign_sequence")) {
            const json& a = r["assign_sequence"];
            std::vector<int> seq;
            for (const auto& h : field(a, "sequence")) seq.push_back(static_cast<int>(integer(h, "sequence entry")));
            run.assigned = std::make_pair(parse_point(field(a, "at")), seq);
        }
    }
    if (run.samples < 1) schema_error("samples must be positive");
    if (!(run.tol > 0.0)) schema_error("tolerance must be positive");
    SurfaceSpec s = parse_surface(field(doc, "surface"));
    std::optional<SpectralCover> cover;
    if (doc.contains("cover")) cover = parse_spectral_cover(doc["cover"], s);
    std::optional<LineBundleOnX> det;
    if (doc.contains("determinant")) det = parse_line_bundle(doc["determinant"], s);
    FamilySpec e = parse_family(field(doc, "family"), s, cover, det, run);
    return {doc, fnv1a_hex(doc.dump()), s, e, cover, det, run};
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) schema_error("cannot open scenario '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        schema_error(std::string("scenario is not valid JSON: ") + e.what());
    } catch (const json::type_error& e) {
        schema_error(e.what());
    }
    try {
        return parse_scenario(doc);
    } catch (const json::exception& e) {
        schema_error(e.what());
    }
}

}  // namespace spectral_forge
