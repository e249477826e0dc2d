#pragma once

// Presentations of rank-2 bundles on X, evaluated fibre by fibre, together
// with the journal of elementary modifications applied to them.

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "spectral_forge/fiber_class.hpp"
#include "spectral_forge/surface_model.hpp"

namespace spectral_forge {

struct ChernData {
    long c1_fibre_multiple = 0;  // c_1 = k [F]
    long c2 = 0;
    bool operator==(const ChernData&) const = default;
};

// Polynomial with complex coefficients, ascending.
struct CPoly {
    std::vector<Complex> c;

    CPoly() = default;
    CPoly(std::initializer_list<Complex> coeffs) : c(coeffs) {}
    explicit CPoly(std::vector<Complex> coeffs) : c(std::move(coeffs)) {}
    static CPoly from(const QPoly& q) {
        CPoly p;
        for (const auto& x : q.coefficients()) p.c.emplace_back(x.get_d());
        return p;
    }

    Complex operator()(Complex z) const {
        Complex acc{};
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
        return acc;
    }
    double scale(Complex z) const {
        double s = 0.0, zp = 1.0;
        for (const auto& x : c) {
            s += std::abs(x) * zp;
            zp *= std::abs(z);
        }
        return s;
    }
};

// Rational map on the cover, A(b, w) = (n0(b) + n1(b) w) / (d0(b) + d1(b) w).
struct BisectionMap {
    CPoly n0, n1, d0, d1;

    static constexpr double puncture_tolerance = 1e-12;

    Complex operator()(Complex b, Complex w) const {
        Complex num = n0(b) + n1(b) * w, den = d0(b) + d1(b) * w;
        double ns = n0.scale(b) + n1.scale(b) * std::abs(w), ds = d0.scale(b) + d1.scale(b) * std::abs(w);
        if (std::abs(num) <= puncture_tolerance * ns) fail(ErrorKind::puncture, "bisection map vanishes at the sample");
        if (std::abs(den) <= puncture_tolerance * ds) fail(ErrorKind::puncture, "bisection map has a pole at the sample");
        return num / den;
    }

    // eta (P + Q w) / (P - Q w): A(c) A(iota c) = eta^2 identically.
    static BisectionMap invariant(Complex eta, const CPoly& P, const CPoly& Q) {
        CPoly eP = P, eQ = Q, mQ = Q;
        for (auto& x : eP.c) x *= eta;
        for (auto& x : eQ.c) x *= eta;
        for (auto& x : mQ.c) x = -x;
        return {eP, eQ, P, mQ};
    }

    static BisectionMap constant(Complex a) { return {CPoly{a}, CPoly{}, CPoly{1.0}, CPoly{}}; }

    BisectionMap inverse() const { return {d0, d1, n0, n1}; }

    BisectionMap scaled(Complex k) const {
        BisectionMap m = *this;
        for (auto& x : m.n0.c) x *= k;
        for (auto& x : m.n1.c) x *= k;
        return m;
    }
};

// The two points of the cover over b: (b, +w) and (b, -w), w the principal root.
inline std::pair<Complex, Complex> cover_sheets(const HyperCover& c, Complex b) {
    Complex w = std::sqrt(CPoly::from(c.f())(b));
    return {w, -w};
}

// ---------------------------------------------------------------------------
// Spectral covers.
// ---------------------------------------------------------------------------

struct VerticalComponent {
    BasePoint at;
    int multiplicity = 1;
};

struct SectionPair {
    TatePoint first;
    TatePoint second;
};

struct HyperBisection {
    CoverPtr cover;
    BisectionMap A;
    int t_degree = 0;  // degree of the bisection over T*
};

using Bisection = std::variant<SectionPair, HyperBisection>;

struct SpectralCover {
    TateCurve curve;
    std::vector<VerticalComponent> verticals;
    Bisection bisection;

    int vertical_total() const {
        int s = 0;
        for (const auto& v : verticals) s += v.multiplicity;
        return s;
    }
    int t_degree() const {
        if (auto* h = std::get_if<HyperBisection>(&bisection)) return h->t_degree;
        return 0;
    }
    bool has_vertical_at(const BasePoint& b) const {
        for (const auto& v : verticals)
            if (v.at == b) return true;
        return false;
    }

    // The two points of the bisection over b, sheet 0 first.
    SpectralPair at(Complex b) const {
        if (auto* s = std::get_if<SectionPair>(&bisection)) return {s->first, s->second};
        const auto& h = std::get<HyperBisection>(bisection);
        auto [w0, w1] = cover_sheets(*h.cover, b);
        return {canonical_rep(h.A(b, w0), curve), canonical_rep(h.A(b, w1), curve)};
    }
    SpectralPair at(const BasePoint& b) const {
        if (b.infinity) {
            if (auto* s = std::get_if<SectionPair>(&bisection)) return {s->first, s->second};
            fail(ErrorKind::puncture, "bisection maps are evaluated at finite points only");
        }
        return at(b.value());
    }
};

// ---------------------------------------------------------------------------
// Family presentations.
// ---------------------------------------------------------------------------

struct SplitPresentation {
    LineBundleOnX first;
    LineBundleOnX second;
};

// gamma~_* of a line bundle on W = X x_B C whose restriction to the fibre over
// c is L_{F(c)}, further twisted by rho^* of a class on C and by fibre classes
// a'_j T'_j + a''_j T''_j over the non-branch multiple fibres.
struct PushforwardPresentation {
    CoverPtr cover;
    BisectionMap factor_map;
    int t_degree = 0;
    std::optional<DivisorClass> twist;
    std::vector<std::pair<long, long>> fibre_twist;
};

// Fibrewise nonsplit extensions of lambda^* by lambda (deg lambda = -1) whose
// class at b is read off the graph of the spectral cover in F_delta, twisted by
// L_eta with eta^2 the determinant factor.
struct ExtensionPresentation {
    SpectralCover graph;
    Complex eta{1.0, 0.0};
    Complex lambda_factor{1.0, 0.0};
};

using Presentation = std::variant<SplitPresentation, PushforwardPresentation, ExtensionPresentation>;

enum class StepKind { elementary, allowable };

struct ModificationStep {
    BasePoint at;
    int degree = 1;                     // deg N; negative for allowable steps (N = lambda)
    TatePoint line_point;               // class of N in Pic^deg of the fibre
    Complex surjection_choice{1.0, 0.0};
    StepKind kind = StepKind::elementary;
};

struct FamilySpec {
    SurfaceSpec surface;
    LineBundleOnX determinant;
    Presentation presentation;
    std::vector<ModificationStep> modifications;
    ChernData chern;
};

inline const TateCurve& family_curve(const FamilySpec& e) { return e.surface.curve; }

// Extension data (chart, p, q) at b. Chart 0 covers |b| <= 1, chart 1 the
// complement; the chart change rescales (p, q) by b^-t, invisible projectively.
struct ExtensionData {
    int chart = 0;
    Complex p, q;
};

inline ExtensionData extension_data(const ExtensionPresentation& x, Complex b) {
    const TateCurve& curve = x.graph.curve;
    TateLineBundle lambda(curve, -1, x.lambda_factor);
    SpectralPair s = x.graph.at(b);
    TatePoint a = canonical_rep(1.0 / (s.first.value() * x.eta), curve);
    auto [p, q] = extension_class_for(lambda, a);
    ExtensionData d{std::abs(b) <= 1.0 ? 0 : 1, p, q};
    if (d.chart == 1) {
        Complex k = ipow(b, -x.graph.t_degree());
        d.p *= k;
        d.q *= k;
    }
    return d;
}

// Fibre class of the underlying presentation (before modifications). At a
// multiple-fibre point this is the class on the fibre of the cyclic cover.
inline Rank2FiberClass presentation_class_at(const FamilySpec& e, Complex b) {
    const TateCurve& curve = family_curve(e);
    return std::visit(
        [&](const auto& p) -> Rank2FiberClass {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SplitPresentation>) {
                return make_split(TateLineBundle(curve, 0, p.first.factor), TateLineBundle(curve, 0, p.second.factor));
            } else if constexpr (std::is_same_v<T, PushforwardPresentation>) {
                auto [w0, w1] = cover_sheets(*p.cover, b);
                Complex f0 = p.factor_map(b, w0);
                if (std::abs(w0) <= 1e-12 * std::max(1.0, CPoly::from(p.cover->f()).scale(b)))
                    return make_atiyah(TateLineBundle(curve, 0, f0));
                return make_split(TateLineBundle(curve, 0, f0), TateLineBundle(curve, 0, p.factor_map(b, w1)));
            } else {
                ExtensionData d = extension_data(p, b);
                TateLineBundle lambda(curve, -1, p.lambda_factor);
                return twist(make_extension(lambda, d.p, d.q), TateLineBundle(curve, 0, p.eta));
            }
        },
        e.presentation);
}

inline Rank2FiberClass presentation_class_at(const FamilySpec& e, const BasePoint& b) {
    if (b.infinity) {
        if (std::holds_alternative<SplitPresentation>(e.presentation)) return presentation_class_at(e, Complex{});
        fail(ErrorKind::unsupported, "fibre at infinity of a cover-based family");
    }
    return presentation_class_at(e, b.value());
}

// ---------------------------------------------------------------------------
// Journal replay.
// ---------------------------------------------------------------------------

struct JumpLevel {
    int height = 1;
    TateLineBundle low;  // destabilising sub-line-bundle, degree -height
};

struct FibreState {
    Rank2FiberClass semistable;
    std::vector<JumpLevel> stack;  // back() is the current jump
    int elementary_steps = 0;
    int declared_degree = 0;       // sum of elementary degrees at this point
};

inline TateLineBundle determinant_on_fibre(const FamilySpec& e) { return TateLineBundle(family_curve(e), 0, e.determinant.factor); }

// Applies one step to a fibre state; throws no_surjection when the step has no target.
inline void apply_step(FibreState& st, const ModificationStep& step, const TateLineBundle& det) {
    const TateCurve& curve = det.curve;
    if (step.kind == StepKind::allowable) {
        if (st.stack.empty()) fail(ErrorKind::domain, "no jump at " + step.at.str());
        st.stack.pop_back();
        return;
    }
    const int r = step.degree;
    if (r < 1) fail(ErrorKind::domain, "elementary modification needs deg N >= 1");
    TateLineBundle N(curve, r, step.line_point.value());
    if (st.stack.empty()) {
        if (r == 1 && !is_regular(st.semistable) && std::holds_alternative<SplitClass>(st.semistable))
            fail(ErrorKind::no_surjection, "no surjection from lambda_0 (+) lambda_0 onto a degree-1 line bundle");
    } else {
        const JumpLevel& top = st.stack.back();
        if (r < top.height)
            fail(ErrorKind::no_surjection, "deg N below the current jump height");
        if (r == top.height && !N.isomorphic(lb_tensor(lb_dual(top.low), det)))
            fail(ErrorKind::no_surjection, "deg N equals the jump height but N is not the destabilising quotient");
    }
    st.stack.push_back({r, lb_tensor(lb_dual(N), det)});
    ++st.elementary_steps;
    st.declared_degree += r;
}

inline std::map<BasePoint, FibreState> replay_journal(const FamilySpec& e) {
    std::map<BasePoint, FibreState> states;
    const TateLineBundle det = determinant_on_fibre(e);
    for (const auto& step : e.modifications) {
        auto it = states.find(step.at);
        if (it == states.end()) it = states.emplace(step.at, FibreState{presentation_class_at(e, step.at), {}, 0, 0}).first;
        apply_step(it->second, step, det);
    }
    return states;
}

inline std::vector<VerticalComponent> journal_verticals(const FamilySpec& e) {
    std::vector<VerticalComponent> out;
    for (const auto& [at, st] : replay_journal(e)) {
        int mu = 0;
        for (const auto& lvl : st.stack) mu += lvl.height;
        if (mu > 0) out.push_back({at, mu});
    }
    return out;
}

inline Rank2FiberClass fiber_class_at(const FamilySpec& e, const BasePoint& b) {
    for (const auto& [at, st] : replay_journal(e)) {
        if (!(at == b)) continue;
        if (st.stack.empty()) return st.semistable;
        const JumpLevel& top = st.stack.back();
        return make_unstable(top.height, top.low, determinant_on_fibre(e));
    }
    return presentation_class_at(e, b);
}

inline bool is_jump_free(const FamilySpec& e) { return journal_verticals(e).empty(); }

// ---------------------------------------------------------------------------
// Constructors.
// ---------------------------------------------------------------------------

inline FamilySpec split_family(const SurfaceSpec& s, const LineBundleOnX& a, const LineBundleOnX& b) {
    LineBundleOnX det = lbx_tensor(a, b, s);
    return {s, det, SplitPresentation{a, b}, {}, {det.base_degree, 0}};
}

// Pushforward family with factor map F satisfying F(c) F(iota c) = eta^2.
// The determinant is L_{eta^2} twisted by pi^* of the norm of the twist and
// by the pushforward of the fibre twists.
inline FamilySpec pushforward_family(const SurfaceSpec& s, CoverPtr cover, const BisectionMap& F, Complex eta, int t_degree,
                                     std::optional<DivisorClass> twist = std::nullopt,
                                     std::vector<std::pair<long, long>> fibre_twist = {}) {
    LineBundleOnX det = LineBundleOnX::constant(s, eta * eta);
    if (twist) {
        if (!(*twist->cover() == *cover)) fail(ErrorKind::cover_mismatch, "twist lives on a different cover");
        det.base_degree += norm(*twist);
    }
    if (!fibre_twist.empty()) {
        if (fibre_twist.size() != s.multiple_fibres.size()) fail(ErrorKind::invalid_family, "one fibre twist per multiple fibre");
        for (std::size_t j = 0; j < fibre_twist.size(); ++j) {
            bool branch = is_branch_point(*cover, s.multiple_fibres[j].at);
            if (branch && fibre_twist[j].second != 0)
                fail(ErrorKind::invalid_family, "a branch multiple fibre has a single preimage");
            det.fibre_parts[j] += fibre_twist[j].first + fibre_twist[j].second;
        }
    } else {
        fibre_twist.assign(s.multiple_fibres.size(), {0, 0});
    }
    det = det.normalized(s);
    PushforwardPresentation p{std::move(cover), F, t_degree, std::move(twist), std::move(fibre_twist)};
    return {s, det, p, {}, {det.base_degree, t_degree}};
}

// rho^* D twist of a pushforward family. Fibres do not see D; the
// determinant moves by pi^* of its norm.
inline FamilySpec twist_pushforward(const FamilySpec& e, const DivisorClass& d) {
    auto* p = std::get_if<PushforwardPresentation>(&e.presentation);
    if (!p) fail(ErrorKind::unsupported, "only pushforward families carry a class on the cover");
    if (!(*d.cover() == *p->cover)) fail(ErrorKind::cover_mismatch, "twist lives on a different cover");
    FamilySpec out = e;
    auto& q = std::get<PushforwardPresentation>(out.presentation);
    q.twist = q.twist ? class_add(*q.twist, d) : d;
    out.determinant.base_degree += norm(d);
    out.chern.c1_fibre_multiple = out.determinant.base_degree;
    return out;
}

}  // namespace spectral_forge
