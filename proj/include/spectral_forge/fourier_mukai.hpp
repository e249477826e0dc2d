#pragma once

// The twisted Fourier-Mukai transform and its inverse, at the level of
// spectral data: support, line data on the bisection, determinant and Chern
// data. The descent of L~ (x) N along the Z-action is checked numerically on
// stalks near the chosen base point b0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spectral_forge/spectral_cover.hpp"

namespace spectral_forge {

// Automorphy factor of the Poincare bundle U on T x {alpha}: constant alpha.
inline Complex universal_factor(const TatePoint& alpha, Complex z) {
    if (z == Complex{}) fail(ErrorKind::domain, "z must be nonzero");
    return alpha.value();
}

// D_{E,b0} = sum_i i d T^i(a + b), stored by its coefficient rule.
struct DescentTwist {
    BasePoint b0;
    TatePoint a;
    TatePoint b;
    int d = 1;
    bool enabled = true;  // false forces every coefficient to 0 (no twist)

    long coefficient(long i) const { return enabled ? i * d : 0; }
    // Divisor of the chosen section gamma of L_tau: -d b0.
    long gamma_order() const { return -d; }
};

inline DescentTwist descent_divisor(const FamilySpec& e, const BasePoint& b0) {
    if (e.surface.multiple_fibre_index(b0)) fail(ErrorKind::domain, "b0 lies under a multiple fibre");
    for (const auto& v : journal_verticals(e))
        if (v.at == b0) fail(ErrorKind::domain, "the spectral cover has a vertical component over b0");
    SpectralPoints sp = spectral_points(fiber_class_at(e, b0));
    const auto& pair = std::get<SpectralPair>(sp);
    return {b0, pair.first, pair.second, e.surface.theta_degree, true};
}

// Winding number of g around |x - b0| = r, from accumulated argument steps.
template <class G>
double winding_number(const G& g, Complex b0, double r, int steps = 256) {
    double total = 0.0;
    Complex prev = g(b0 + r);
    for (int k = 1; k <= steps; ++k) {
        Complex cur = g(b0 + std::polar(r, 2.0 * std::numbers::pi * k / steps));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return total / (2.0 * std::numbers::pi);
}

struct StalkSample {
    long translate = 0;  // i: stalk over T^i of the lifted sheet
    int sheet = 0;
    double radius = 0.1;
};

inline std::vector<StalkSample> default_stalks(int n = 20) {
    std::vector<StalkSample> out;
    for (int k = 0; k < n; ++k) out.push_back({k % 7 - 3, k % 2, 0.05 + 0.01 * (k % 5)});
    return out;
}

// Cocycle-closure defect of the Z-action on L~ (x) N near b0. The action
// sends the stalk at (x, alpha) to (x, tau alpha), multiplying by the sheet
// value alpha(x) and by gamma(x) = (x - b0)^(-d); the N-frames
// n_i = (x - b0)^(-coef(i)) absorb the pole of gamma exactly when the
// coefficients grow by d per translate. The defect is the largest winding
// number of the composed transition over the sampled stalks.
inline double z_action_residual(const FamilySpec& e, const DescentTwist& tw, const std::vector<StalkSample>& stalks) {
    const Complex b0 = tw.b0.value();
    const Complex tau = family_curve(e).tau();
    const Bisection bis = declared_bisection(e);
    SpectralCover cover{family_curve(e), {}, bis};
    auto sheet_value = [&](Complex x, int sheet) {
        if (auto* s = std::get_if<SectionPair>(&cover.bisection)) return sheet == 0 ? s->first.value() : s->second.value();
        const auto& h = std::get<HyperBisection>(cover.bisection);
        auto [w0, w1] = cover_sheets(*h.cover, x);
        // Follow the sheet continuously from b0.
        auto [r0, r1] = cover_sheets(*h.cover, b0);
        Complex ref = sheet == 0 ? r0 : r1;
        Complex w = std::abs(w0 - ref) <= std::abs(w1 - ref) ? w0 : w1;
        return h.A(x, w);
    };
    auto res = parallel_map<double>(stalks.size(), [&](std::size_t k) {
        const StalkSample& s = stalks[k];
        if (s.translate == 0 && s.radius == 0.0) return 0.0;
        auto g = [&](Complex x) {
            Complex alpha = sheet_value(x, s.sheet) * ipow(tau, s.translate);
            Complex gamma = ipow(x - b0, tw.gamma_order());
            Complex ni = ipow(x - b0, -tw.coefficient(s.translate));
            Complex nj = ipow(x - b0, -tw.coefficient(s.translate + 1));
            return alpha * gamma * ni / nj;
        };
        return std::abs(winding_number(g, b0, s.radius));
    });
    double worst = 0.0;
    for (double r : res) worst = std::max(worst, r);
    return worst;
}

// ---------------------------------------------------------------------------
// Transform and inverse.
// ---------------------------------------------------------------------------

struct LineData {
    enum class Kind { sections, pushforward, extension } kind = Kind::sections;
    std::optional<DivisorClass> twist;                 // rho^* class on C
    std::vector<std::pair<long, long>> fibre_twist;    // (a'_j, a''_j)
    Complex eta{1.0, 0.0};
    Complex lambda_factor{1.0, 0.0};
};

struct TransformedSheaf {
    SurfaceSpec surface;
    SpectralCover support;
    LineData line_data;
    LineBundleOnX determinant;
    ChernData chern;
    bool phi0_vanishes = true;
    int rank_on_support = 1;
    // The determinant of a pushforward family carries a branch-divisor
    // correction; it is tracked through the line data rather than derived.
    bool determinant_correction_flagged = false;
};

inline TransformedSheaf fm_transform(const FamilySpec& e, const std::vector<BasePoint>& samples, double tol = 1e-9) {
    TransformedSheaf t{e.surface, cover_from_family(e, samples, tol), {}, e.determinant, e.chern};
    // Phi^0 is nonzero only if a generic fibre has h^0(E_b (x) L_alpha) > 0 for all alpha.
    for (const auto& b : samples) {
        if (t.support.has_vertical_at(b) || e.surface.multiple_fibre_index(b)) continue;
        if (std::holds_alternative<Vertical>(spectral_points(fiber_class_at(e, b)))) t.phi0_vanishes = false;
        break;
    }
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SplitPresentation>) {
                t.line_data.kind = LineData::Kind::sections;
            } else if constexpr (std::is_same_v<T, PushforwardPresentation>) {
                t.line_data.kind = LineData::Kind::pushforward;
                t.line_data.twist = p.twist;
                t.line_data.fibre_twist = p.fibre_twist;
                t.determinant_correction_flagged = true;
            } else {
                t.line_data.kind = LineData::Kind::extension;
                t.line_data.eta = p.eta;
                t.line_data.lambda_factor = p.lambda_factor;
            }
        },
        e.presentation);
    return t;
}

inline FamilySpec fm_inverse(const TransformedSheaf& t) {
    if (!t.support.verticals.empty())
        fail(ErrorKind::unsupported, "inverse transform needs a support without vertical components");
    if (t.rank_on_support != 1) fail(ErrorKind::unsupported, "inverse transform needs rank 1 on a smooth bisection");
    const SurfaceSpec& s = t.surface;
    if (auto* p = std::get_if<SectionPair>(&t.support.bisection)) {
        LineBundleOnX a = LineBundleOnX::constant(s, 1.0 / p->first.value());
        LineBundleOnX b = LineBundleOnX::constant(s, 1.0 / p->second.value());
        a.base_degree = t.determinant.base_degree;
        a.fibre_parts = t.determinant.fibre_parts;
        FamilySpec e = split_family(s, a, b);
        e.chern = t.chern;
        return e;
    }
    const auto& h = std::get<HyperBisection>(t.support.bisection);
    FamilySpec e{s, t.determinant, {}, {}, t.chern};
    if (t.line_data.kind == LineData::Kind::extension) {
        e.presentation = ExtensionPresentation{t.support, t.line_data.eta, t.line_data.lambda_factor};
    } else {
        std::vector<std::pair<long, long>> ft = t.line_data.fibre_twist;
        if (ft.empty()) ft.assign(s.multiple_fibres.size(), {0, 0});
        e.presentation = PushforwardPresentation{h.cover, h.A.inverse(), h.t_degree, t.line_data.twist, ft};
    }
    return e;
}

enum class RoundtripStatus { pass, fail, hypothesis_violated };

inline const char* to_string(RoundtripStatus s) {
    switch (s) {
        case RoundtripStatus::pass: return "PASS";
        case RoundtripStatus::fail: return "FAIL";
        case RoundtripStatus::hypothesis_violated: return "HYPOTHESIS_VIOLATED";
    }
    return "?";
}

struct RoundtripReport {
    RoundtripStatus status = RoundtripStatus::pass;
    int samples = 0;
    int fibre_mismatches = 0;
    double max_spectral_distance = 0.0;
    bool determinant_ok = true;
    bool chern_ok = true;
    std::string note;
};

inline bool determinant_section_agrees(const FamilySpec& a, const FamilySpec& b, const std::vector<BasePoint>& samples) {
    if (!a.determinant.same_as(b.determinant, a.surface)) return false;
    auto sa = jacobian_section(a.determinant, a.surface), sb = jacobian_section(b.determinant, b.surface);
    for (const auto& x : samples) {
        if (a.surface.multiple_fibre_index(x)) continue;
        if (!(sa(x) == sb(x))) return false;
    }
    return true;
}

inline RoundtripReport roundtrip_check(const FamilySpec& e, const std::vector<BasePoint>& samples, double tol = 1e-9) {
    RoundtripReport r;
    if (!is_jump_free(e)) {
        r.status = RoundtripStatus::hypothesis_violated;
        r.note = "family has jumps";
        return r;
    }
    FamilySpec back = fm_inverse(fm_transform(e, samples, tol));
    for (const auto& b : samples) {
        if (e.surface.multiple_fibre_index(b)) continue;
        ++r.samples;
        Rank2FiberClass x = fiber_class_at(e, b), y = fiber_class_at(back, b);
        double d = 0.0;
        if (x.index() != y.index()) {
            d = std::numeric_limits<double>::infinity();
        } else {
            d = pair_distance(std::get<SpectralPair>(spectral_points(x)), std::get<SpectralPair>(spectral_points(y)));
            d = std::max(d, tate_distance(canonical_rep(determinant(x).factor, e.surface.curve),
                                          canonical_rep(determinant(y).factor, e.surface.curve)));
        }
        r.max_spectral_distance = std::max(r.max_spectral_distance, d);
        if (d > tol) ++r.fibre_mismatches;
    }
    r.determinant_ok = determinant_section_agrees(e, back, samples);
    r.chern_ok = e.chern == back.chern;
    if (r.fibre_mismatches > 0 || !r.determinant_ok || !r.chern_ok) r.status = RoundtripStatus::fail;
    return r;
}

// Support and line data of two transformed sheaves agree at the samples.
inline bool same_transform(const TransformedSheaf& a, const TransformedSheaf& b, const std::vector<BasePoint>& samples, double tol = 1e-9) {
    if (a.line_data.kind != b.line_data.kind) return false;
    if (a.line_data.fibre_twist != b.line_data.fibre_twist) return false;
    if (a.line_data.twist.has_value() != b.line_data.twist.has_value()) return false;
    if (a.line_data.twist && !class_equal(*a.line_data.twist, *b.line_data.twist)) return false;
    if (std::abs(a.line_data.eta - b.line_data.eta) > tol * std::abs(a.line_data.eta)) return false;
    if (a.support.vertical_total() != b.support.vertical_total()) return false;
    if (!a.determinant.same_as(b.determinant, a.surface) || !(a.chern == b.chern)) return false;
    for (const auto& x : samples) {
        if (x.infinity) continue;
        if (pair_distance(a.support.at(x), b.support.at(x)) > tol) return false;
    }
    return true;
}

}  // namespace spectral_forge
