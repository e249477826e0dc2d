#pragma once

// Spectral covers of families: extraction, i_delta-invariance, the graph in
// the ruled surface F_delta and the regular-bundle constructor.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "spectral_forge/family.hpp"
#include "spectral_forge/parallel.hpp"

namespace spectral_forge {

inline Rational discriminant(const ChernData& cd) {
    Rational d(cd.c2, 2);
    d.canonicalize();
    return d;
}

inline long n_invariant(const ChernData& cd) {
    if (cd.c2 < 0) fail(ErrorKind::invalid_family, "n_E = -ch_2 must be non-negative");
    return cd.c2;
}

inline Rational rational_approx(double x, long den = 1000000) {
    Rational r(static_cast<long>(std::llround(x * static_cast<double>(den))), den);
    r.canonicalize();
    return r;
}

// Points on a circle |b| = r avoiding the given branch points, with rational
// coordinates, followed by the special points.
inline std::vector<BasePoint> circle_samples(int n, const std::vector<Complex>& avoid, const std::vector<BasePoint>& special = {}) {
    double radius = 0.77;
    double best = -1.0;
    for (double r : {0.77, 1.23, 0.53, 1.61, 2.37, 0.31, 3.3, 4.7}) {
        double clearance = std::numeric_limits<double>::infinity();
        for (Complex a : avoid) clearance = std::min(clearance, std::abs(std::abs(a) - r));
        if (clearance > best + 1e-12) {
            best = clearance;
            radius = r;
        }
        if (clearance > 0.25) break;
    }
    std::vector<BasePoint> out;
    for (int k = 0; k < n; ++k) {
        double t = 2.0 * std::numbers::pi * (k + 0.37) / n;
        out.push_back({rational_approx(radius * std::cos(t)), rational_approx(radius * std::sin(t)), false});
    }
    for (const auto& s : special)
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    return out;
}

inline std::vector<Complex> branch_locus(const SpectralCover& s) {
    if (auto* h = std::get_if<HyperBisection>(&s.bisection)) return h->cover->finite_branch_points();
    return {};
}

inline std::vector<BasePoint> default_samples(const SpectralCover& s, int n = 32) {
    std::vector<BasePoint> special;
    for (const auto& v : s.verticals) special.push_back(v.at);
    if (auto* h = std::get_if<HyperBisection>(&s.bisection)) {
        // Rational finite branch points are exact special points.
        const QPoly& f = h->cover->f();
        for (Complex r : h->cover->finite_branch_points()) {
            if (std::abs(r.imag()) > 1e-9) continue;
            Rational x = rational_approx(r.real());
            if (f(x) == 0) special.push_back(BasePoint::real(x));
        }
    }
    return circle_samples(n, branch_locus(s), special);
}

// The bisection recorded by the presentation itself (no sampling).
inline Bisection declared_bisection(const FamilySpec& e) {
    const TateCurve& curve = family_curve(e);
    return std::visit(
        [&](const auto& p) -> Bisection {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SplitPresentation>) {
                return SectionPair{canonical_rep(1.0 / p.first.factor, curve), canonical_rep(1.0 / p.second.factor, curve)};
            } else if constexpr (std::is_same_v<T, PushforwardPresentation>) {
                return HyperBisection{p.cover, p.factor_map.inverse(), p.t_degree};
            } else {
                return p.graph.bisection;
            }
        },
        e.presentation);
}

inline std::vector<BasePoint> default_samples(const FamilySpec& e, int n = 32) {
    return default_samples(SpectralCover{family_curve(e), journal_verticals(e), declared_bisection(e)}, n);
}

// Builds the spectral cover of E and checks it against the fibre classes at
// the samples: jump points must be vertical, every other sample must have the
// spectral pair of the declared bisection.
inline SpectralCover cover_from_family(const FamilySpec& e, const std::vector<BasePoint>& samples, double tol = 1e-9) {
    SpectralCover s{family_curve(e), journal_verticals(e), declared_bisection(e)};
    if (n_invariant(e.chern) != s.vertical_total() + s.t_degree())
        fail(ErrorKind::inconsistent_family, "c_2 does not match the vertical multiplicities plus the bisection degree");
    auto states = replay_journal(e);
    auto check = parallel_map<double>(samples.size(), [&](std::size_t i) -> double {
        const BasePoint& b = samples[i];
        if (e.surface.multiple_fibre_index(b)) return 0.0;
        Rank2FiberClass c = fiber_class_at(e, b);
        SpectralPoints sp = spectral_points(c);
        bool vertical = s.has_vertical_at(b);
        if (std::holds_alternative<Vertical>(sp) != vertical)
            fail(ErrorKind::inconsistent_family, "vertical components disagree with the fibre class at " + b.str());
        if (vertical) return 0.0;
        SpectralPair expected = s.at(b);
        double d = pair_distance(std::get<SpectralPair>(sp), expected);
        if (d > tol) fail(ErrorKind::inconsistent_family, "fibre class and declared bisection differ at " + b.str());
        return d;
    });
    (void)check;
    return s;
}

// A(c) A(iota c) = delta_b at every (finite) sample.
inline double invariance_defect(const SpectralCover& s, const LineBundleOnX& delta, const std::vector<BasePoint>& samples) {
    const TatePoint db = canonical_rep(1.0 / delta.factor, s.curve);
    double worst = 0.0;
    for (const auto& b : samples) {
        if (b.infinity && std::holds_alternative<HyperBisection>(s.bisection)) continue;
        SpectralPair p = s.at(b);
        worst = std::max(worst, tate_distance(p.first * p.second, db));
    }
    return worst;
}

inline bool check_invariance(const SpectralCover& s, const LineBundleOnX& delta, const std::vector<BasePoint>& samples, double tol = 1e-9) {
    return invariance_defect(s, delta, samples) <= tol;
}

struct RuledGraph {
    std::vector<VerticalComponent> ruling_fibres;  // f_i over x_i with multiplicity
    SpectralCover cover;
    LineBundleOnX delta;
    SurfaceSpec surface;

    // The section A of F_delta at b, as a canonically ordered i_delta-orbit.
    std::pair<TatePoint, TatePoint> section(const BasePoint& b) const {
        SpectralPair p = cover.at(b);
        return ruled_quotient_point(delta, {b, p.first}, surface);
    }
    // Whether A meets the fixed locus of i_delta over b.
    bool meets_fixed_locus(const BasePoint& b) const {
        auto s = section(b);
        return s.first == s.second;
    }
};

inline RuledGraph graph_in_ruled_surface(const SpectralCover& s, const LineBundleOnX& delta, const SurfaceSpec& surface,
                                         const std::vector<BasePoint>& samples, double tol = 1e-9) {
    if (!check_invariance(s, delta, samples, tol))
        fail(ErrorKind::invariance_failure, "spectral cover is not i_delta-invariant");
    return {s.verticals, s, delta, surface};
}

// A regular family with determinant delta and spectral cover S (no verticals):
// a split family for two sections, fibrewise extensions otherwise.
inline FamilySpec build_regular_family(const SpectralCover& s, const LineBundleOnX& delta, const SurfaceSpec& surface,
                                       const std::vector<BasePoint>& samples, double tol = 1e-9) {
    if (!s.verticals.empty()) fail(ErrorKind::unsupported, "regular constructor takes covers without vertical components");
    if (!check_invariance(s, delta, samples, tol))
        fail(ErrorKind::invariance_failure, "spectral cover is not i_delta-invariant");
    if (auto* p = std::get_if<SectionPair>(&s.bisection)) {
        LineBundleOnX a = LineBundleOnX::constant(surface, 1.0 / p->first.value());
        LineBundleOnX b = LineBundleOnX::constant(surface, delta.factor * p->first.value());
        a.base_degree = delta.base_degree;
        a.fibre_parts = delta.fibre_parts;
        FamilySpec e = split_family(surface, a, b);
        e.determinant = delta.normalized(surface);
        return e;
    }
    const auto& h = std::get<HyperBisection>(s.bisection);
    Complex eta = std::sqrt(delta.factor);
    ExtensionPresentation x{s, eta, 1.0};
    return {surface, delta.normalized(surface), x, {}, {delta.normalized(surface).base_degree, h.t_degree}};
}

}  // namespace spectral_forge
