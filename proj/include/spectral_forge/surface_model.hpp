#pragma once

// The surface X = Theta^* / <tau> over B = P^1, its line bundles, the relative
// Jacobian J(X) = B x T*, the involution i_delta and the discrete group
// calculus for P_2, P_2,W and their subgroups.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectral_forge/hyperelliptic.hpp"
#include "spectral_forge/integer_lattice.hpp"
#include "spectral_forge/tate_curve.hpp"

namespace spectral_forge {

// A point of P^1 with Gaussian-rational coordinate, or infinity.
struct BasePoint {
    Rational re = 0;
    Rational im = 0;
    bool infinity = false;

    static BasePoint at_infinity() { return {0, 0, true}; }
    static BasePoint real(const Rational& x) { return {x, 0, false}; }

    Complex value() const {
        if (infinity) fail(ErrorKind::domain, "the point at infinity has no finite coordinate");
        return {re.get_d(), im.get_d()};
    }
    bool is_real() const { return !infinity && im == 0; }

    friend bool operator==(const BasePoint& a, const BasePoint& b) {
        if (a.infinity || b.infinity) return a.infinity == b.infinity;
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator<(const BasePoint& a, const BasePoint& b) {
        if (a.infinity != b.infinity) return b.infinity;
        if (a.re != b.re) return a.re < b.re;
        return a.im < b.im;
    }

    std::string str() const {
        if (infinity) return "inf";
        if (im == 0) return re.get_str();
        return re.get_str() + (im > 0 ? "+" : "-") + Rational(abs(im)).get_str() + "i";
    }
};

// Exact evaluation of a rational polynomial at a Gaussian rational.
inline std::pair<Rational, Rational> eval_gaussian(const QPoly& f, const BasePoint& b) {
    Rational xr = 0, xi = 0;
    const auto& c = f.coefficients();
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        Rational nr = xr * b.re - xi * b.im + *it;
        Rational ni = xr * b.im + xi * b.re;
        xr = nr;
        xi = ni;
    }
    return {xr, xi};
}

// Branch points of the odd model: the roots of f and infinity.
inline bool is_branch_point(const HyperCover& c, const BasePoint& b) {
    if (b.infinity) return true;
    auto [r, i] = eval_gaussian(c.f(), b);
    return r == 0 && i == 0;
}

struct MultipleFibre {
    BasePoint at;
    int multiplicity = 2;
};

struct SurfaceSpec {
    TateCurve curve;
    int theta_degree = 1;
    std::vector<MultipleFibre> multiple_fibres;

    SurfaceSpec(TateCurve c, int d, std::vector<MultipleFibre> fibres = {})
        : curve(std::move(c)), theta_degree(d), multiple_fibres(std::move(fibres)) {
        if (theta_degree <= 0) fail(ErrorKind::domain, "theta degree must be positive");
        for (std::size_t i = 0; i < multiple_fibres.size(); ++i) {
            if (multiple_fibres[i].multiplicity < 2) fail(ErrorKind::domain, "fibre multiplicity must be at least 2");
            for (std::size_t j = 0; j < i; ++j)
                if (multiple_fibres[i].at == multiple_fibres[j].at)
                    fail(ErrorKind::domain, "multiple fibres must lie over distinct points");
        }
    }

    std::optional<std::size_t> multiple_fibre_index(const BasePoint& b) const {
        for (std::size_t i = 0; i < multiple_fibres.size(); ++i)
            if (multiple_fibres[i].at == b) return i;
        return std::nullopt;
    }
};

// pi^* O_B(base_degree) (x) L_alpha (x) O_X(sum a_i T_i), with 0 <= a_i < m_i
// after normalisation (m_i T_i = F is absorbed into the base degree).
struct LineBundleOnX {
    long base_degree = 0;
    Complex factor{1.0, 0.0};
    std::vector<long> fibre_parts;

    static LineBundleOnX trivial(const SurfaceSpec& s) {
        return {0, 1.0, std::vector<long>(s.multiple_fibres.size(), 0)};
    }
    static LineBundleOnX constant(const SurfaceSpec& s, Complex alpha) {
        LineBundleOnX l = trivial(s);
        l.factor = alpha;
        return l;
    }
    static LineBundleOnX base_pullback(const SurfaceSpec& s, long degree) {
        LineBundleOnX l = trivial(s);
        l.base_degree = degree;
        return l;
    }
    static LineBundleOnX fibre(const SurfaceSpec& s, std::size_t i, long count = 1) {
        LineBundleOnX l = trivial(s);
        l.fibre_parts.at(i) = count;
        return l.normalized(s);
    }

    LineBundleOnX normalized(const SurfaceSpec& s) const {
        if (fibre_parts.size() != s.multiple_fibres.size()) fail(ErrorKind::domain, "fibre parts do not match the surface");
        LineBundleOnX l = *this;
        for (std::size_t i = 0; i < fibre_parts.size(); ++i) {
            long m = s.multiple_fibres[i].multiplicity;
            long q = fibre_parts[i] >= 0 ? fibre_parts[i] / m : -((-fibre_parts[i] + m - 1) / m);
            l.fibre_parts[i] -= q * m;
            l.base_degree += q;
        }
        return l;
    }

    bool same_as(const LineBundleOnX& o, const SurfaceSpec& s) const {
        LineBundleOnX a = normalized(s), b = o.normalized(s);
        return a.base_degree == b.base_degree && a.fibre_parts == b.fibre_parts && s.curve.in_lattice(a.factor / b.factor);
    }
};

inline LineBundleOnX lbx_tensor(const LineBundleOnX& a, const LineBundleOnX& b, const SurfaceSpec& s) {
    if (a.fibre_parts.size() != b.fibre_parts.size()) fail(ErrorKind::domain, "line bundles on different surfaces");
    LineBundleOnX r{a.base_degree + b.base_degree, a.factor * b.factor, a.fibre_parts};
    for (std::size_t i = 0; i < r.fibre_parts.size(); ++i) r.fibre_parts[i] += b.fibre_parts[i];
    return r.normalized(s);
}

inline LineBundleOnX lbx_dual(const LineBundleOnX& a, const SurfaceSpec& s) {
    LineBundleOnX r{-a.base_degree, 1.0 / a.factor, a.fibre_parts};
    for (auto& x : r.fibre_parts) x = -x;
    return r.normalized(s);
}

inline TateLineBundle restrict_to_fiber(const LineBundleOnX& l, const BasePoint& b, const SurfaceSpec& s) {
    if (s.multiple_fibre_index(b))
        fail(ErrorKind::unsupported, "restriction to a multiple fibre; use the cyclic cover at " + b.str());
    return TateLineBundle(s.curve, 0, l.factor);
}

using JacobianSection = std::function<TatePoint(const BasePoint&)>;

inline JacobianSection jacobian_section(const LineBundleOnX& l, const SurfaceSpec& s) {
    return [l, s](const BasePoint& b) { return canonical_rep(restrict_to_fiber(l, b, s).factor, s.curve); };
}

// Point of T* attached to delta on the fibre over b, in the spectral
// convention where a split pair L_1 (+) L_2 sits at {factor_1^-1, factor_2^-1}.
inline TatePoint delta_point(const LineBundleOnX& delta, const SurfaceSpec& s) {
    return canonical_rep(1.0 / delta.factor, s.curve);
}

using JacobianPoint = std::pair<BasePoint, TatePoint>;

inline JacobianPoint involution_i_delta(const LineBundleOnX& delta, const JacobianPoint& p, const SurfaceSpec& s) {
    return {p.first, delta_point(delta, s) * p.second.inverse()};
}

// Canonical ordering of T*-points: modulus, then argument, of the annulus representative.
inline bool tate_point_less(const TatePoint& a, const TatePoint& b) {
    if (a == b) return false;
    double ma = std::abs(a.value()), mb = std::abs(b.value());
    if (std::abs(ma - mb) > a.curve().tolerance() * std::max(1.0, mb)) return ma < mb;
    return std::arg(a.value()) < std::arg(b.value());
}

inline std::pair<TatePoint, TatePoint> ordered_pair(const TatePoint& a, const TatePoint& b) {
    return tate_point_less(b, a) ? std::make_pair(b, a) : std::make_pair(a, b);
}

inline std::pair<TatePoint, TatePoint> ruled_quotient_point(const LineBundleOnX& delta, const JacobianPoint& p, const SurfaceSpec& s) {
    return ordered_pair(p.second, involution_i_delta(delta, p, s).second);
}

// ---------------------------------------------------------------------------
// Discrete group calculus.
// ---------------------------------------------------------------------------

struct PicTauReport {
    GroupPresentation absolute;       // generated by pi^*Pic(B) and the O(T_i), plus the C* marker
    GroupPresentation relative;       // quotient by pi^*Pic(B)
};

inline PicTauReport pic_tau(const SurfaceSpec& s) {
    const std::size_t k = s.multiple_fibres.size();
    const std::size_t n = 1 + k;
    std::vector<std::string> labels{"pi*O(1)"};
    IntMat rel;
    for (std::size_t i = 0; i < k; ++i) {
        labels.push_back("O(T" + std::to_string(i + 1) + ")");
        IntVec r(n, 0);
        r[0] = -1;
        r[1 + i] = s.multiple_fibres[i].multiplicity;
        rel.push_back(r);
    }
    PicTauReport out;
    out.absolute = FGAbelianGroup(n, rel, labels).presentation();
    out.absolute.divisible_rank = 1;
    out.absolute.divisible_label = "C*";
    IntMat rel_rel = rel;
    IntVec base(n, 0);
    base[0] = 1;
    rel_rel.push_back(base);
    out.relative = FGAbelianGroup(n, rel_rel, labels).presentation();
    return out;
}

enum class FibreSite { non_branch, branch };

struct P2WReport {
    GroupPresentation p2w;            // P_2,W: discrete part plus the Pic^0(C) marker
    GroupPresentation p2w0;           // kernel of the pushed-forward Chern class
    GroupPresentation ptt;            // subgroup generated by O(T'_j - T''_j)
    GroupPresentation invariant;      // discrete part of {l in P^0 : iota^* l (x) l = O}
    long long components = 1;         // order of the discrete invariant part
    int prym_rank = 0;                // dimension of Prym(C/B) (= genus of C over P^1)
    std::vector<FibreSite> sites;
    bool exact = false;               // components == |PTT|
};

// Generators of the discrete part of P_2,W (modulo rho^* Pic^0(C)):
//   e          rho^* of a degree-1 class on C
//   t'_j, t''_j  the two fibres of W over a non-branch multiple fibre
//   t_j        the fibre of W over a branch multiple fibre
// with m_j t = e. The pushforward of c_1 lands in <F, T_j | m_j T_j = F>.
inline P2WReport build_P2W_groups(const SurfaceSpec& s, const HyperCover& cover) {
    P2WReport rep;
    const std::size_t k = s.multiple_fibres.size();
    std::vector<std::size_t> first(k), second(k);
    std::vector<std::string> labels{"e"};
    std::size_t n = 1;
    for (std::size_t j = 0; j < k; ++j) {
        const auto& mf = s.multiple_fibres[j];
        bool branch = is_branch_point(cover, mf.at);
        rep.sites.push_back(branch ? FibreSite::branch : FibreSite::non_branch);
        std::string idx = std::to_string(j + 1);
        if (branch) {
            first[j] = second[j] = n++;
            labels.push_back("O(T" + idx + ")");
        } else {
            first[j] = n++;
            second[j] = n++;
            labels.push_back("O(T'" + idx + ")");
            labels.push_back("O(T''" + idx + ")");
        }
    }
    IntMat rel_w;
    for (std::size_t j = 0; j < k; ++j) {
        const long long m = s.multiple_fibres[j].multiplicity;
        for (std::size_t g : {first[j], second[j]}) {
            IntVec r(n, 0);
            r[0] = -1;
            r[g] = m;
            if (std::find(rel_w.begin(), rel_w.end(), r) == rel_w.end()) rel_w.push_back(r);
        }
    }
    FGAbelianGroup P2(n, rel_w, labels);
    rep.p2w = P2.presentation();
    rep.p2w.divisible_rank = cover.genus();
    rep.p2w.divisible_label = "Pic0(C)";

    // phi: Z^n -> Z^(1+k) = <F, T_j>, then modulo m_j T_j - F.
    const std::size_t nx = 1 + k;
    IntMat rel_x;
    for (std::size_t j = 0; j < k; ++j) {
        IntVec r(nx, 0);
        r[0] = -1;
        r[1 + j] = s.multiple_fibres[j].multiplicity;
        rel_x.push_back(r);
    }
    // Solve phi(x) = sum y_r rel_x[r]: kernel of [phi | -rel_x^T].
    const std::size_t cols = n + rel_x.size();
    IntMat M(nx, IntVec(cols, 0));
    M[0][0] = 1;
    for (std::size_t j = 0; j < k; ++j) {
        M[1 + j][first[j]] = 1;
        if (second[j] != first[j]) M[1 + j][second[j]] = 1;
    }
    for (std::size_t r = 0; r < rel_x.size(); ++r)
        for (std::size_t i = 0; i < nx; ++i) M[i][n + r] = -rel_x[r][i];
    IntMat K;
    for (const auto& v : integer_kernel(M, cols)) K.emplace_back(v.begin(), v.begin() + static_cast<long>(n));

    auto p0 = P2.subgroup(K);
    rep.p2w0 = p0.presentation;
    rep.p2w0.divisible_rank = cover.genus();
    rep.p2w0.divisible_label = "Prym(C/B)";
    rep.prym_rank = cover.genus();

    IntMat diffs;
    for (std::size_t j = 0; j < k; ++j) {
        if (first[j] == second[j]) continue;
        IntVec d(n, 0);
        d[first[j]] = 1;
        d[second[j]] = -1;
        diffs.push_back(d);
    }
    rep.ptt = diffs.empty() ? GroupPresentation{} : P2.subgroup(diffs).presentation;

    // iota-bar swaps t'_j and t''_j and fixes the rest.
    auto sigma = [&](const IntVec& x) {
        IntVec y = x;
        for (std::size_t j = 0; j < k; ++j) std::swap(y[first[j]], y[second[j]]);
        return y;
    };
    if (rep.p2w0.free_rank != 0) fail(ErrorKind::internal, "discrete part of P^0 is not finite");
    // Enumerate P^0 through its cyclic factors and keep (1 + sigma)-kernel elements.
    std::vector<IntVec> invariant;
    const auto& gens = p0.factor_generators;
    const auto& orders = p0.factor_orders;
    std::vector<long long> digit(gens.size(), 0);
    while (true) {
        IntVec x(n, 0);
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t c = 0; c < n; ++c) x[c] += digit[i] * gens[i][c];
        IntVec sx = sigma(x);
        IntVec sum(n);
        for (std::size_t c = 0; c < n; ++c) sum[c] = x[c] + sx[c];
        if (P2.is_zero(sum)) invariant.push_back(x);
        std::size_t pos = 0;
        while (pos < digit.size() && ++digit[pos] == orders[pos]) digit[pos++] = 0;
        if (pos == digit.size()) break;
    }
    rep.components = static_cast<long long>(invariant.size());
    rep.invariant = invariant.empty() ? GroupPresentation{} : P2.subgroup(invariant).presentation;
    rep.invariant.divisible_rank = cover.genus();
    rep.invariant.divisible_label = "Prym(C/B)";
    rep.exact = rep.components == rep.ptt.torsion_order() && rep.invariant.torsion_order() == rep.components;
    return rep;
}

}  // namespace spectral_forge
