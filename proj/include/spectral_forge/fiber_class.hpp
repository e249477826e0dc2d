#pragma once

// Rank-2 degree-0 bundles on a single fibre T and their spectral data.
//
// Classes are stored symbolically. A semistable class is either a sum of two
// degree-0 line bundles or the nonsplit self-extension F_2 (x) L. An unstable
// degree-0 rank-2 bundle on an elliptic curve always splits, as
// lambda (+) (lambda^* (x) det) with deg lambda = -h < 0.

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "spectral_forge/tate_curve.hpp"

namespace spectral_forge {

struct SplitClass {
    TateLineBundle first;
    TateLineBundle second;
};

struct AtiyahClass {
    TateLineBundle twist;  // E = F_2 (x) twist
};

struct UnstableClass {
    int height = 1;          // h >= 1
    TateLineBundle low;      // degree -h summand lambda
    TateLineBundle det;      // degree 0
    TateLineBundle high() const { return lb_tensor(lb_dual(low), det); }
};

using Rank2FiberClass = std::variant<SplitClass, AtiyahClass, UnstableClass>;

inline Rank2FiberClass make_split(const TateLineBundle& a, const TateLineBundle& b) {
    if (a.degree != 0 || b.degree != 0) fail(ErrorKind::domain, "split summands must have degree 0");
    return SplitClass{a, b};
}

inline Rank2FiberClass make_atiyah(const TateLineBundle& l) {
    if (l.degree != 0) fail(ErrorKind::domain, "Atiyah twist must have degree 0");
    return AtiyahClass{l};
}

inline Rank2FiberClass make_unstable(int h, const TateLineBundle& low, const TateLineBundle& det) {
    if (h < 1) fail(ErrorKind::domain, "height must be positive");
    if (low.degree != -h) fail(ErrorKind::domain, "low summand must have degree -h");
    if (det.degree != 0) fail(ErrorKind::domain, "determinant must have degree 0");
    return UnstableClass{h, low, det};
}

inline TateLineBundle determinant(const Rank2FiberClass& c) {
    return std::visit(
        [](const auto& v) -> TateLineBundle {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SplitClass>) return lb_tensor(v.first, v.second);
            else if constexpr (std::is_same_v<T, AtiyahClass>) return lb_tensor(v.twist, v.twist);
            else return v.det;
        },
        c);
}

// E (x) L for a degree-0 line bundle L.
inline Rank2FiberClass twist(const Rank2FiberClass& c, const TateLineBundle& l) {
    return std::visit(
        [&](const auto& v) -> Rank2FiberClass {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SplitClass>) return SplitClass{lb_tensor(v.first, l), lb_tensor(v.second, l)};
            else if constexpr (std::is_same_v<T, AtiyahClass>) return AtiyahClass{lb_tensor(v.twist, l)};
            else return UnstableClass{v.height, lb_tensor(v.low, l), lb_tensor(v.det, lb_tensor(l, l))};
        },
        c);
}

inline bool same_class(const Rank2FiberClass& a, const Rank2FiberClass& b) {
    if (a.index() != b.index()) return false;
    if (auto* s = std::get_if<SplitClass>(&a)) {
        const auto& t = std::get<SplitClass>(b);
        return (s->first.isomorphic(t.first) && s->second.isomorphic(t.second)) ||
               (s->first.isomorphic(t.second) && s->second.isomorphic(t.first));
    }
    if (auto* at = std::get_if<AtiyahClass>(&a)) return at->twist.isomorphic(std::get<AtiyahClass>(b).twist);
    const auto& u = std::get<UnstableClass>(a);
    const auto& w = std::get<UnstableClass>(b);
    return u.height == w.height && u.low.isomorphic(w.low) && u.det.isomorphic(w.det);
}

inline std::string describe(const Rank2FiberClass& c) {
    switch (c.index()) {
        case 0: return "split";
        case 1: return "atiyah";
        default: return "unstable";
    }
}

// Semistable and not lambda_0 (+) lambda_0.
inline bool is_regular(const Rank2FiberClass& c) {
    if (auto* s = std::get_if<SplitClass>(&c)) return !s->first.isomorphic(s->second);
    return std::holds_alternative<AtiyahClass>(c);
}

struct Vertical {};
using SpectralPair = std::pair<TatePoint, TatePoint>;
using SpectralPoints = std::variant<Vertical, SpectralPair>;

// Points alpha of T* with H^1(E (x) L_alpha) != 0.
inline SpectralPoints spectral_points(const Rank2FiberClass& c) {
    if (auto* s = std::get_if<SplitClass>(&c)) return SpectralPair{s->first.spectral_point(), s->second.spectral_point()};
    if (auto* a = std::get_if<AtiyahClass>(&c)) return SpectralPair{a->twist.spectral_point(), a->twist.spectral_point()};
    return Vertical{};
}

inline int h1_restrict(const Rank2FiberClass& c, const TatePoint& alpha) {
    return std::visit(
        [&](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            const TateLineBundle la(alpha.curve(), 0, alpha.value());
            if constexpr (std::is_same_v<T, SplitClass>) {
                return lb_cohomology(lb_tensor(v.first, la)).h1 + lb_cohomology(lb_tensor(v.second, la)).h1;
            } else if constexpr (std::is_same_v<T, AtiyahClass>) {
                // h^1(F_2) = 1; F_2 (x) M is acyclic for nontrivial degree-0 M.
                return lb_is_trivial(lb_tensor(v.twist, la)) ? 1 : 0;
            } else {
                return lb_cohomology(lb_tensor(v.low, la)).h1 + lb_cohomology(lb_tensor(v.high(), la)).h1;
            }
        },
        c);
}

// ---------------------------------------------------------------------------
// Nonsplit extensions 0 -> lambda -> V -> lambda^* -> 0 with deg lambda = -1.
//
// lambda has automorphy factor beta z^-1. A class in H^1(T, lambda^2) is
// represented by e(z) = p + q z modulo coboundaries g(tau z) - beta^2 z^-2 g(z);
// V then has automorphy matrix [[beta z^-1, e(z) beta^-1 z], [0, beta^-1 z]].
//
// V contains the degree-0 line bundle L_a iff the class pairs to zero with the
// product section sigma_a = s * t in H^0(lambda^-2), where s spans
// H^0(lambda^* L_a^-1) and t spans H^0(lambda^* L_a). Under the residue pairing
// <e, sigma> = CT(e(z) sigma(tau z)) this reads
//
//     p sigma_0(a) + q tau^-1 sigma_{-1}(a) = 0,
//
// with the theta sums
//     sigma_0(a)    = sum_n a^-2n tau^-(n^2)
//     sigma_{-1}(a) = (beta / a) sum_n a^-2n tau^-(n^2 + n).
//
// The ratio R(a) = tau^-1 sigma_{-1} / sigma_0 is an even degree-2 elliptic
// function on T*, so V = L_a (+) L_a^-1 for the two roots of R = -p/q, and
// V = F_2 (x) L_e when the root is a 2-torsion point e.
// ---------------------------------------------------------------------------

class ExtensionModel {
public:
    ExtensionModel(const TateCurve& curve, Complex beta) : curve_(curve), beta_(beta) {
        if (beta == Complex{}) fail(ErrorKind::domain, "lambda factor must be nonzero");
    }

    const TateCurve& curve() const { return curve_; }
    Complex beta() const { return beta_; }

    std::pair<Complex, Complex> sigma(Complex a) const {
        const Complex tau = curve_.tau();
        const Complex inv_a2 = 1.0 / (a * a);
        Complex s0{}, s1{};
        for (int n = 0; n <= max_terms; ++n) {
            Complex t0 = ipow(inv_a2, n) * ipow(tau, -static_cast<long long>(n) * n);
            Complex t1 = ipow(inv_a2, n) * ipow(tau, -static_cast<long long>(n) * n - n);
            Complex u0{}, u1{};
            if (n > 0) {
                u0 = ipow(inv_a2, -n) * ipow(tau, -static_cast<long long>(n) * n);
                u1 = ipow(inv_a2, -n) * ipow(tau, -static_cast<long long>(n) * n + n);
            }
            s0 += t0 + u0;
            s1 += t1 + u1;
            double term = std::abs(t0) + std::abs(t1) + std::abs(u0) + std::abs(u1);
            if (n > 2 && term < 1e-18 * (std::abs(s0) + std::abs(s1))) break;
        }
        return {s0, s1 * beta_ / a};
    }

    // Homogeneous coordinates [tau^-1 sigma_{-1} : sigma_0] of the image of a in P^1.
    std::pair<Complex, Complex> projective_image(Complex a) const {
        auto [s0, sm1] = sigma(a);
        return {sm1 / curve_.tau(), s0};
    }

    // Extension class (p, q), normalised to unit length, whose bundle contains L_a.
    std::pair<Complex, Complex> class_for(Complex a) const {
        auto [x, y] = projective_image(a);
        Complex p = x, q = -y;
        double n = std::sqrt(std::norm(p) + std::norm(q));
        return {p / n, q / n};
    }

    static constexpr int max_terms = 400;

private:
    TateCurve curve_;
    Complex beta_;
};

namespace detail {

inline double chordal(Complex x0, Complex y0, Complex x1, Complex y1) {
    // Chordal distance between [x0:y0] and [x1:y1] on P^1.
    double cross = std::abs(x0 * y1 - x1 * y0);
    return cross / std::sqrt((std::norm(x0) + std::norm(y0)) * (std::norm(x1) + std::norm(y1)));
}

// Residual of R(e^t) = X / Y, in affine form chosen to stay away from poles.
struct RootEquation {
    const ExtensionModel& model;
    Complex x, y;  // target [X : Y]
    bool use_ratio() const { return std::abs(x) <= std::abs(y); }

    Complex operator()(Complex t) const {
        auto [px, py] = model.projective_image(std::exp(t));
        if (use_ratio()) return px / py - x / y;
        return py / px - y / x;
    }
};

template <class F>
std::optional<Complex> newton(const F& f, Complex start, int max_iter = 80) {
    Complex t = start;
    for (int it = 0; it < max_iter; ++it) {
        Complex ft = f(t);
        double h = 1e-6 * std::max(1.0, std::abs(t));
        Complex df = (f(t + h) - f(t - h)) / (2.0 * h);
        if (df == Complex{} || !std::isfinite(std::abs(df))) return std::nullopt;
        Complex step = ft / df;
        t -= step;
        if (!std::isfinite(std::abs(t))) return std::nullopt;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t))) return t;
    }
    return t;
}

}  // namespace detail

// Logarithms of the four 2-torsion points of T*.
inline std::array<Complex, 4> two_torsion_logs(const TateCurve& curve) {
    const Complex log_tau = std::log(curve.tau());
    const Complex ipi{0.0, std::numbers::pi};
    return {Complex{}, ipi, log_tau / 2.0, log_tau / 2.0 + ipi};
}

// A root at distance u from a 2-torsion point moves R by about c u^2. Once
// c u^2 is below the accuracy of the theta sums the split pair cannot be told
// apart from the double root, and the class resolves to Atiyah. The radius is
// never below this floor.
inline constexpr double atiyah_resolution = 1e-7;
inline constexpr double theta_sum_accuracy = 1e-14;

inline Rank2FiberClass make_extension(const TateLineBundle& lambda, Complex p, Complex q) {
    if (lambda.degree != -1) fail(ErrorKind::domain, "make_extension needs deg(lambda) = -1");
    if (p == Complex{} && q == Complex{})
        fail(ErrorKind::split_unstable, "zero extension class gives lambda (+) lambda^*, which is unstable");
    const TateCurve& curve = lambda.curve;
    const ExtensionModel model(curve, lambda.factor);

    // Target point [X : Y] with R(a) = X / Y.
    const Complex X = -p, Y = q;
    detail::RootEquation eq{model, X, Y};

    // Coarse scan over the fundamental parallelogram in t = log a.
    const Complex log_tau = std::log(curve.tau());
    const Complex two_pi_i{0.0, 2.0 * std::numbers::pi};
    constexpr int grid = 48;
    Complex best_t{};
    double best = 2.0;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Complex t = (i + 0.5) / grid * log_tau + (j + 0.5) / grid * two_pi_i;
            auto [px, py] = model.projective_image(std::exp(t));
            double d = detail::chordal(px, py, X, Y);
            if (d < best) {
                best = d;
                best_t = t;
            }
        }
    }
    // Near a 2-torsion point the two roots merge; R(e^(t_e + u)) is even in u,
    // so solve in s = u^2 where the root is simple.
    Complex t = best_t;
    bool refined = false;
    const double reach = 0.45 * std::min(std::abs(log_tau) / 2.0, std::numbers::pi);
    Complex te{}, u{};
    double nearest = std::numeric_limits<double>::infinity();
    for (Complex e : two_torsion_logs(curve)) {
        Complex ratio = std::exp(best_t - e);
        Complex v = std::log(ratio / curve.tau_power(curve.nearest_index(ratio)));
        if (std::abs(v) < nearest) {
            nearest = std::abs(v);
            te = e;
            u = v;
        }
    }
    if (nearest < reach) {
        auto in_s = [&](Complex s) { return eq(te + std::sqrt(s)); };
        if (auto s = detail::newton(in_s, u * u)) {
            u = std::sqrt(*s);
            constexpr double probe = 1e-2;
            double curvature = std::abs(eq(te + probe) - eq(te)) / (probe * probe);
            double radius = std::sqrt(theta_sum_accuracy / std::max(curvature, 1e-300));
            if (std::abs(u) <= std::max({curve.tolerance(), atiyah_resolution, radius}))
                return make_atiyah(TateLineBundle(curve, 0, std::exp(te)));
            t = te + u;
            refined = true;
        }
    }
    if (!refined) t = detail::newton(eq, best_t).value_or(best_t);

    Complex a = canonical_rep(std::exp(t), curve).value();
    auto [px, py] = model.projective_image(a);
    if (detail::chordal(px, py, X, Y) > 1e-8)
        fail(ErrorKind::internal, "extension root search did not converge");
    return make_split(TateLineBundle(curve, 0, a), TateLineBundle(curve, 0, 1.0 / a));
}

inline Rank2FiberClass make_extension(const TateLineBundle& lambda, std::pair<Complex, Complex> cls) {
    return make_extension(lambda, cls.first, cls.second);
}

// Inverse of make_extension on trivial-determinant regular classes: the class
// (p, q) whose extension is L_a (+) L_a^-1 (or F_2 (x) L_a at 2-torsion a).
inline std::pair<Complex, Complex> extension_class_for(const TateLineBundle& lambda, const TatePoint& a) {
    if (lambda.degree != -1) fail(ErrorKind::domain, "extension_class_for needs deg(lambda) = -1");
    return ExtensionModel(lambda.curve, lambda.factor).class_for(a.value());
}

}  // namespace spectral_forge
