#pragma once

// Arithmetic on the Tate curve T = C* / <tau> and on line bundles over it.
//
// Automorphy convention: a line bundle of degree d with factor alpha has
// sections s(z) on C* satisfying
//
//     s(tau * z) = alpha * z^d * s(z).
//
// With |tau| > 1 this makes the Laurent coefficients of sections decay in both
// directions when d > 0, so H^0 has dimension d. Degree-0 bundles are the
// constant-factor bundles L_alpha, and L_alpha is trivial iff alpha lies in
// tau^Z. Two bundles (d, alpha) and (d, beta) are isomorphic iff alpha/beta
// lies in tau^Z.

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

using Complex = std::complex<double>;

inline Complex ipow(Complex base, long long exponent) {
    if (exponent < 0) return 1.0 / ipow(base, -exponent);
    Complex result{1.0, 0.0};
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

class TateCurve {
public:
    static constexpr double default_tolerance = 1e-9;
    static constexpr double min_modulus = 1.0 + 1e-6;

    explicit TateCurve(Complex tau, double tolerance = default_tolerance) : tau_(tau), tol_(tolerance) {
        if (!(std::abs(tau) >= min_modulus))
            fail(ErrorKind::domain, "|tau| must exceed 1 + 1e-6 (ill-conditioned quotient)");
        if (!(tolerance > 0.0)) fail(ErrorKind::domain, "tolerance must be positive");
        log_modulus_ = std::log(std::abs(tau_));
    }

    Complex tau() const noexcept { return tau_; }
    double tolerance() const noexcept { return tol_; }
    TateCurve with_tolerance(double tol) const { return TateCurve(tau_, tol); }

    Complex tau_power(long long k) const { return ipow(tau_, k); }

    // Nearest k with |q| ~ |tau|^k.
    long long nearest_index(Complex q) const {
        return std::llround(std::log(std::abs(q)) / log_modulus_);
    }

    // Flat distance of q from the lattice tau^Z: |Log(q / tau^k)| for the nearest k.
    double lattice_distance(Complex q) const {
        if (q == Complex{}) fail(ErrorKind::domain, "zero is not a point of C*");
        return std::abs(std::log(q / tau_power(nearest_index(q))));
    }

    // Membership in tau^Z: integer test on log|q|/log|tau| and matching argument.
    bool in_lattice(Complex q) const {
        if (q == Complex{}) return false;
        double t = std::log(std::abs(q)) / log_modulus_;
        long long k = std::llround(t);
        if (std::abs(t - static_cast<double>(k)) > tol_) return false;
        return std::abs(std::arg(q / tau_power(k))) <= tol_;
    }

    // Unique k with 1 <= |z tau^k| < |tau|.
    long long annulus_shift(Complex z) const {
        long long k = -static_cast<long long>(std::floor(std::log(std::abs(z)) / log_modulus_));
        double m = std::abs(z * tau_power(k));
        double upper = std::abs(tau_);
        if (m < 1.0) ++k;
        else if (m >= upper) --k;
        return k;
    }

    bool operator==(const TateCurve& o) const noexcept { return tau_ == o.tau_; }

private:
    Complex tau_;
    double tol_;
    double log_modulus_ = 0.0;
};

// A point of T (or of T* = Pic^0(T)), stored by its annulus representative.
class TatePoint {
public:
    TatePoint(const TateCurve& curve, Complex representative) : curve_(curve), value_(representative) {}

    const TateCurve& curve() const noexcept { return curve_; }
    Complex value() const noexcept { return value_; }

    TatePoint operator*(const TatePoint& o) const;
    TatePoint inverse() const;

    bool operator==(const TatePoint& o) const { return curve_.in_lattice(value_ / o.value_); }

private:
    TateCurve curve_;
    Complex value_;
};

inline TatePoint canonical_rep(Complex z, const TateCurve& curve) {
    if (z == Complex{}) fail(ErrorKind::domain, "canonical_rep of zero");
    Complex v = z * curve.tau_power(curve.annulus_shift(z));
    return TatePoint(curve, v);
}

inline TatePoint TatePoint::operator*(const TatePoint& o) const { return canonical_rep(value_ * o.value_, curve_); }
inline TatePoint TatePoint::inverse() const { return canonical_rep(1.0 / value_, curve_); }

// Distance in T between two points, for tolerance comparisons.
inline double tate_distance(const TatePoint& a, const TatePoint& b) {
    return a.curve().lattice_distance(a.value() / b.value());
}

// Order-independent comparison of two unordered pairs of points.
inline double pair_distance(const std::pair<TatePoint, TatePoint>& x, const std::pair<TatePoint, TatePoint>& y) {
    double straight = std::max(tate_distance(x.first, y.first), tate_distance(x.second, y.second));
    double crossed = std::max(tate_distance(x.first, y.second), tate_distance(x.second, y.first));
    return std::min(straight, crossed);
}

struct TateLineBundle {
    TateCurve curve;
    int degree = 0;
    Complex factor{1.0, 0.0};

    TateLineBundle(const TateCurve& c, int d, Complex alpha) : curve(c), degree(d), factor(alpha) {
        if (alpha == Complex{}) fail(ErrorKind::domain, "automorphy factor must be nonzero");
    }

    static TateLineBundle trivial(const TateCurve& c) { return TateLineBundle(c, 0, 1.0); }

    TatePoint factor_point() const { return canonical_rep(factor, curve); }

    // Point of T* where H^1(L (x) L_alpha) jumps for a degree-0 L: alpha = factor^-1.
    TatePoint spectral_point() const { return canonical_rep(1.0 / factor, curve); }

    bool isomorphic(const TateLineBundle& o) const {
        return degree == o.degree && curve.in_lattice(factor / o.factor);
    }
};

inline TateLineBundle lb_tensor(const TateLineBundle& a, const TateLineBundle& b) {
    if (!(a.curve == b.curve)) fail(ErrorKind::domain, "line bundles live on different curves");
    return TateLineBundle(a.curve, a.degree + b.degree, a.factor * b.factor);
}

inline TateLineBundle lb_dual(const TateLineBundle& a) { return TateLineBundle(a.curve, -a.degree, 1.0 / a.factor); }

inline bool lb_is_trivial(const TateLineBundle& l) { return l.degree == 0 && l.curve.in_lattice(l.factor); }

struct Cohomology {
    int h0 = 0;
    int h1 = 0;
    bool operator==(const Cohomology&) const = default;
};

// Closed form on an elliptic curve; h0 - h1 = degree always.
inline Cohomology lb_cohomology(const TateLineBundle& l) {
    if (l.degree > 0) return {l.degree, 0};
    if (l.degree < 0) return {0, -l.degree};
    return lb_is_trivial(l) ? Cohomology{1, 1} : Cohomology{0, 0};
}

// Truncated two-sided Laurent series sum_{n = lowest}^{lowest + size - 1} c_n z^n.
struct LaurentSeries {
    int lowest = 0;
    std::vector<Complex> coefficients;

    Complex coefficient(int n) const {
        int i = n - lowest;
        if (i < 0 || i >= static_cast<int>(coefficients.size())) return {};
        return coefficients[static_cast<std::size_t>(i)];
    }

    Complex operator()(Complex z) const {
        Complex sum{};
        for (std::size_t i = 0; i < coefficients.size(); ++i)
            sum += coefficients[i] * ipow(z, lowest + static_cast<long long>(i));
        return sum;
    }
};

inline constexpr int default_theta_terms = 64;

// Basis of H^0 for a positive-degree bundle: seed a_r = 1 for r in [0, d) and
// propagate a_n = alpha tau^-n a_{n-d} both ways over indices [-n_terms, n_terms].
// Throws if the truncated tail is not below the curve tolerance.
inline std::vector<LaurentSeries> theta_sections(const TateLineBundle& l, int n_terms = default_theta_terms) {
    if (l.degree <= 0) fail(ErrorKind::unsupported, "theta_sections needs positive degree");
    if (n_terms < l.degree) fail(ErrorKind::domain, "n_terms smaller than the degree");
    const int d = l.degree;
    const Complex alpha = l.factor;
    const Complex tau = l.curve.tau();
    std::vector<LaurentSeries> basis;
    for (int seed = 0; seed < d; ++seed) {
        LaurentSeries s{-n_terms, std::vector<Complex>(static_cast<std::size_t>(2 * n_terms + 1))};
        auto at = [&](int n) -> Complex& { return s.coefficients[static_cast<std::size_t>(n + n_terms)]; };
        at(seed) = 1.0;
        for (int n = seed + d; n <= n_terms; n += d) at(n) = alpha * ipow(tau, -n) * at(n - d);
        for (int m = seed - d; m >= -n_terms; m -= d) at(m) = at(m + d) * ipow(tau, m + d) / alpha;

        double peak = 0.0;
        for (auto c : s.coefficients) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                fail(ErrorKind::domain, "theta recursion overflowed");
            peak = std::max(peak, std::abs(c));
        }
        double tail = 0.0;
        for (int k = 0; k < d; ++k) {
            tail = std::max(tail, std::abs(at(n_terms - k)));
            tail = std::max(tail, std::abs(at(-n_terms + k)));
        }
        if (tail > l.curve.tolerance() * peak)
            fail(ErrorKind::domain, "theta truncation tail above tolerance; increase n_terms");
        basis.push_back(std::move(s));
    }
    return basis;
}

}  // namespace spectral_forge
