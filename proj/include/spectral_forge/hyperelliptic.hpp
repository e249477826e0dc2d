#pragma once

// Exact divisor-class arithmetic on hyperelliptic double covers C -> P^1 in the
// odd model w^2 = f(b), deg f = 2g + 1, with the single point at infinity a
// branch point.
//
// A DivisorClass holds a Mumford pair (u, v) together with an integer multiple
// k of the point at infinity, representing div(u, v) + k * inf. Classes of
// degree zero have k = -deg u. All arithmetic is over Q; no tolerances.

#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "spectral_forge/rational_poly.hpp"

namespace spectral_forge {

class HyperCover {
public:
    explicit HyperCover(QPoly f) : f_(std::move(f)) {
        if (f_.degree() < 1 || f_.degree() % 2 == 0)
            fail(ErrorKind::domain, "odd model needs deg f = 2g + 1");
        if (!is_squarefree(f_)) fail(ErrorKind::domain, "f must be squarefree");
        genus_ = (f_.degree() - 1) / 2;
    }

    const QPoly& f() const { return f_; }
    int genus() const { return genus_; }

    // Finite branch points; infinity is always a branch point as well.
    std::vector<std::complex<double>> finite_branch_points() const { return complex_roots(f_); }

    bool is_branch_point(const Rational& b) const { return f_(b) == 0; }

    bool operator==(const HyperCover& o) const { return f_ == o.f_; }

private:
    QPoly f_;
    int genus_ = 0;
};

using CoverPtr = std::shared_ptr<const HyperCover>;

inline CoverPtr make_cover(QPoly f) { return std::make_shared<const HyperCover>(std::move(f)); }

struct CurvePoint {
    Rational x;
    Rational w;
};

inline bool on_curve(const HyperCover& c, const CurvePoint& p) { return p.w * p.w == c.f()(p.x); }

inline CurvePoint involution(const CurvePoint& p) { return {p.x, -p.w}; }

class DivisorClass {
public:
    DivisorClass(CoverPtr cover, QPoly u, QPoly v, long infinity_multiple)
        : cover_(std::move(cover)), u_(std::move(u)), v_(std::move(v)), k_(infinity_multiple) {
        if (!cover_) fail(ErrorKind::domain, "divisor without a cover");
        if (u_.is_zero() || u_.lead() != 1) fail(ErrorKind::domain, "Mumford u must be monic");
        if (v_.degree() >= u_.degree() && !(v_.is_zero() && u_.degree() == 0))
            fail(ErrorKind::domain, "Mumford v must have degree < deg u");
        if (!((v_ * v_ - cover_->f()) % u_).is_zero()) fail(ErrorKind::domain, "Mumford pair needs v^2 = f mod u");
    }

    // Degree-0 class div(u, v) - deg(u) inf.
    DivisorClass(CoverPtr cover, QPoly u, QPoly v) : DivisorClass(cover, u, v, -static_cast<long>(u.degree())) {}

    static DivisorClass zero(CoverPtr cover) { return DivisorClass(std::move(cover), QPoly{1}, QPoly{}, 0); }

    // P - inf.
    static DivisorClass point(CoverPtr cover, const CurvePoint& p) {
        if (!on_curve(*cover, p)) fail(ErrorKind::domain, "point is not on the curve");
        return DivisorClass(std::move(cover), QPoly::linear_root(p.x), QPoly::constant(p.w), -1);
    }

    // The divisor P itself (degree 1).
    static DivisorClass effective_point(CoverPtr cover, const CurvePoint& p) {
        DivisorClass d = point(std::move(cover), p);
        d.k_ = 0;
        return d;
    }

    const CoverPtr& cover() const { return cover_; }
    const QPoly& u() const { return u_; }
    const QPoly& v() const { return v_; }
    long infinity_multiple() const { return k_; }
    long degree() const { return u_.degree() + k_; }

    bool is_reduced() const { return u_.degree() <= cover_->genus(); }
    bool is_zero_class() const;

private:
    friend DivisorClass cantor_compose(const DivisorClass&, const DivisorClass&);
    friend DivisorClass cantor_reduce(const DivisorClass&);
    friend DivisorClass involution_pullback(const DivisorClass&);

    struct Unchecked {};
    DivisorClass(Unchecked, CoverPtr cover, QPoly u, QPoly v, long k)
        : cover_(std::move(cover)), u_(std::move(u)), v_(std::move(v)), k_(k) {}

    CoverPtr cover_;
    QPoly u_;
    QPoly v_;
    long k_ = 0;
};

inline void require_same_cover(const DivisorClass& a, const DivisorClass& b) {
    if (a.cover() != b.cover() && !(*a.cover() == *b.cover()))
        fail(ErrorKind::cover_mismatch, "divisor classes live on different covers");
}

// Composition step of Cantor's algorithm (semi-reduced sum, not yet reduced).
inline DivisorClass cantor_compose(const DivisorClass& a, const DivisorClass& b) {
    require_same_cover(a, b);
    const QPoly& f = a.cover_->f();
    auto [d0, e1, e2] = xgcd(a.u_, b.u_);
    auto [d, c1, c2] = xgcd(d0, a.v_ + b.v_);
    QPoly s1 = c1 * e1, s2 = c1 * e2, s3 = c2;
    QPoly u = (a.u_ * b.u_) / (d * d);
    QPoly v = ((s1 * a.u_ * b.v_ + s2 * b.u_ * a.v_ + s3 * (a.v_ * b.v_ + f)) / d) % u;
    long k = a.k_ + b.k_ + 2L * d.degree();
    return DivisorClass(DivisorClass::Unchecked{}, a.cover_, u.monic(), v, k);
}

inline DivisorClass cantor_reduce(const DivisorClass& D) {
    const int g = D.cover_->genus();
    const QPoly& f = D.cover_->f();
    QPoly u = D.u_, v = D.v_;
    long k = D.k_;
    while (u.degree() > g) {
        QPoly un = ((f - v * v) / u).monic();
        QPoly vn = (-v) % un;
        k += u.degree() - un.degree();
        u = std::move(un);
        v = std::move(vn);
    }
    if (u.degree() == 0) v = QPoly{};
    return DivisorClass(DivisorClass::Unchecked{}, D.cover_, std::move(u), std::move(v), k);
}

inline DivisorClass class_add(const DivisorClass& a, const DivisorClass& b) { return cantor_reduce(cantor_compose(a, b)); }

// iota^* D: (u, v) -> (u, -v mod u).
inline DivisorClass involution_pullback(const DivisorClass& D) {
    QPoly v = D.u_.degree() == 0 ? QPoly{} : (-D.v_) % D.u_;
    return DivisorClass(DivisorClass::Unchecked{}, D.cover_, D.u_, std::move(v), D.k_);
}

// In the odd model the inverse class is the involution image.
inline DivisorClass class_neg(const DivisorClass& D) { return involution_pullback(D); }

inline DivisorClass class_sub(const DivisorClass& a, const DivisorClass& b) { return class_add(a, class_neg(b)); }

inline DivisorClass class_scale(const DivisorClass& D, long n) {
    DivisorClass acc = DivisorClass::zero(D.cover());
    DivisorClass base = n < 0 ? class_neg(D) : D;
    for (unsigned long m = static_cast<unsigned long>(n < 0 ? -n : n); m > 0; m >>= 1) {
        if (m & 1) acc = class_add(acc, base);
        base = class_add(base, base);
    }
    return acc;
}

inline bool DivisorClass::is_zero_class() const {
    if (degree() != 0) return false;
    return cantor_reduce(*this).u_.degree() == 0;
}

inline bool class_equal(const DivisorClass& a, const DivisorClass& b) {
    require_same_cover(a, b);
    if (a.degree() != b.degree()) return false;
    return class_sub(a, b).is_zero_class();
}

// Degree of gamma_* D in Pic(P^1) = Z.
inline long norm(const DivisorClass& D) { return D.degree(); }

// D + iota^* D = 0, the involution-twist condition realised on C.
inline bool in_prym(const DivisorClass& D) {
    if (D.degree() != 0) fail(ErrorKind::domain, "in_prym needs a degree-0 class");
    return class_add(D, involution_pullback(D)).is_zero_class();
}

// Sum of P_i - inf over a list of points.
inline DivisorClass divisor_of_points(const CoverPtr& cover, const std::vector<CurvePoint>& points) {
    DivisorClass acc = DivisorClass::zero(cover);
    for (const auto& p : points) acc = cantor_compose(acc, DivisorClass::point(cover, p));
    return acc;
}

// Rational points with integer abscissa in [-bound, bound], both signs of w.
inline std::vector<CurvePoint> integral_x_points(const HyperCover& c, long bound) {
    std::vector<CurvePoint> out;
    for (long x = -bound; x <= bound; ++x) {
        Rational y = c.f()(Rational(x));
        if (y < 0) continue;
        mpz_class num = y.get_num(), den = y.get_den();
        if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) continue;
        Rational w(mpz_class(sqrt(num)), mpz_class(sqrt(den)));
        w.canonicalize();
        out.push_back({x, w});
        if (w != 0) out.push_back({x, -w});
    }
    return out;
}

}  // namespace spectral_forge
