#pragma once

// Dense univariate polynomials over Q (GMP rationals), ascending coefficients.

#include <gmpxx.h>

#include <algorithm>
#include <complex>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

using Rational = mpq_class;

class QPoly {
public:
    QPoly() = default;
    explicit QPoly(std::vector<Rational> coefficients) : c_(std::move(coefficients)) { trim(); }
    QPoly(std::initializer_list<long> coefficients) {
        for (long x : coefficients) c_.emplace_back(x);
        trim();
    }

    static QPoly constant(const Rational& r) { return QPoly(std::vector<Rational>{r}); }
    static QPoly monomial(const Rational& r, int degree) {
        std::vector<Rational> c(static_cast<std::size_t>(degree) + 1);
        c.back() = r;
        return QPoly(std::move(c));
    }
    // x - root
    static QPoly linear_root(const Rational& root) { return QPoly(std::vector<Rational>{-root, Rational(1)}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
    const std::vector<Rational>& coefficients() const { return c_; }
    Rational coefficient(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(i)] : Rational(0);
    }
    Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

    QPoly monic() const {
        if (is_zero()) return *this;
        QPoly r = *this;
        Rational l = lead();
        for (auto& x : r.c_) x /= l;
        return r;
    }

    Rational operator()(const Rational& x) const {
        Rational acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    std::complex<double> eval(std::complex<double> z) const {
        std::complex<double> acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + it->get_d();
        return acc;
    }

    QPoly derivative() const {
        std::vector<Rational> d;
        for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
        return QPoly(std::move(d));
    }

    friend QPoly operator+(const QPoly& a, const QPoly& b) {
        std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coefficient(static_cast<int>(i)) + b.coefficient(static_cast<int>(i));
        return QPoly(std::move(r));
    }
    friend QPoly operator-(const QPoly& a) {
        QPoly r = a;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend QPoly operator-(const QPoly& a, const QPoly& b) { return a + (-b); }
    friend QPoly operator*(const QPoly& a, const QPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return QPoly(std::move(r));
    }
    friend QPoly operator*(const Rational& s, const QPoly& a) { return QPoly::constant(s) * a; }

    friend bool operator==(const QPoly& a, const QPoly& b) { return a.c_ == b.c_; }

    // Euclidean division: a = q b + r, deg r < deg b.
    static std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b) {
        if (b.is_zero()) fail(ErrorKind::domain, "polynomial division by zero");
        std::vector<Rational> rem = a.c_;
        const int db = b.degree();
        if (a.degree() < db) return {QPoly{}, a};
        std::vector<Rational> quo(static_cast<std::size_t>(a.degree() - db) + 1);
        for (int k = a.degree() - db; k >= 0; --k) {
            Rational f = rem[static_cast<std::size_t>(k + db)] / b.lead();
            quo[static_cast<std::size_t>(k)] = f;
            if (f == 0) continue;
            for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k + j)] -= f * b.c_[static_cast<std::size_t>(j)];
        }
        rem.resize(static_cast<std::size_t>(db));
        return {QPoly(std::move(quo)), QPoly(std::move(rem))};
    }

    friend QPoly operator/(const QPoly& a, const QPoly& b) { return divmod(a, b).first; }
    friend QPoly operator%(const QPoly& a, const QPoly& b) { return divmod(a, b).second; }

    std::string str() const {
        if (is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (int i = degree(); i >= 0; --i) {
            const Rational& x = c_[static_cast<std::size_t>(i)];
            if (x == 0) continue;
            if (!first) os << (x > 0 ? " + " : " - ");
            else if (x < 0) os << "-";
            Rational ax = abs(x);
            if (ax != 1 || i == 0) os << ax.get_str();
            if (i >= 1) os << "x";
            if (i >= 2) os << "^" << i;
            first = false;
        }
        return os.str();
    }

private:
    void trim() {
        for (auto& x : c_) x.canonicalize();
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

// Extended gcd: returns (g, s, t) with s a + t b = g and g monic (or zero).
inline std::tuple<QPoly, QPoly, QPoly> xgcd(const QPoly& a, const QPoly& b) {
    QPoly r0 = a, r1 = b;
    QPoly s0 = QPoly::constant(1), s1;
    QPoly t0, t1 = QPoly::constant(1);
    while (!r1.is_zero()) {
        auto [q, r] = QPoly::divmod(r0, r1);
        r0 = std::move(r1);
        r1 = std::move(r);
        QPoly s2 = s0 - q * s1;
        QPoly t2 = t0 - q * t1;
        s0 = std::move(s1);
        s1 = std::move(s2);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r0.is_zero()) return {r0, s0, t0};
    Rational l = r0.lead();
    Rational inv = 1 / l;
    return {inv * r0, inv * s0, inv * t0};
}

inline QPoly gcd(const QPoly& a, const QPoly& b) { return std::get<0>(xgcd(a, b)); }

inline bool is_squarefree(const QPoly& f) { return f.degree() >= 1 && gcd(f, f.derivative()).degree() == 0; }

// All complex roots (Durand-Kerner with Newton polishing).
inline std::vector<std::complex<double>> complex_roots(const QPoly& f) {
    using C = std::complex<double>;
    const int n = f.degree();
    if (n < 1) return {};
    std::vector<C> coef;
    for (auto& x : f.coefficients()) coef.emplace_back(x.get_d());
    const C lead = coef.back();
    for (auto& x : coef) x /= lead;
    auto eval = [&](C z) {
        C acc{};
        for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * z + *it;
        return acc;
    };
    double bound = 0.0;
    for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(coef[static_cast<std::size_t>(i)]));
    bound += 1.0;
    std::vector<C> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = std::polar(0.5 * bound, 2.0 * std::numbers::pi * (i + 0.25) / n);
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            C denom{1.0, 0.0};
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i) denom *= (z[i] - z[j]);
            C step = eval(z[i]) / denom;
            z[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-15 * bound) break;
    }
    return z;
}

}  // namespace spectral_forge
