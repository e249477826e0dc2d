#pragma once

// Finitely generated abelian groups Z^n / R over 64-bit integers, via the
// Smith normal form with tracked unimodular transforms.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

using IntVec = std::vector<long long>;
using IntMat = std::vector<IntVec>;  // row-major

inline IntMat identity_matrix(std::size_t n) {
    IntMat m(n, IntVec(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline long long checked_mul_add(long long a, long long b, long long c) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r) || __builtin_add_overflow(r, c, &r))
        fail(ErrorKind::internal, "integer overflow in lattice computation");
    return r;
}

// U * A * V = D with D diagonal, d_1 | d_2 | ..., all d_i >= 0.
// Vinv is the inverse of V.
struct SmithForm {
    IntMat D, U, V, Vinv;
    std::size_t rank = 0;
};

inline SmithForm smith_normal_form(const IntMat& A, std::size_t cols) {
    const std::size_t m = A.size(), n = cols;
    SmithForm s{A, identity_matrix(m), identity_matrix(n), identity_matrix(n), 0};
    IntMat& D = s.D;
    for (auto& row : D)
        if (row.size() != n) fail(ErrorKind::domain, "ragged relation matrix");

    auto row_op = [&](std::size_t dst, std::size_t src, long long k) {  // row dst -= k row src
        for (std::size_t j = 0; j < n; ++j) D[dst][j] = checked_mul_add(-k, D[src][j], D[dst][j]);
        for (std::size_t j = 0; j < m; ++j) s.U[dst][j] = checked_mul_add(-k, s.U[src][j], s.U[dst][j]);
    };
    auto col_op = [&](std::size_t dst, std::size_t src, long long k) {  // col dst -= k col src
        for (std::size_t i = 0; i < m; ++i) D[i][dst] = checked_mul_add(-k, D[i][src], D[i][dst]);
        for (std::size_t i = 0; i < n; ++i) s.V[i][dst] = checked_mul_add(-k, s.V[i][src], s.V[i][dst]);
        for (std::size_t j = 0; j < n; ++j) s.Vinv[src][j] = checked_mul_add(k, s.Vinv[dst][j], s.Vinv[src][j]);
    };
    auto swap_rows = [&](std::size_t a, std::size_t b) {
        std::swap(D[a], D[b]);
        std::swap(s.U[a], s.U[b]);
    };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        for (auto& r : D) std::swap(r[a], r[b]);
        for (auto& r : s.V) std::swap(r[a], r[b]);
        std::swap(s.Vinv[a], s.Vinv[b]);
    };
    auto negate_row = [&](std::size_t a) {
        for (auto& x : D[a]) x = -x;
        for (auto& x : s.U[a]) x = -x;
    };

    std::size_t t = 0;
    while (t < std::min(m, n)) {
        // Pivot: smallest nonzero absolute value in the remaining block.
        std::size_t pi = m, pj = n;
        long long best = 0;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j)
                if (D[i][j] != 0 && (best == 0 || std::llabs(D[i][j]) < best)) {
                    best = std::llabs(D[i][j]);
                    pi = i;
                    pj = j;
                }
        if (best == 0) break;
        swap_rows(t, pi);
        swap_cols(t, pj);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (D[i][t] == 0) continue;
                row_op(i, t, D[i][t] / D[t][t]);
                if (D[i][t] != 0) {
                    swap_rows(t, i);
                    clean = false;
                }
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (D[t][j] == 0) continue;
                col_op(j, t, D[t][j] / D[t][t]);
                if (D[t][j] != 0) {
                    swap_cols(t, j);
                    clean = false;
                }
            }
            if (clean) {
                // Divisibility condition on the rest of the block.
                for (std::size_t i = t + 1; i < m && clean; ++i)
                    for (std::size_t j = t + 1; j < n && clean; ++j)
                        if (D[i][j] % D[t][t] != 0) {
                            row_op(t, i, -1);
                            clean = false;
                        }
            }
        }
        if (D[t][t] < 0) negate_row(t);
        ++t;
    }
    s.rank = t;
    return s;
}

// Basis (as rows) of the integer kernel {x : A x = 0}.
inline IntMat integer_kernel(const IntMat& A, std::size_t cols) {
    SmithForm s = smith_normal_form(A, cols);
    IntMat basis;
    for (std::size_t j = s.rank; j < cols; ++j) {
        IntVec v(cols);
        for (std::size_t i = 0; i < cols; ++i) v[i] = s.V[i][j];
        basis.push_back(v);
    }
    return basis;
}

struct GroupPresentation {
    int free_rank = 0;
    std::vector<long long> torsion;      // invariant factors > 1
    int divisible_rank = 0;              // rank of a divisible (complex torus or C*) summand, never enumerated
    std::string divisible_label;
    std::vector<std::string> labels;     // distinguished generators

    long long torsion_order() const {
        long long o = 1;
        for (long long t : torsion) o = checked_mul_add(o, t, 0);
        return o;
    }
    bool is_finite() const { return free_rank == 0 && divisible_rank == 0; }

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        auto sep = [&] { os << (first ? "" : " + "); first = false; };
        if (free_rank > 0) { sep(); os << "Z"; if (free_rank > 1) os << "^" << free_rank; }
        for (long long t : torsion) { sep(); os << "Z/" << t; }
        if (divisible_rank > 0) { sep(); os << divisible_label; }
        if (first) os << "0";
        return os.str();
    }
};

// Z^n / <relations>, relations given as rows of length n.
class FGAbelianGroup {
public:
    FGAbelianGroup(std::size_t generators, IntMat relations, std::vector<std::string> labels = {})
        : n_(generators), relations_(std::move(relations)), labels_(std::move(labels)), snf_(smith_normal_form(relations_, n_)) {}

    std::size_t generators() const { return n_; }
    const IntMat& relations() const { return relations_; }
    const std::vector<std::string>& labels() const { return labels_; }

    // Coordinates y = x V in the Smith basis: component i is reduced mod d_i (free if d_i = 0).
    IntVec coordinates(const IntVec& x) const {
        IntVec y(n_, 0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < n_; ++k) y[i] = checked_mul_add(x[k], snf_.V[k][i], y[i]);
        for (std::size_t i = 0; i < n_; ++i) {
            long long d = modulus(i);
            if (d > 0) y[i] = ((y[i] % d) + d) % d;
        }
        return y;
    }

    bool is_zero(const IntVec& x) const {
        for (long long c : coordinates(x))
            if (c != 0) return false;
        return true;
    }

    long long modulus(std::size_t i) const { return i < snf_.rank ? snf_.D[i][i] : 0; }

    GroupPresentation presentation() const {
        GroupPresentation p;
        for (std::size_t i = 0; i < n_; ++i) {
            long long d = modulus(i);
            if (d == 0) ++p.free_rank;
            else if (d > 1) p.torsion.push_back(d);
        }
        p.labels = labels_;
        return p;
    }

    // Presentation of the subgroup generated by the given elements, plus
    // generators of its cyclic factors expressed in Z^n.
    struct Subgroup {
        GroupPresentation presentation;
        IntMat factor_generators;  // one per cyclic factor, order given by factor_orders
        std::vector<long long> factor_orders;  // 0 for infinite order
    };

    Subgroup subgroup(const IntMat& gens) const {
        const std::size_t r = gens.size();
        // Kernel of Z^r -> G: x with sum x_k coords(g_k) = 0 in the Smith coordinates.
        IntMat images;
        for (const auto& g : gens) images.push_back(coordinates(g));
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < n_; ++i)
            if (modulus(i) != 1) active.push_back(i);
        // Columns: r generator coefficients then one slack per torsion coordinate.
        std::vector<std::size_t> torsion_rows;
        for (std::size_t i : active)
            if (modulus(i) > 1) torsion_rows.push_back(i);
        const std::size_t cols = r + torsion_rows.size();
        IntMat M;
        for (std::size_t i : active) {
            IntVec row(cols, 0);
            for (std::size_t k = 0; k < r; ++k) row[k] = images[k][i];
            auto it = std::find(torsion_rows.begin(), torsion_rows.end(), i);
            if (it != torsion_rows.end()) row[r + static_cast<std::size_t>(it - torsion_rows.begin())] = -modulus(i);
            M.push_back(row);
        }
        IntMat kernel = M.empty() ? identity_matrix(cols) : integer_kernel(M, cols);
        IntMat L;
        for (const auto& k : kernel) L.push_back(IntVec(k.begin(), k.begin() + static_cast<long>(r)));
        SmithForm s = smith_normal_form(L, r);
        Subgroup out;
        for (std::size_t i = 0; i < r; ++i) {
            long long d = i < s.rank ? s.D[i][i] : 0;
            if (d == 1) continue;
            if (d == 0) ++out.presentation.free_rank;
            else out.presentation.torsion.push_back(d);
            IntVec g(n_, 0);
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t j = 0; j < n_; ++j) g[j] = checked_mul_add(s.Vinv[i][k], gens[k][j], g[j]);
            out.factor_generators.push_back(g);
            out.factor_orders.push_back(d);
        }
        return out;
    }

private:
    std::size_t n_;
    IntMat relations_;
    std::vector<std::string> labels_;
    SmithForm snf_;
};

}  // namespace spectral_forge
