#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <stdexcept>
#include <vector>

namespace lmc {

using BigInt = boost::multiprecision::cpp_int;
using IntMat = std::vector<std::vector<BigInt>>;  // row-major

inline IntMat int_matrix(int rows, int cols) {
    return IntMat(rows, std::vector<BigInt>(cols, 0));
}

inline int mat_rows(const IntMat& A) { return static_cast<int>(A.size()); }
inline int mat_cols(const IntMat& A) {
    return A.empty() ? 0 : static_cast<int>(A[0].size());
}

inline IntMat mat_mul(const IntMat& A, const IntMat& B) {
    int n = mat_rows(A), k = mat_cols(A), m = mat_cols(B);
    if (k != mat_rows(B)) throw std::invalid_argument("mat_mul: shape");
    IntMat C = int_matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            if (A[i][j] == 0) continue;
            for (int l = 0; l < m; ++l) C[i][l] += A[i][j] * B[j][l];
        }
    return C;
}

inline bool mat_is_zero(const IntMat& A) {
    for (const auto& row : A)
        for (const auto& v : row)
            if (v != 0) return false;
    return true;
}

// Smith normal form over the integers (exact, arbitrary precision).
// Returns the nonzero elementary divisors d_1 | d_2 | ... ; the rank is
// their count.
struct SmithResult {
    std::vector<BigInt> divisors;  // positive, divisibility chain
    int rank() const { return static_cast<int>(divisors.size()); }
};

inline SmithResult smith_normal_form(IntMat A) {
    using boost::multiprecision::abs;
    int R = mat_rows(A), C = mat_cols(A);
    SmithResult out;
    int t = 0;  // current pivot index
    while (t < R && t < C) {
        // move the nonzero entry of least magnitude in the trailing block
        // into the pivot slot; re-selecting it after every reduction keeps
        // the quotients (and hence the entry growth) small
        int pi = -1, pj = -1;
        BigInt best = 0;
        for (int i = t; i < R; ++i)
            for (int j = t; j < C; ++j)
                if (A[i][j] != 0 &&
                    (pi < 0 || abs(A[i][j]) < best)) {
                    pi = i;
                    pj = j;
                    best = abs(A[i][j]);
                }
        if (pi < 0) break;  // trailing block is zero
        std::swap(A[t], A[pi]);
        for (int i = t; i < R; ++i) std::swap(A[i][t], A[i][pj]);

        // one Euclidean step if anything in the pivot row/column is not yet
        // divisible by the pivot, then start over from pivot selection
        bool changed = false;
        for (int i = t + 1; i < R && !changed; ++i)
            if (A[i][t] % A[t][t] != 0) {
                BigInt q = A[i][t] / A[t][t];
                for (int j = t; j < C; ++j) A[i][j] -= q * A[t][j];
                changed = true;
            }
        for (int j = t + 1; j < C && !changed; ++j)
            if (A[t][j] % A[t][t] != 0) {
                BigInt q = A[t][j] / A[t][t];
                for (int i = t; i < R; ++i) A[i][j] -= q * A[i][t];
                changed = true;
            }
        if (changed) continue;
        // pivot divides its row and column: clear both exactly
        for (int i = t + 1; i < R; ++i) {
            if (A[i][t] == 0) continue;
            BigInt q = A[i][t] / A[t][t];
            for (int j = t; j < C; ++j) A[i][j] -= q * A[t][j];
        }
        for (int j = t + 1; j < C; ++j) {
            if (A[t][j] == 0) continue;
            BigInt q = A[t][j] / A[t][t];
            for (int i = t; i < R; ++i) A[i][j] -= q * A[i][t];
        }
        // pivot must divide every entry of the trailing block
        bool fixed = false;
        for (int i = t + 1; i < R && !fixed; ++i)
            for (int j = t + 1; j < C && !fixed; ++j)
                if (A[i][j] % A[t][t] != 0) {
                    for (int l = t; l < C; ++l) A[t][l] += A[i][l];
                    fixed = true;
                }
        if (fixed) continue;
        ++t;
    }
    for (int i = 0; i < t; ++i) {
        BigInt d = A[i][i];
        if (d < 0) d = -d;
        out.divisors.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integral chain complex and its homology

struct ChainComplex {
    std::vector<int> dims;          // dims[k] = rank of C_k, k = 0..K
    std::map<int, IntMat> boundary;  // boundary[k]: dims[k-1] x dims[k]

    int top() const { return static_cast<int>(dims.size()) - 1; }

    // d^2 = 0 in every degree
    bool is_complex() const {
        for (int k = 2; k <= top(); ++k) {
            auto hi = boundary.find(k);
            auto lo = boundary.find(k - 1);
            if (hi == boundary.end() || lo == boundary.end()) continue;
            if (!mat_is_zero(mat_mul(lo->second, hi->second))) return false;
        }
        return true;
    }
};

struct HomologyGroup {
    int betti = 0;
    std::vector<BigInt> torsion;  // invariant factors > 1

    bool operator==(const HomologyGroup& o) const {
        return betti == o.betti && torsion == o.torsion;
    }
};

// H_k = ker d_k / im d_{k+1} via Smith normal form in each degree.
inline std::vector<HomologyGroup> homology(const ChainComplex& cx) {
    int K = cx.top();
    std::vector<int> rank(K + 2, 0);
    std::vector<std::vector<BigInt>> divs(K + 2);
    for (int k = 1; k <= K; ++k) {
        auto it = cx.boundary.find(k);
        if (it == cx.boundary.end()) continue;
        if (mat_rows(it->second) != cx.dims[k - 1] ||
            mat_cols(it->second) != cx.dims[k])
            throw std::invalid_argument("homology: boundary shape mismatch");
        auto s = smith_normal_form(it->second);
        rank[k] = s.rank();
        divs[k] = s.divisors;
    }
    std::vector<HomologyGroup> H(K + 1);
    for (int k = 0; k <= K; ++k) {
        H[k].betti = cx.dims[k] - rank[k] - rank[k + 1];
        if (H[k].betti < 0)
            throw std::runtime_error("homology: negative Betti number");
        for (const auto& d : divs[k + 1])
            if (d > 1) H[k].torsion.push_back(d);
    }
    return H;
}

// Mod-2 Betti numbers (rank over F_2); cheap independent cross-check.
inline std::vector<int> mod2_betti(const ChainComplex& cx) {
    int K = cx.top();
    std::vector<int> rank(K + 2, 0);
    for (int k = 1; k <= K; ++k) {
        auto it = cx.boundary.find(k);
        if (it == cx.boundary.end()) continue;
        // Gaussian elimination over F_2
        std::vector<std::vector<int>> A(mat_rows(it->second));
        for (int i = 0; i < mat_rows(it->second); ++i) {
            A[i].resize(mat_cols(it->second));
            for (int j = 0; j < mat_cols(it->second); ++j)
                A[i][j] = static_cast<int>(it->second[i][j] % 2 != 0);
        }
        int R = static_cast<int>(A.size());
        int C = R ? static_cast<int>(A[0].size()) : 0;
        int r = 0;
        for (int j = 0; j < C && r < R; ++j) {
            int p = -1;
            for (int i = r; i < R; ++i)
                if (A[i][j]) {
                    p = i;
                    break;
                }
            if (p < 0) continue;
            std::swap(A[r], A[p]);
            for (int i = 0; i < R; ++i)
                if (i != r && A[i][j])
                    for (int l = j; l < C; ++l) A[i][l] ^= A[r][l];
            ++r;
        }
        rank[k] = r;
    }
    std::vector<int> b(K + 1);
    for (int k = 0; k <= K; ++k) b[k] = cx.dims[k] - rank[k] - rank[k + 1];
    return b;
}

}  // namespace lmc
