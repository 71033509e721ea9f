#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "lorentzmorse/snf.hpp"

using namespace lmc;

namespace {

// Brute-force oracle: the k-th determinantal divisor g_k is the gcd of all
// k x k minors; the elementary divisors are d_k = g_k / g_{k-1}.
BigInt minor_gcd(const IntMat& A, int k) {
    int R = mat_rows(A), C = mat_cols(A);
    std::vector<int> ri(k), ci(k);
    BigInt g = 0;
    std::function<void(int, int)> pick_rows = [&](int start, int depth) {
        if (depth == k) {
            std::function<void(int, int)> pick_cols = [&](int s, int d) {
                if (d == k) {
                    // Laplace expansion determinant of the k x k submatrix
                    std::function<BigInt(std::vector<int>, std::vector<int>)>
                        det = [&](std::vector<int> rs, std::vector<int> cs)
                        -> BigInt {
                        if (rs.size() == 1) return A[rs[0]][cs[0]];
                        BigInt acc = 0;
                        for (size_t j = 0; j < cs.size(); ++j) {
                            std::vector<int> rs2(rs.begin() + 1, rs.end());
                            std::vector<int> cs2;
                            for (size_t l = 0; l < cs.size(); ++l)
                                if (l != j) cs2.push_back(cs[l]);
                            BigInt sub = det(rs2, cs2);
                            BigInt term = A[rs[0]][cs[j]] * sub;
                            acc += (j % 2 == 0) ? term : -term;
                        }
                        return acc;
                    };
                    BigInt m = det(ri, ci);
                    g = boost::multiprecision::gcd(g, m);
                    return;
                }
                for (int j = s; j < C; ++j) {
                    ci[d] = j;
                    pick_cols(j + 1, d + 1);
                }
            };
            pick_cols(0, 0);
            return;
        }
        for (int i = start; i < R; ++i) {
            ri[depth] = i;
            pick_rows(i + 1, depth + 1);
        }
    };
    pick_rows(0, 0);
    return boost::multiprecision::abs(g);
}

std::vector<BigInt> oracle_divisors(const IntMat& A) {
    std::vector<BigInt> out;
    BigInt prev = 1;
    int kmax = std::min(mat_rows(A), mat_cols(A));
    for (int k = 1; k <= kmax; ++k) {
        BigInt g = minor_gcd(A, k);
        if (g == 0) break;
        out.push_back(g / prev);
        prev = g;
    }
    return out;
}

}  // namespace

TEST_CASE("Smith form of random integer matrices matches the minor oracle") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> dim(1, 5), entry(-4, 4);
    for (int trial = 0; trial < 100; ++trial) {
        int R = dim(rng), C = dim(rng);
        IntMat A = int_matrix(R, C);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) A[i][j] = entry(rng);
        auto s = smith_normal_form(A);
        auto want = oracle_divisors(A);
        REQUIRE(s.divisors.size() == want.size());
        for (size_t i = 0; i < want.size(); ++i)
            CHECK(s.divisors[i] == want[i]);
        for (size_t i = 1; i < s.divisors.size(); ++i)
            CHECK(s.divisors[i] % s.divisors[i - 1] == 0);
    }
}

TEST_CASE("Smith form handles degenerate shapes") {
    CHECK(smith_normal_form(int_matrix(3, 4)).rank() == 0);
    IntMat A = int_matrix(1, 1);
    A[0][0] = -6;
    auto s = smith_normal_form(A);
    REQUIRE(s.rank() == 1);
    CHECK(s.divisors[0] == 6);
    IntMat B = int_matrix(2, 2);
    B[0][0] = 2;
    B[0][1] = 4;
    B[1][0] = 4;
    B[1][1] = 8;
    CHECK(smith_normal_form(B).rank() == 1);
}

TEST_CASE("homology of classical small complexes") {
    // torus: one 0-cell, two 1-cells, one 2-cell, zero boundaries
    ChainComplex torus;
    torus.dims = {1, 2, 1};
    torus.boundary[1] = int_matrix(1, 2);
    torus.boundary[2] = int_matrix(2, 1);
    REQUIRE(torus.is_complex());
    auto H = homology(torus);
    CHECK(H[0].betti == 1);
    CHECK(H[1].betti == 2);
    CHECK(H[2].betti == 1);
    for (auto& h : H) CHECK(h.torsion.empty());

    // Klein bottle: d2 = (0, 2)^t
    ChainComplex klein = torus;
    klein.boundary[2][1][0] = 2;
    REQUIRE(klein.is_complex());
    H = homology(klein);
    CHECK(H[0].betti == 1);
    CHECK(H[1].betti == 1);
    REQUIRE(H[1].torsion.size() == 1);
    CHECK(H[1].torsion[0] == 2);
    CHECK(H[2].betti == 0);
    auto b2 = mod2_betti(klein);
    CHECK(b2 == std::vector<int>{1, 2, 1});

    // projective plane
    ChainComplex rp2;
    rp2.dims = {1, 1, 1};
    rp2.boundary[1] = int_matrix(1, 1);
    rp2.boundary[2] = int_matrix(1, 1);
    rp2.boundary[2][0][0] = 2;
    H = homology(rp2);
    CHECK(H[0].betti == 1);
    CHECK(H[1].betti == 0);
    REQUIRE(H[1].torsion.size() == 1);
    CHECK(H[1].torsion[0] == 2);
    CHECK(H[2].betti == 0);
}

TEST_CASE("broken boundary squares are detected") {
    ChainComplex bad;
    bad.dims = {1, 1, 1};
    bad.boundary[1] = int_matrix(1, 1);
    bad.boundary[1][0][0] = 1;
    bad.boundary[2] = int_matrix(1, 1);
    bad.boundary[2][0][0] = 1;
    CHECK(!bad.is_complex());
    ChainComplex shape;
    shape.dims = {2, 3};
    shape.boundary[1] = int_matrix(1, 3);
    CHECK_THROWS_AS(homology(shape), std::invalid_argument);
}

TEST_CASE("homology of a chain with large entries stays exact") {
    // overflow-prone boundary: entries around 2^40, exactness must survive
    ChainComplex cx;
    cx.dims = {1, 2, 1};
    cx.boundary[1] = int_matrix(1, 2);
    cx.boundary[2] = int_matrix(2, 1);
    BigInt big = BigInt(1) << 40;
    cx.boundary[2][0][0] = big;
    cx.boundary[2][1][0] = big + 2;
    auto H = homology(cx);
    CHECK(H[1].betti == 1);
    REQUIRE(H[1].torsion.size() == 1);
    CHECK(H[1].torsion[0] == boost::multiprecision::gcd(big, big + 2));
}
