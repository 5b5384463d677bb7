#include <doctest.h>

#include <cmath>

#include "edp/dp.hpp"

using namespace edp;
using namespace edp::dp;

namespace {
std::vector<double> random_g(int n, int m, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> g(static_cast<size_t>(n) * m);
    for (double& v : g) v = u(rng);
    return g;
}
}  // namespace

TEST_CASE("build_energy zero map") {
    std::vector<double> g(3 * 4, 0.0);
    EnergyTable t = build_energy(g, 3, 4, 1);
    for (int n = 0; n < 3; ++n)
        for (int i = 1; i <= 4; ++i)
            for (int j = 1; j <= 4; ++j) {
                if (std::abs(i - j) <= 1)
                    CHECK(t.at(n, i, j) == 0.0);
                else
                    CHECK(t.at(n, i, j) == kInf);
            }
}

TEST_CASE("build_energy linear ramp uses the inner boundary convention") {
    // g(n,m) = m: every derivative is 1 except at m=1 where g(n,0):=g(n,1)
    const int N = 4, M = 5;
    std::vector<double> g(N * M);
    for (int n = 0; n < N; ++n)
        for (int m = 1; m <= M; ++m) g[static_cast<size_t>(n) * M + m - 1] = m;
    EnergyTable t = build_energy(g, N, M, 2);
    for (int n = 0; n < N; ++n)
        for (int i = 1; i <= M; ++i)
            for (int j = std::max(1, i - 2); j <= std::min(M, i + 2); ++j) {
                double expect = (i == 1 ? 0.0 : 1.0) + (j == 1 ? 0.0 : 1.0);
                CHECK(t.at(n, i, j) == expect);
            }
}

TEST_CASE("build_energy direct formula spot check") {
    // per line: g = [0,1,0], [0,2,0], [0,3,0]
    std::vector<double> g{0, 1, 0, 0, 2, 0, 0, 3, 0};
    EnergyTable t = build_energy(g, 3, 3, 1);
    // E[1][2][2] couples line 1 (0-based) with line 2: (2-0)+(3-0) = 5
    CHECK(t.at(1, 2, 2) == 5.0);
    // E[0][2][2]: (1-0)+(2-0) = 3
    CHECK(t.at(0, 2, 2) == 3.0);
}

TEST_CASE("build_energy rejects bad delta") {
    std::vector<double> g(3 * 4, 0.0);
    CHECK_THROWS(build_energy(g, 3, 4, 4));
    CHECK_THROWS(build_energy(g, 3, 4, 0));
}

TEST_CASE("dp_solve zero map picks the all-ones contour") {
    std::vector<double> g(5 * 6, 0.0);
    DpResult r = dp_solve(g, 5, 6, 1);
    CHECK(r.cost == 0.0);
    for (int v : r.indices.v) CHECK(v == 1);
}

TEST_CASE("dp_solve sharp ring is found exactly") {
    const int N = 4, M = 6, m0 = 4;
    std::vector<double> g(N * M, 0.0);
    for (int n = 0; n < N; ++n)
        for (int m = m0; m <= M; ++m) g[static_cast<size_t>(n) * M + m - 1] = 1.0;
    // bright outside / dark inside: as-printed minimization wants the
    // negative-derivative ring, so flip with Negated to select m0
    DpResult r = dp_solve(g, N, M, 1, EdgePolarity::Negated);
    for (int v : r.indices.v) CHECK(v == m0);
    DpResult bf = brute_force_solve(g, N, M, 1, EdgePolarity::Negated);
    CHECK(r.cost == bf.cost);
    CHECK(r.indices.v == bf.indices.v);
}

TEST_CASE("dp_solve equals brute force on random instances") {
    Rng rng = make_rng(7);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + static_cast<int>(rng() % 4);   // 3..6
        int m = 2 + static_cast<int>(rng() % 7);   // 2..8
        int delta = 1 + static_cast<int>(rng() % 2);
        if (delta >= m) delta = m - 1;
        std::vector<double> g = random_g(n, m, rng);
        DpResult a = dp_solve(g, n, m, delta);
        DpResult b = brute_force_solve(g, n, m, delta);
        CHECK(a.cost == b.cost);  // identical float sum order => exact
        CHECK(a.indices.v == b.indices.v);
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("dp_solve output is always delta-feasible") {
    Rng rng = make_rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + static_cast<int>(rng() % 6);
        int m = 4 + static_cast<int>(rng() % 10);
        int delta = 1 + static_cast<int>(rng() % 3);
        std::vector<double> g = random_g(n, m, rng);
        DpResult r = dp_solve(g, n, m, delta);
        for (int i = 0; i < n; ++i) {
            int d = std::abs(r.indices.v[static_cast<size_t>(i)] -
                             r.indices.v[static_cast<size_t>((i + 1) % n)]);
            CHECK(d <= delta);
        }
    }
}

TEST_CASE("dp_solve shift invariance") {
    Rng rng = make_rng(17);
    std::vector<double> g = random_g(5, 7, rng);
    std::vector<double> shifted = g;
    for (double& v : shifted) v += 10.0;
    DpResult a = dp_solve(g, 5, 7, 2);
    DpResult b = dp_solve(shifted, 5, 7, 2);
    CHECK(a.indices.v == b.indices.v);
    CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-9));
}

TEST_CASE("brute force small cases") {
    std::vector<double> g(3 * 2, 0.0);
    DpResult r = brute_force_solve(g, 3, 2, 1);
    CHECK(r.cost == 0.0);
    CHECK(r.indices.v == std::vector<int>{1, 1, 1});

    // feasibility: |v1 - v2| > delta never appears
    Rng rng = make_rng(19);
    std::vector<double> g2 = random_g(3, 9, rng);
    DpResult r2 = brute_force_solve(g2, 3, 9, 1);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(r2.indices.v[static_cast<size_t>(i)] -
                       r2.indices.v[static_cast<size_t>((i + 1) % 3)]) <= 1);

    std::vector<double> big(static_cast<size_t>(10) * 20, 0.0);
    CHECK_THROWS(brute_force_solve(big, 10, 20, 1));  // 20^10 > 1e7
}

TEST_CASE("contour_cost agrees with dp and flags infeasible contours") {
    Rng rng = make_rng(23);
    std::vector<double> g = random_g(4, 6, rng);
    DpResult r = dp_solve(g, 4, 6, 2);
    CHECK(contour_cost(g, r.indices, 4, 6, 2) == r.cost);

    ContourIndices zero{{1, 1, 1, 1}};
    std::vector<double> flat(4 * 6, 0.0);
    CHECK(contour_cost(flat, zero, 4, 6, 1) == 0.0);

    ContourIndices gap{{1, 6, 1, 1}};
    CHECK(std::isinf(contour_cost(g, gap, 4, 6, 2)));
}

TEST_CASE("polarity negation flips the selected ring contrast") {
    const int N = 4, M = 6, m0 = 4;
    std::vector<double> g(N * M, 0.0);
    for (int n = 0; n < N; ++n)
        for (int m = m0; m <= M; ++m) g[static_cast<size_t>(n) * M + m - 1] = -1.0;
    // bright inside (0) -> dark outside (-1): as-printed picks the drop at m0
    DpResult r = dp_solve(g, N, M, 1, EdgePolarity::AsPrinted);
    for (int v : r.indices.v) CHECK(v == m0);
}

TEST_CASE("monotone relabeling preserves a unique argmin") {
    Rng rng = make_rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> g = random_g(4, 5, rng);
        DpResult base = dp_solve(g, 4, 5, 2);
        // affine per-line relabeling with positive slope keeps derivative order
        std::vector<double> re = g;
        for (int n = 0; n < 4; ++n)
            for (int m = 0; m < 5; ++m) re[static_cast<size_t>(n) * 5 + m] = 2.0 * re[static_cast<size_t>(n) * 5 + m] + 0.3;
        DpResult scaled = dp_solve(re, 4, 5, 2);
        CHECK(base.indices.v == scaled.indices.v);
    }
}

TEST_CASE("smooth_indices examples") {
    ContourIndices c{{3, 3, 3, 3, 3}};
    CHECK(smooth_indices(c, 3, 10).v == c.v);
    CHECK(smooth_indices(c, 1, 10).v == c.v);

    ContourIndices spike{{1, 1, 6, 1, 1, 1}};
    ContourIndices sm = smooth_indices(spike, 5, 10);
    CHECK(sm.v == std::vector<int>{2, 2, 2, 2, 2, 1});

    CHECK_THROWS(smooth_indices(spike, 4, 10));
    CHECK_THROWS(smooth_indices(spike, 0, 10));
}

TEST_CASE("smooth_indices clamps to the valid range") {
    ContourIndices low{{1, 1, 1, 1, 1, 1}};
    CHECK(smooth_indices(low, 5, 4).v == low.v);
    ContourIndices high{{4, 4, 4, 4, 4, 4}};
    CHECK(smooth_indices(high, 5, 4).v == high.v);
}
