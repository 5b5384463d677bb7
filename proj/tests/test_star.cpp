#include <doctest.h>

#include <cmath>
#include <numeric>

#include "edp/star.hpp"

using namespace edp;

TEST_CASE("build_star basic geometry") {
    // unit circle, one point per line
    StarPattern s = build_star(Point{0, 0}, 1.0, 4, 2, 0.0);
    CHECK(s.at(0, 2).x == doctest::Approx(1.0));
    CHECK(s.at(0, 2).y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.at(1, 2).x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.at(1, 2).y == doctest::Approx(1.0));
    CHECK(s.at(2, 2).x == doctest::Approx(-1.0));
    CHECK(s.at(3, 2).y == doctest::Approx(-1.0));
}

TEST_CASE("build_star full-scale default geometry") {
    StarPattern s = build_star(Point{100, 100}, 65.0, 50, 65, 0.0);
    CHECK(s.at(0, 65).x == doctest::Approx(165.0));
    CHECK(s.at(0, 65).y == doctest::Approx(100.0));
    // no sampled point coincides with the center
    for (const Point& p : s.coords)
        CHECK(std::hypot(p.x - 100, p.y - 100) > 0.5);
}

TEST_CASE("build_star formula check with rotation") {
    StarPattern s = build_star(Point{10, 10}, 2.0, 4, 2, M_PI / 2);
    CHECK(s.at(0, 2).x == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(s.at(0, 2).y == doctest::Approx(12.0));
    // coords[n][m] = center + (m/M) R (cos, sin)
    for (int n = 0; n < 4; ++n)
        for (int m = 1; m <= 2; ++m) {
            double th = M_PI / 2 + 2 * M_PI * n / 4;
            CHECK(s.at(n, m).x == doctest::Approx(10 + m / 2.0 * 2 * std::cos(th)).epsilon(1e-12));
            CHECK(s.at(n, m).y == doctest::Approx(10 + m / 2.0 * 2 * std::sin(th)).epsilon(1e-12));
        }
}

TEST_CASE("build_star rejects bad arguments") {
    CHECK_THROWS(build_star(Point{0, 0}, 1.0, 2, 5));
    CHECK_THROWS(build_star(Point{0, 0}, 1.0, 5, 1));
    CHECK_THROWS(build_star(Point{0, 0}, 0.0, 5, 5));
    CHECK_THROWS(build_star(Point{0, 0}, -1.0, 5, 5));
}

TEST_CASE("build_star rotation equivariance") {
    StarPattern a = build_star(Point{3, 4}, 10.0, 6, 5, 0.3);
    StarPattern b = build_star(Point{3, 4}, 10.0, 6, 5, 0.3 + 2 * M_PI / 6);
    for (int n = 0; n < 6; ++n)
        for (int m = 1; m <= 5; ++m) {
            CHECK(b.at(n, m).x == doctest::Approx(a.at((n + 1) % 6, m).x).epsilon(1e-9));
            CHECK(b.at(n, m).y == doctest::Approx(a.at((n + 1) % 6, m).y).epsilon(1e-9));
        }
}

TEST_CASE("jitter_center zero fraction is the identity") {
    Rng rng = make_rng(7);
    Point c = jitter_center(Point{3.5, -2.0}, 10.0, 0.0, rng);
    CHECK(c.x == 3.5);
    CHECK(c.y == -2.0);
}

TEST_CASE("jitter_center truncation bound") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 2000; ++i) {
        Point c = jitter_center(Point{0, 0}, 10.0, 0.5, rng);
        CHECK(std::hypot(c.x, c.y) < 10.0);
    }
}

TEST_CASE("jitter_center empirical std matches truncated-normal quadrature") {
    // Oracle: per-coordinate variance of an isotropic N(0, sigma^2) truncated
    // to r < R is E[r^2]/2 with E[r^2] from the truncated Rayleigh density,
    // computed here by 1-D numerical integration.
    const double sigma = 2.0, R = 10.0;
    auto density = [&](double r) { return r / (sigma * sigma) * std::exp(-r * r / (2 * sigma * sigma)); };
    const int K = 200000;
    double z = 0.0, m2 = 0.0;
    for (int i = 0; i < K; ++i) {
        double r = (i + 0.5) * R / K;
        z += density(r);
        m2 += r * r * density(r);
    }
    double expected_std = std::sqrt(m2 / z / 2.0);

    Rng rng = make_rng(123);
    const int n = 100000;
    double sx = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
        Point c = jitter_center(Point{0, 0}, R, 0.2, rng);  // 0.2 * 10 = sigma 2
        sx += c.x;
        sxx += c.x * c.x;
    }
    double emp_std = std::sqrt(sxx / n - (sx / n) * (sx / n));
    CHECK(emp_std == doctest::Approx(expected_std).epsilon(0.05));
}

TEST_CASE("indices_to_polygon outer ring and diamond") {
    StarPattern s = build_star(Point{0, 0}, 1.0, 4, 2, 0.0);
    ContourIndices outer{{2, 2, 2, 2}};
    auto poly = indices_to_polygon(s, outer);
    CHECK(poly[0].x == doctest::Approx(1.0));
    CHECK(poly[2].x == doctest::Approx(-1.0));

    ContourIndices inner{{1, 1, 1, 1}};
    auto diamond = indices_to_polygon(s, inner);
    CHECK(diamond[0].x == doctest::Approx(0.5));
    CHECK(diamond[1].y == doctest::Approx(0.5));

    ContourIndices bad{{1, 1, 3, 1}};
    CHECK_THROWS(indices_to_polygon(s, bad));
}

TEST_CASE("indices_to_polygon matches direct coords lookup") {
    StarPattern s = build_star(Point{5, 7}, 9.0, 6, 8, 0.4);
    Rng rng = make_rng(17);
    std::uniform_int_distribution<int> d(1, 8);
    ContourIndices v;
    for (int n = 0; n < 6; ++n) v.v.push_back(d(rng));
    auto poly = indices_to_polygon(s, v);
    for (int n = 0; n < 6; ++n) {
        CHECK(poly[static_cast<size_t>(n)].x == s.at(n, v.v[static_cast<size_t>(n)]).x);
        CHECK(poly[static_cast<size_t>(n)].y == s.at(n, v.v[static_cast<size_t>(n)]).y);
    }
}

TEST_CASE("polygon_to_mask boundary-inclusive square") {
    std::vector<Point> sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    Mask m = polygon_to_mask(sq, 8, 8);
    CHECK(m.count() == 25);  // pixels 0..4 in both axes, boundary counts
    // brute-force cross-check: every set pixel is within the bounding box
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(static_cast<bool>(m.at(x, y)) == (x <= 4 && y <= 4));
}

TEST_CASE("polygon_to_mask rejects degenerate polygons") {
    CHECK_THROWS(polygon_to_mask({{0, 0}, {1, 1}}, 4, 4));
    CHECK_THROWS(polygon_to_mask({{0, 0}, {2, 2}, {4, 4}}, 8, 8));  // zero area
}

TEST_CASE("polygon_to_mask small diamond center pixel") {
    std::vector<Point> diamond{{1.5, 1}, {1, 1.5}, {0.5, 1}, {1, 0.5}};
    Mask m = polygon_to_mask(diamond, 3, 3);
    CHECK(m.at(1, 1) == 1);
    CHECK(m.count() == 1);
}

TEST_CASE("mask_to_indices full foreground and disk") {
    StarPattern s = build_star(Point{16, 16}, 10.0, 8, 10, 0.0);
    Mask full(32, 32);
    std::fill(full.v.begin(), full.v.end(), 1);
    ContourIndices v = mask_to_indices(s, full);
    for (int x : v.v) CHECK(x == 10);

    // disk of radius 0.5 R: per-ray scan should land near M/2
    Mask disk(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if (std::hypot(x - 16, y - 16) <= 5.0) disk.at(x, y) = 1;
    ContourIndices vd = mask_to_indices(s, disk);
    for (int x : vd.v) {
        CHECK(x >= 4);
        CHECK(x <= 6);
    }
}

TEST_CASE("mask_to_indices center on background is an error") {
    StarPattern s = build_star(Point{2, 2}, 4.0, 4, 4, 0.0);
    Mask m(8, 8);  // all background
    CHECK_THROWS_AS(mask_to_indices(s, m), DataError);
}

TEST_CASE("round trip indices -> polygon -> mask -> indices within 1") {
    const int N = 12, M = 14, R = 14;
    StarPattern s = build_star(Point{20, 20}, R, N, M, 0.0);
    Rng rng = make_rng(29);
    std::uniform_int_distribution<int> d(4, M - 1);
    for (int trial = 0; trial < 20; ++trial) {
        // smooth-ish valid contour: bounded steps, min spacing 3 from center
        ContourIndices v;
        int cur = d(rng);
        for (int n = 0; n < N; ++n) {
            v.v.push_back(cur);
            cur = std::clamp(cur + static_cast<int>(rng() % 3) - 1, 4, M - 1);
        }
        // keep the wrap join smooth as well
        v.v.back() = std::clamp(v.v.back(), v.v.front() - 1, v.v.front() + 1);
        Mask m = polygon_to_mask(indices_to_polygon(s, v), 40, 40);
        ContourIndices back = mask_to_indices(s, m);
        for (int n = 0; n < N; ++n)
            CHECK(std::abs(back.v[static_cast<size_t>(n)] - v.v[static_cast<size_t>(n)]) <= 1);
    }
}
