#pragma once

#include <vector>

#include "edp/common.hpp"

namespace edp {

// Binary mask, row-major, mask(x, y) with pixel centers at integer coordinates.
struct Mask {
    int h = 0, w = 0;
    std::vector<std::uint8_t> v;

    Mask() = default;
    Mask(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0) {}
    std::uint8_t& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
    std::uint8_t at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
    bool inside(int x, int y) const { return x >= 0 && x < w && y >= 0 && y < h; }
    std::int64_t count() const {
        std::int64_t c = 0;
        for (auto b : v) c += b ? 1 : 0;
        return c;
    }
};

// N radial lines with M graduated points anchored at a center; the search
// domain of the contour solver. coords[n][m-1] sits at radius m*R/M on line n.
struct StarPattern {
    Point center;
    double radius = 0.0;
    int num_lines = 0;       // N
    int points_per_line = 0; // M
    double rotation = 0.0;
    std::vector<Point> coords;  // N*M, line-major

    const Point& at(int n, int m) const {  // m is 1-based
        return coords[static_cast<size_t>(n) * points_per_line + (m - 1)];
    }
};

// One chosen point index per radial line, each in {1..M}.
struct ContourIndices {
    std::vector<int> v;
    int size() const { return static_cast<int>(v.size()); }
};

StarPattern build_star(Point center, double radius, int num_lines, int points_per_line,
                       double rotation = 0.0);

// center + d, d ~ isotropic N(0, (fraction*object_radius)^2) rejected to
// ||d|| < object_radius. fraction == 0 returns the center untouched.
Point jitter_center(Point center, double object_radius, double fraction, Rng& rng);

std::vector<Point> indices_to_polygon(const StarPattern& star, const ContourIndices& v);

// Even-odd rasterization, pixel centers at integers, boundary-inclusive.
Mask polygon_to_mask(const std::vector<Point>& polygon, int h, int w);

// Outermost contiguous foreground sample per ray (nearest-pixel rounding);
// lines that start on background get index 1. Center must be on foreground.
ContourIndices mask_to_indices(const StarPattern& star, const Mask& mask);

Point mask_centroid(const Mask& mask);

}  // namespace edp
