#include "edp/star.hpp"

#include <cmath>
#include <stdexcept>

namespace edp {

StarPattern build_star(Point center, double radius, int num_lines, int points_per_line,
                       double rotation) {
    if (num_lines < 3) throw std::invalid_argument("build_star: need at least 3 radial lines");
    if (points_per_line < 2) throw std::invalid_argument("build_star: need at least 2 points per line");
    if (!(radius > 0.0)) throw std::invalid_argument("build_star: radius must be positive");

    StarPattern s;
    s.center = center;
    s.radius = radius;
    s.num_lines = num_lines;
    s.points_per_line = points_per_line;
    s.rotation = rotation;
    s.coords.resize(static_cast<size_t>(num_lines) * points_per_line);
    for (int n = 0; n < num_lines; ++n) {
        double theta = rotation + 2.0 * M_PI * n / num_lines;
        double c = std::cos(theta), sn = std::sin(theta);
        for (int m = 1; m <= points_per_line; ++m) {
            double r = radius * m / points_per_line;
            s.coords[static_cast<size_t>(n) * points_per_line + (m - 1)] =
                Point{center.x + r * c, center.y + r * sn};
        }
    }
    return s;
}

Point jitter_center(Point center, double object_radius, double fraction, Rng& rng) {
    if (!(object_radius > 0.0)) throw std::invalid_argument("jitter_center: object_radius must be positive");
    if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("jitter_center: fraction out of [0,1]");
    if (fraction == 0.0) return center;
    std::normal_distribution<double> nd(0.0, fraction * object_radius);
    for (;;) {
        double dx = nd(rng);
        double dy = nd(rng);
        if (dx * dx + dy * dy < object_radius * object_radius)
            return Point{center.x + dx, center.y + dy};
    }
}

std::vector<Point> indices_to_polygon(const StarPattern& star, const ContourIndices& v) {
    if (v.size() != star.num_lines)
        throw std::invalid_argument("indices_to_polygon: index count != num_lines");
    std::vector<Point> poly;
    poly.reserve(static_cast<size_t>(star.num_lines));
    for (int n = 0; n < star.num_lines; ++n) {
        int m = v.v[static_cast<size_t>(n)];
        if (m < 1 || m > star.points_per_line)
            throw std::invalid_argument("indices_to_polygon: index out of {1..M}");
        poly.push_back(star.at(n, m));
    }
    return poly;
}

namespace {

bool point_on_segment(double px, double py, Point a, Point b, double eps = 1e-9) {
    double abx = b.x - a.x, aby = b.y - a.y;
    double apx = px - a.x, apy = py - a.y;
    double cross = abx * apy - aby * apx;
    double len = std::hypot(abx, aby);
    if (len < eps) return std::hypot(apx, apy) < eps;
    if (std::abs(cross) / len > eps) return false;
    double dot = (apx * abx + apy * aby) / (len * len);
    return dot >= -eps && dot <= 1.0 + eps;
}

bool point_in_polygon(double px, double py, const std::vector<Point>& poly) {
    for (size_t i = 0; i < poly.size(); ++i)
        if (point_on_segment(px, py, poly[i], poly[(i + 1) % poly.size()])) return true;
    // even-odd crossing count, half-open in y to avoid double-counting vertices
    bool in = false;
    for (size_t i = 0; i < poly.size(); ++i) {
        Point a = poly[i], b = poly[(i + 1) % poly.size()];
        if ((a.y > py) != (b.y > py)) {
            double xint = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (px < xint) in = !in;
        }
    }
    return in;
}

}  // namespace

Mask polygon_to_mask(const std::vector<Point>& polygon, int h, int w) {
    if (polygon.size() < 3) throw std::invalid_argument("polygon_to_mask: need at least 3 vertices");
    double area2 = 0.0;
    for (size_t i = 0; i < polygon.size(); ++i) {
        Point a = polygon[i], b = polygon[(i + 1) % polygon.size()];
        area2 += a.x * b.y - b.x * a.y;
    }
    if (std::abs(area2) < 1e-12) throw std::invalid_argument("polygon_to_mask: degenerate polygon");

    double minx = polygon[0].x, maxx = polygon[0].x, miny = polygon[0].y, maxy = polygon[0].y;
    for (const Point& p : polygon) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    int x0 = std::max(0, static_cast<int>(std::floor(minx)));
    int x1 = std::min(w - 1, static_cast<int>(std::ceil(maxx)));
    int y0 = std::max(0, static_cast<int>(std::floor(miny)));
    int y1 = std::min(h - 1, static_cast<int>(std::ceil(maxy)));

    Mask mask(h, w);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (point_in_polygon(x, y, polygon)) mask.at(x, y) = 1;
    return mask;
}

ContourIndices mask_to_indices(const StarPattern& star, const Mask& mask) {
    int cx = static_cast<int>(std::lround(star.center.x));
    int cy = static_cast<int>(std::lround(star.center.y));
    if (!mask.inside(cx, cy) || !mask.at(cx, cy))
        throw DataError("mask_to_indices: star center is not on foreground");

    ContourIndices out;
    out.v.resize(static_cast<size_t>(star.num_lines), 1);
    for (int n = 0; n < star.num_lines; ++n) {
        int last = 0;
        for (int m = 1; m <= star.points_per_line; ++m) {
            const Point& p = star.at(n, m);
            int px = static_cast<int>(std::lround(p.x));
            int py = static_cast<int>(std::lround(p.y));
            if (mask.inside(px, py) && mask.at(px, py))
                last = m;
            else
                break;  // contiguity from the center
        }
        out.v[static_cast<size_t>(n)] = std::max(last, 1);
    }
    return out;
}

Point mask_centroid(const Mask& mask) {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x)
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw DataError("mask_centroid: empty mask");
    return Point{sx / n, sy / n};
}

}  // namespace edp
