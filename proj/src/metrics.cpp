#include "edp/metrics.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace edp::metrics {

double dice(const Mask& a, const Mask& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("dice: shape mismatch");
    std::int64_t na = 0, nb = 0, inter = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        na += a.v[i] ? 1 : 0;
        nb += b.v[i] ? 1 : 0;
        inter += (a.v[i] && b.v[i]) ? 1 : 0;
    }
    if (na + nb == 0) return 1.0;  // degenerate agreement
    return 2.0 * inter / static_cast<double>(na + nb);
}

namespace {

std::vector<std::pair<int, int>> boundary_pixels(const Mask& m) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x) {
            if (!m.at(x, y)) continue;
            bool edge = x == 0 || x == m.w - 1 || y == 0 || y == m.h - 1 || !m.at(x - 1, y) ||
                        !m.at(x + 1, y) || !m.at(x, y - 1) || !m.at(x, y + 1);
            if (edge) out.emplace_back(x, y);
        }
    return out;
}

double nearest_dist(std::pair<int, int> p, const std::vector<std::pair<int, int>>& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : s) {
        double dx = p.first - q.first, dy = p.second - q.second;
        best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
}

}  // namespace

SurfaceDistances surface_distances(const Mask& a, const Mask& b) {
    if (a.h != b.h || a.w != b.w) throw std::invalid_argument("surface_distances: shape mismatch");
    auto ba = boundary_pixels(a);
    auto bb = boundary_pixels(b);
    if (ba.empty() || bb.empty()) throw DataError("surface_distances: empty mask");

    double sum = 0.0, mx = 0.0;
    for (const auto& p : ba) {
        double d = nearest_dist(p, bb);
        sum += d;
        mx = std::max(mx, d);
    }
    for (const auto& q : bb) {
        double d = nearest_dist(q, ba);
        sum += d;
        mx = std::max(mx, d);
    }
    return {sum / static_cast<double>(ba.size() + bb.size()), mx};
}

Mask select_component(const Mask& mask, Point centroid) {
    if (mask.count() == 0) return mask;
    std::vector<int> label(mask.v.size(), -1);
    std::vector<std::int64_t> sizes;
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x) {
            size_t i0 = static_cast<size_t>(y) * mask.w + x;
            if (!mask.v[i0] || label[i0] >= 0) continue;
            int lab = static_cast<int>(sizes.size());
            sizes.push_back(0);
            std::deque<std::pair<int, int>> q{{x, y}};
            label[i0] = lab;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop_front();
                ++sizes[static_cast<size_t>(lab)];
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int nx = cx + dx[d], ny = cy + dy[d];
                    if (!mask.inside(nx, ny)) continue;
                    size_t ni = static_cast<size_t>(ny) * mask.w + nx;
                    if (mask.v[ni] && label[ni] < 0) {
                        label[ni] = lab;
                        q.emplace_back(nx, ny);
                    }
                }
            }
        }

    int chosen = -1;
    int cx = static_cast<int>(std::lround(centroid.x));
    int cy = static_cast<int>(std::lround(centroid.y));
    if (mask.inside(cx, cy)) {
        size_t ci = static_cast<size_t>(cy) * mask.w + cx;
        if (mask.v[ci]) chosen = label[ci];
    }
    if (chosen < 0) {  // largest, ties to the smallest label (raster-first)
        std::int64_t best = -1;
        for (size_t l = 0; l < sizes.size(); ++l)
            if (sizes[l] > best) {
                best = sizes[l];
                chosen = static_cast<int>(l);
            }
    }

    Mask out(mask.h, mask.w);
    for (size_t i = 0; i < mask.v.size(); ++i) out.v[i] = label[i] == chosen ? 1 : 0;
    return out;
}

namespace {
double vec_mean(const std::vector<double>& v, bool skip_nan) {
    double s = 0.0;
    std::int64_t n = 0;
    for (double x : v) {
        if (skip_nan && std::isnan(x)) continue;
        s += x;
        ++n;
    }
    return n ? s / n : 0.0;
}
}  // namespace

double MetricReport::dice_mean() const { return vec_mean(dice, false); }
double MetricReport::dice_std() const {
    if (dice.size() < 2) return 0.0;
    double m = dice_mean(), acc = 0.0;
    for (double d : dice) acc += (d - m) * (d - m);
    return std::sqrt(acc / static_cast<double>(dice.size()));
}
double MetricReport::assd_mean() const { return vec_mean(assd, true); }
double MetricReport::hd_mean() const { return vec_mean(hd, true); }

}  // namespace edp::metrics
