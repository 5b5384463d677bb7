#include "edp/warp.hpp"

#include <cmath>
#include <stdexcept>

namespace edp {

WarpedMap warp_forward(const double* map, int h, int w, const StarPattern& star) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("warp_forward: empty map");
    WarpedMap wm;
    wm.num_lines = star.num_lines;
    wm.points_per_line = star.points_per_line;
    size_t total = static_cast<size_t>(star.num_lines) * star.points_per_line;
    wm.g.resize(total);
    wm.source.resize(total);
    for (size_t i = 0; i < total; ++i) {
        const Point& p = star.coords[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("warp_forward: non-finite star coordinate");
        int px = static_cast<int>(std::lround(p.x));
        int py = static_cast<int>(std::lround(p.y));
        px = std::clamp(px, 0, w - 1);
        py = std::clamp(py, 0, h - 1);
        wm.source[i] = {px, py};
        wm.g[i] = map[static_cast<size_t>(py) * w + px];
    }
    return wm;
}

std::vector<double> warp_backward(const std::vector<double>& grad_g,
                                  const std::vector<std::pair<int, int>>& source, int h, int w) {
    if (grad_g.size() != source.size())
        throw std::invalid_argument("warp_backward: grad/source size mismatch");
    std::vector<double> out(static_cast<size_t>(h) * w, 0.0);
    for (size_t i = 0; i < grad_g.size(); ++i) {
        auto [px, py] = source[i];
        if (px < 0 || px >= w || py < 0 || py >= h)
            throw std::invalid_argument("warp_backward: source outside given shape");
        out[static_cast<size_t>(py) * w + px] += grad_g[i];
    }
    return out;
}

Tensor warp_op(Tape* tape, const Tensor& maps, const std::vector<StarPattern>& stars) {
    if (maps.ndim() != 4 || maps.dim(1) != 1)
        throw std::invalid_argument("warp_op: need [B,1,H,W] maps");
    const int B = maps.dim(0), H = maps.dim(2), W = maps.dim(3);
    if (static_cast<int>(stars.size()) != B)
        throw std::invalid_argument("warp_op: one star per image required");
    const int N = stars[0].num_lines, M = stars[0].points_per_line;

    Tensor g(Shape{B, 1, N, M});
    std::vector<std::vector<std::pair<int, int>>> sources(static_cast<size_t>(B));
    for (int bi = 0; bi < B; ++bi) {
        WarpedMap wm = warp_forward(maps.data() + static_cast<size_t>(bi) * H * W, H, W,
                                    stars[static_cast<size_t>(bi)]);
        std::copy(wm.g.begin(), wm.g.end(), g.data() + static_cast<size_t>(bi) * N * M);
        sources[static_cast<size_t>(bi)] = std::move(wm.source);
    }
    if (tape) {
        Tensor mc = maps, gc = g;
        tape->record([mc, gc, sources = std::move(sources), B, H, W, N, M]() mutable {
            const std::vector<double>& gg = gc.grad();
            std::vector<double>& gm = mc.grad();
            for (int bi = 0; bi < B; ++bi) {
                const auto& src = sources[static_cast<size_t>(bi)];
                double* dst = gm.data() + static_cast<size_t>(bi) * H * W;
                const double* gsl = gg.data() + static_cast<size_t>(bi) * N * M;
                for (size_t i = 0; i < src.size(); ++i)
                    dst[static_cast<size_t>(src[i].second) * W + src[i].first] += gsl[i];
            }
        });
    }
    return g;
}

}  // namespace edp
