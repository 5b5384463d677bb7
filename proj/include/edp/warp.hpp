#pragma once

#include "edp/star.hpp"
#include "edp/tensor.hpp"

namespace edp {

// Network output resampled onto the star pattern, nearest pixel per point.
// source keeps the chosen (clamped) pixel for the scatter-add adjoint.
struct WarpedMap {
    int num_lines = 0, points_per_line = 0;
    std::vector<double> g;                       // N*M, line-major
    std::vector<std::pair<int, int>> source;     // (x, y) per star point

    double at(int n, int m) const {  // m 1-based
        return g[static_cast<size_t>(n) * points_per_line + (m - 1)];
    }
};

// map is H x W row-major, map(x, y) = map[y*w + x].
WarpedMap warp_forward(const double* map, int h, int w, const StarPattern& star);

// Scatter-add of grad_g back to map pixels; exact adjoint of warp_forward.
std::vector<double> warp_backward(const std::vector<double>& grad_g,
                                  const std::vector<std::pair<int, int>>& source, int h, int w);

// Differentiable wrapper: slices image bi of maps [B,1,H,W] through its star,
// output [B,1,N,M]. Gradients scatter-add into the map.
Tensor warp_op(Tape* tape, const Tensor& maps, const std::vector<StarPattern>& stars);

}  // namespace edp
