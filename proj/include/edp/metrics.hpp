#pragma once

#include <vector>

#include "edp/star.hpp"

namespace edp::metrics {

double dice(const Mask& a, const Mask& b);

struct SurfaceDistances {
    double assd = 0.0;
    double hd = 0.0;
};

// Boundary = foreground pixels 4-adjacent to background (or on the image
// edge); distances are Euclidean in pixel units. Empty masks are an error.
SurfaceDistances surface_distances(const Mask& a, const Mask& b);

// The 4-connected component containing the rounded centroid; if none does,
// the largest component (ties to the smallest raster-order label).
Mask select_component(const Mask& mask, Point centroid);

struct MetricReport {
    std::vector<double> dice;         // per sample
    std::vector<double> assd;         // NaN where the prediction was degenerate
    std::vector<double> hd;
    int failures = 0;                 // degenerate predictions (no surface)

    double dice_mean() const;
    double dice_std() const;
    double assd_mean() const;  // over non-failed samples
    double hd_mean() const;
};

}  // namespace edp::metrics
