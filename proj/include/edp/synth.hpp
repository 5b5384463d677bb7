#pragma once

#include <string>
#include <vector>

#include "edp/star.hpp"

namespace edp {

// One dataset unit: image in [0,1], star-convex binary mask, mask centroid
// as the working object center, and the shortest centroid-to-boundary
// distance as the object radius.
struct Sample {
    int h = 0, w = 0;
    std::vector<double> image;
    Mask mask;
    Point center;
    double object_radius = 0.0;
    std::string name;
};

struct SynthConfig {
    double noise = 0.05;        // additive Gaussian pixel noise std
    double contrast_lo = 0.2;   // foreground-background contrast range
    double contrast_hi = 0.5;
    double bg_lo = 0.15;
    double bg_hi = 0.4;
    // regeneration check: ground-truth indices must be delta-feasible here
    int check_lines = 48;
    int check_points = 32;
    int check_delta = 2;
};

// Deterministic per (seed, index); draws a smooth radial blob
// r(theta) = r0 (1 + sum_k a_k cos(k theta + phi_k)), k = 1..4, rasterizes
// it, and regenerates until the mask passes the star-convexity ray test and
// the feasibility check.
Sample gen_sample(std::uint64_t seed, std::uint64_t index, int h, int w, const SynthConfig& cfg);

// Every ray from the center must cross the boundary exactly once.
bool is_star_convex(const Mask& mask, Point center, int n_rays = 360);

struct Manifest {
    std::uint64_t seed = 0;
    int h = 0, w = 0;
    std::vector<std::string> train_names;
    std::vector<std::string> val_names;
};

// Writes <name>.pgm / <name>_mask.pgm pairs plus manifest.json. Train order
// is fixed by the seed so prefix slices give telescopic subsets.
Manifest gen_dataset(std::uint64_t seed, int n_train, int n_val, int h, int w,
                     const SynthConfig& cfg, const std::string& out_dir);

Manifest load_manifest(const std::string& dir);
std::vector<Sample> load_split(const std::string& dir, const Manifest& mf, bool train);

}  // namespace edp
