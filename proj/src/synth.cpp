#include "edp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "edp/pgm.hpp"

namespace edp {

namespace {

// Distance from p along direction (c,s) to the pixel rectangle boundary.
double border_distance(Point p, double c, double s, int h, int w) {
    double best = std::numeric_limits<double>::infinity();
    if (c > 1e-12) best = std::min(best, ((w - 1) - p.x) / c);
    if (c < -1e-12) best = std::min(best, (0 - p.x) / c);
    if (s > 1e-12) best = std::min(best, ((h - 1) - p.y) / s);
    if (s < -1e-12) best = std::min(best, (0 - p.y) / s);
    return best;
}

struct Blob {
    Point center;
    double r0;
    double a[4], phi[4];

    double radius(double theta) const {
        double r = 1.0;
        for (int k = 0; k < 4; ++k) r += a[k] * std::cos((k + 1) * theta + phi[k]);
        return r0 * r;
    }
};

double min_boundary_distance(const Mask& mask, Point center) {
    double best = std::numeric_limits<double>::infinity();
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x) {
            if (!mask.at(x, y)) continue;
            bool edge = x == 0 || x == mask.w - 1 || y == 0 || y == mask.h - 1 ||
                        !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                        !mask.at(x, y + 1);
            if (edge) best = std::min(best, std::hypot(x - center.x, y - center.y));
        }
    return best;
}

bool feasible_gt(const Mask& mask, Point center, const SynthConfig& cfg) {
    double r = 0.45 * std::min(mask.h, mask.w);
    StarPattern star = build_star(center, r, cfg.check_lines, cfg.check_points);
    ContourIndices v;
    try {
        v = mask_to_indices(star, mask);
    } catch (const DataError&) {
        return false;
    }
    for (int n = 0; n < v.size(); ++n) {
        int d = std::abs(v.v[static_cast<size_t>(n)] - v.v[static_cast<size_t>((n + 1) % v.size())]);
        if (d > cfg.check_delta) return false;
    }
    return true;
}

}  // namespace

bool is_star_convex(const Mask& mask, Point center, int n_rays) {
    int cx = static_cast<int>(std::lround(center.x));
    int cy = static_cast<int>(std::lround(center.y));
    if (!mask.inside(cx, cy) || !mask.at(cx, cy)) return false;
    double max_r = std::hypot(mask.h, mask.w);
    for (int i = 0; i < n_rays; ++i) {
        double theta = 2.0 * M_PI * i / n_rays;
        double c = std::cos(theta), s = std::sin(theta);
        bool left_fg = false;
        for (double r = 0.0; r <= max_r; r += 0.5) {
            int px = static_cast<int>(std::lround(center.x + r * c));
            int py = static_cast<int>(std::lround(center.y + r * s));
            bool fg = mask.inside(px, py) && mask.at(px, py);
            if (!fg) left_fg = true;
            else if (left_fg) return false;  // re-entered: more than one crossing
        }
    }
    return true;
}

Sample gen_sample(std::uint64_t seed, std::uint64_t index, int h, int w, const SynthConfig& cfg) {
    if (h < 32 || w < 32) throw std::invalid_argument("gen_sample: need H,W >= 32");
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng = make_rng(seed, index, attempt);
        std::uniform_real_distribution<double> uni01(0.0, 1.0);

        Blob blob;
        blob.r0 = (0.15 + 0.20 * uni01(rng)) * std::min(h, w);
        for (int k = 0; k < 4; ++k) {
            blob.a[k] = -0.15 + 0.30 * uni01(rng);
            blob.phi[k] = 2.0 * M_PI * uni01(rng);
        }
        blob.center = Point{(0.35 + 0.30 * uni01(rng)) * (w - 1),
                            (0.35 + 0.30 * uni01(rng)) * (h - 1)};

        Mask mask(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double dx = x - blob.center.x, dy = y - blob.center.y;
                double d = std::hypot(dx, dy);
                double theta = std::atan2(dy, dx);
                double r = blob.radius(theta);
                double fit = border_distance(blob.center, std::cos(theta), std::sin(theta), h, w) - 2.0;
                r = std::max(std::min(r, fit), 3.0);
                if (d <= r) mask.at(x, y) = 1;
            }

        double bg = cfg.bg_lo + (cfg.bg_hi - cfg.bg_lo) * uni01(rng);
        double contrast = cfg.contrast_lo + (cfg.contrast_hi - cfg.contrast_lo) * uni01(rng);
        double sx = -0.1 + 0.2 * uni01(rng);
        double sy = -0.1 + 0.2 * uni01(rng);

        std::vector<double> raw(static_cast<size_t>(h) * w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                raw[static_cast<size_t>(y) * w + x] = bg + (mask.at(x, y) ? contrast : 0.0);

        // 3x3 box smoothing, replicate borders
        std::vector<double> img(raw.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int xx = std::clamp(x + dx, 0, w - 1);
                        int yy = std::clamp(y + dy, 0, h - 1);
                        acc += raw[static_cast<size_t>(yy) * w + xx];
                    }
                img[static_cast<size_t>(y) * w + x] = acc / 9.0;
            }

        std::normal_distribution<double> noise(0.0, cfg.noise);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double ramp = sx * (static_cast<double>(x) / (w - 1) - 0.5) +
                              sy * (static_cast<double>(y) / (h - 1) - 0.5);
                double v = img[static_cast<size_t>(y) * w + x] + ramp +
                           (cfg.noise > 0.0 ? noise(rng) : 0.0);
                img[static_cast<size_t>(y) * w + x] = std::clamp(v, 0.0, 1.0);
            }

        if (mask.count() == 0) continue;
        Point centroid = mask_centroid(mask);
        int ccx = static_cast<int>(std::lround(centroid.x));
        int ccy = static_cast<int>(std::lround(centroid.y));
        if (!mask.inside(ccx, ccy) || !mask.at(ccx, ccy)) continue;
        if (!is_star_convex(mask, centroid)) continue;
        if (!feasible_gt(mask, centroid, cfg)) continue;

        Sample s;
        s.h = h;
        s.w = w;
        s.image = std::move(img);
        s.mask = std::move(mask);
        s.center = centroid;
        s.object_radius = min_boundary_distance(s.mask, centroid);
        return s;
    }
}

Manifest gen_dataset(std::uint64_t seed, int n_train, int n_val, int h, int w,
                     const SynthConfig& cfg, const std::string& out_dir) {
    if (n_train < 1 || n_val < 1) throw std::invalid_argument("gen_dataset: need n_train, n_val >= 1");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    Manifest mf;
    mf.seed = seed;
    mf.h = h;
    mf.w = w;

    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["h"] = h;
    j["w"] = w;
    j["samples"] = nlohmann::ordered_json::array();

    auto emit = [&](std::uint64_t index, const std::string& name, const char* split) {
        Sample s = gen_sample(seed, index, h, w, cfg);
        write_image_pgm(out_dir + "/" + name + ".pgm", s.image, h, w);
        write_mask_pgm(out_dir + "/" + name + "_mask.pgm", s.mask);
        nlohmann::ordered_json e;
        e["name"] = name;
        e["split"] = split;
        e["center"] = {s.center.x, s.center.y};
        e["object_radius"] = s.object_radius;
        j["samples"].push_back(e);
    };

    char buf[32];
    for (int i = 0; i < n_train; ++i) {
        std::snprintf(buf, sizeof(buf), "train_%04d", i);
        mf.train_names.emplace_back(buf);
        emit(static_cast<std::uint64_t>(i), buf, "train");
    }
    // val indices live in a disjoint stream
    for (int i = 0; i < n_val; ++i) {
        std::snprintf(buf, sizeof(buf), "val_%04d", i);
        mf.val_names.emplace_back(buf);
        emit(1000000ull + static_cast<std::uint64_t>(i), buf, "val");
    }

    std::ofstream f(out_dir + "/manifest.json");
    if (!f) throw DataError("gen_dataset: cannot write manifest in " + out_dir);
    f << j.dump(2) << "\n";
    return mf;
}

Manifest load_manifest(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw DataError("load_manifest: no manifest.json in " + dir);
    nlohmann::json j;
    f >> j;
    Manifest mf;
    mf.seed = j.at("seed").get<std::uint64_t>();
    mf.h = j.at("h").get<int>();
    mf.w = j.at("w").get<int>();
    for (const auto& e : j.at("samples")) {
        if (e.at("split") == "train")
            mf.train_names.push_back(e.at("name").get<std::string>());
        else
            mf.val_names.push_back(e.at("name").get<std::string>());
    }
    return mf;
}

std::vector<Sample> load_split(const std::string& dir, const Manifest& mf, bool train) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw DataError("load_split: no manifest.json in " + dir);
    nlohmann::json j;
    f >> j;
    std::vector<Sample> out;
    for (const auto& e : j.at("samples")) {
        bool is_train = e.at("split") == "train";
        if (is_train != train) continue;
        Sample s;
        s.name = e.at("name").get<std::string>();
        s.image = read_image_pgm(dir + "/" + s.name + ".pgm", s.h, s.w);
        s.mask = read_mask_pgm(dir + "/" + s.name + "_mask.pgm");
        s.center = Point{e.at("center")[0].get<double>(), e.at("center")[1].get<double>()};
        s.object_radius = e.at("object_radius").get<double>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace edp
