#pragma once

#include <optional>
#include <string>

#include "edp/dp.hpp"
#include "edp/metrics.hpp"
#include "edp/nets.hpp"
#include "edp/synth.hpp"
#include "edp/warp.hpp"

namespace edp {

enum class Arm { Edpcnn, Unet, UnetDp };

Arm arm_from_string(const std::string& s);
std::string arm_to_string(Arm a);

struct TrainConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int batch = 10;
    long iters = 2000;
    double sigma = 1.0;
    int noise_samples = 10;   // S
    int inner_steps = 10;
    int num_lines = 50;       // N
    int points_per_line = 65; // M
    double radius = 65.0;     // R
    int delta = 2;
    int window = 5;
    long eval_every = 50;
    std::uint64_t seed = 1;
    dp::EdgePolarity polarity = dp::EdgePolarity::AsPrinted;
    double jitter_frac = 0.2;     // center jitter during training, fraction of object radius
    bool rotate_star = true;      // one uniform rotation in [0, 2pi/N) per image per iteration
    int seg_depth = 2;
    int seg_base = 8;
    int approx_base = 8;
};

struct IterRecord {
    long iter;
    double inner_loss;  // 0 for the baseline arms
    double outer_loss;
};

struct EvalRecord {
    long iter;
    double dice_mean, dice_std, assd_mean, hd_mean;
    int failures;
};

struct TrainLog {
    std::vector<IterRecord> iters;
    std::vector<EvalRecord> evals;
    long best_iter = -1;
    double best_dice = -1.0;

    void write_csv(const std::string& path) const;
    void write_evals_json(const std::string& path) const;
};

struct TrainResult {
    SegNet seg;          // best-validation parameters
    ApproxNet approx;    // final surrogate state
    TrainLog log;
};

struct StepLosses {
    double inner_loss;
    double outer_loss;
};

// One Algorithm-2 step over a batch: warp the current output maps, fit the
// surrogate on noise-perturbed solver targets, then update the segmentation
// net through the frozen surrogate against the ground-truth indices.
StepLosses edpcnn_step(const std::vector<const Sample*>& batch, SegNet& seg, ApproxNet& approx,
                       Adam& opt_seg, Adam& opt_approx, const TrainConfig& cfg, Rng& rng_aug,
                       Rng& rng_noise);

StepLosses unet_step(const std::vector<const Sample*>& batch, SegNet& seg, Adam& opt_seg,
                     const TrainConfig& cfg);

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  Arm arm, const TrainConfig& cfg);

// Decoding + scoring of a trained net on a sample set. centers may override
// the per-sample centroid (same length as samples).
metrics::MetricReport eval_edpcnn(const SegNet& seg, const std::vector<Sample>& samples,
                                  const TrainConfig& cfg,
                                  const std::vector<Point>* centers = nullptr);
metrics::MetricReport eval_unet(const SegNet& seg, const std::vector<Sample>& samples,
                                const TrainConfig& cfg);

struct AblateRow {
    int size;
    Arm arm;
    double dice, assd, hd;
};

// Telescopic ablation: shuffle the training split once with the run seed,
// then train every arm on each prefix size.
std::vector<AblateRow> ablate(const std::vector<Sample>& train_set,
                              const std::vector<Sample>& val_set, const std::vector<int>& sizes,
                              const std::vector<Arm>& arms, const TrainConfig& cfg);

struct JitterRow {
    double fraction;
    double dice_mean, dice_std;  // across seeds
};

std::vector<JitterRow> jitter_eval(const SegNet& seg, const std::vector<Sample>& val_set,
                                   const std::vector<double>& fractions, int n_seeds,
                                   const TrainConfig& cfg);

}  // namespace edp
