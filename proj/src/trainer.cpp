#include "edp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace edp {

Arm arm_from_string(const std::string& s) {
    if (s == "edpcnn") return Arm::Edpcnn;
    if (s == "unet") return Arm::Unet;
    if (s == "unet+dp") return Arm::UnetDp;
    throw std::invalid_argument("unknown arm: " + s + " (expected edpcnn, unet or unet+dp)");
}

std::string arm_to_string(Arm a) {
    switch (a) {
        case Arm::Edpcnn: return "edpcnn";
        case Arm::Unet: return "unet";
        default: return "unet+dp";
    }
}

namespace {

Tensor batch_images(const std::vector<const Sample*>& batch) {
    const int B = static_cast<int>(batch.size());
    const int H = batch[0]->h, W = batch[0]->w;
    Tensor x(Shape{B, 1, H, W});
    for (int i = 0; i < B; ++i)
        std::copy(batch[static_cast<size_t>(i)]->image.begin(),
                  batch[static_cast<size_t>(i)]->image.end(),
                  x.data() + static_cast<size_t>(i) * H * W);
    return x;
}

Tensor batch_masks(const std::vector<const Sample*>& batch) {
    const int B = static_cast<int>(batch.size());
    const int H = batch[0]->h, W = batch[0]->w;
    Tensor m(Shape{B, 1, H, W});
    for (int i = 0; i < B; ++i)
        for (size_t p = 0; p < batch[static_cast<size_t>(i)]->mask.v.size(); ++p)
            m.data()[static_cast<size_t>(i) * H * W + p] =
                batch[static_cast<size_t>(i)]->mask.v[p] ? 1.0 : 0.0;
    return m;
}

// Jittered star plus ground-truth indices; falls back to the unjittered
// center when rounding lands the jittered center on background.
std::pair<StarPattern, ContourIndices> make_training_star(const Sample& s, const TrainConfig& cfg,
                                                          Rng& rng_aug) {
    double rot = 0.0;
    if (cfg.rotate_star) {
        std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI / cfg.num_lines);
        rot = u(rng_aug);
    }
    for (int tries = 0; tries < 8; ++tries) {
        Point c = jitter_center(s.center, s.object_radius, cfg.jitter_frac, rng_aug);
        StarPattern star = build_star(c, cfg.radius, cfg.num_lines, cfg.points_per_line, rot);
        try {
            ContourIndices gt = mask_to_indices(star, s.mask);
            return {std::move(star), std::move(gt)};
        } catch (const DataError&) {
            continue;
        }
    }
    StarPattern star = build_star(s.center, cfg.radius, cfg.num_lines, cfg.points_per_line, rot);
    return {star, mask_to_indices(star, s.mask)};
}

Mask decode_dp(const double* map, int h, int w, Point center, const TrainConfig& cfg) {
    StarPattern star = build_star(center, cfg.radius, cfg.num_lines, cfg.points_per_line, 0.0);
    WarpedMap wm = warp_forward(map, h, w, star);
    dp::DpResult r = dp::dp_solve(wm.g, cfg.num_lines, cfg.points_per_line, cfg.delta, cfg.polarity);
    ContourIndices smoothed = dp::smooth_indices(r.indices, cfg.window, cfg.points_per_line);
    return polygon_to_mask(indices_to_polygon(star, smoothed), h, w);
}

void score(metrics::MetricReport& rep, const Mask& pred, const Mask& gt) {
    rep.dice.push_back(metrics::dice(pred, gt));
    try {
        auto sd = metrics::surface_distances(pred, gt);
        rep.assd.push_back(sd.assd);
        rep.hd.push_back(sd.hd);
    } catch (const DataError&) {
        rep.assd.push_back(std::numeric_limits<double>::quiet_NaN());
        rep.hd.push_back(std::numeric_limits<double>::quiet_NaN());
        ++rep.failures;
    }
}

std::vector<std::vector<double>> snapshot(const ParamSet& ps) {
    std::vector<std::vector<double>> out;
    for (const auto& [n, t] : ps.items) out.push_back(t.values());
    return out;
}

void restore(ParamSet& ps, const std::vector<std::vector<double>>& snap) {
    for (size_t i = 0; i < ps.items.size(); ++i) ps.items[i].second.values() = snap[i];
}

}  // namespace

StepLosses edpcnn_step(const std::vector<const Sample*>& batch, SegNet& seg, ApproxNet& approx,
                       Adam& opt_seg, Adam& opt_approx, const TrainConfig& cfg, Rng& rng_aug,
                       Rng& rng_noise) {
    const int B = static_cast<int>(batch.size());
    const int N = cfg.num_lines, M = cfg.points_per_line;

    Tape tape;
    Tensor x = batch_images(batch);

    std::vector<StarPattern> stars;
    std::vector<int> gt_targets;
    gt_targets.reserve(static_cast<size_t>(B) * N);
    for (const Sample* s : batch) {
        auto [star, gt] = make_training_star(*s, cfg, rng_aug);
        stars.push_back(std::move(star));
        for (int v : gt.v) gt_targets.push_back(v);
    }

    Tensor out = seg.forward(&tape, x);
    Tensor g = warp_op(&tape, out, stars);

    // Surrogate fitting: g is a constant here, only the noise varies.
    std::vector<double> g_const = g.values();
    std::normal_distribution<double> nd(0.0, 1.0);
    double inner_acc = 0.0;
    long inner_count = 0;
    for (int s = 0; s < cfg.noise_samples; ++s) {
        Tensor gn(Shape{B, 1, N, M});
        for (std::int64_t i = 0; i < gn.size(); ++i)
            gn.data()[i] = g_const[static_cast<size_t>(i)] + cfg.sigma * nd(rng_noise);

        std::vector<int> targets;
        targets.reserve(static_cast<size_t>(B) * N);
        for (int bi = 0; bi < B; ++bi) {
            std::vector<double> gi(gn.data() + static_cast<size_t>(bi) * N * M,
                                   gn.data() + static_cast<size_t>(bi + 1) * N * M);
            dp::DpResult r = dp::dp_solve(gi, N, M, cfg.delta, cfg.polarity);
            ContourIndices sm = dp::smooth_indices(r.indices, cfg.window, M);
            for (int v : sm.v) targets.push_back(v);
        }

        for (int step = 0; step < cfg.inner_steps; ++step) {
            Tape inner_tape;
            Tensor p = approx.forward(&inner_tape, gn);
            Tensor loss = ops::cross_entropy_rows(&inner_tape, p, targets);
            approx.params().zero_grad();
            gn.zero_grad();
            inner_tape.backward(loss);
            opt_approx.step(approx.params());
            inner_acc += loss.item();
            ++inner_count;
        }
    }

    // Outer update through the frozen surrogate, the warp adjoint and the net.
    Tensor p = approx.forward(&tape, g);
    Tensor outer_loss = ops::cross_entropy_rows(&tape, p, gt_targets);
    seg.params().zero_grad();
    approx.params().zero_grad();
    tape.backward(outer_loss);
    opt_seg.step(seg.params());

    double outer = outer_loss.item();
    if (!std::isfinite(outer)) throw NumericalError("edpcnn_step: non-finite outer loss");
    return {inner_count ? inner_acc / inner_count : 0.0, outer};
}

StepLosses unet_step(const std::vector<const Sample*>& batch, SegNet& seg, Adam& opt_seg,
                     const TrainConfig& cfg) {
    (void)cfg;
    Tape tape;
    Tensor x = batch_images(batch);
    Tensor m = batch_masks(batch);
    Tensor out = seg.forward(&tape, x);
    Tensor loss = baseline_seg_loss(&tape, out, m);
    seg.params().zero_grad();
    tape.backward(loss);
    opt_seg.step(seg.params());
    return {0.0, loss.item()};
}

metrics::MetricReport eval_edpcnn(const SegNet& seg, const std::vector<Sample>& samples,
                                  const TrainConfig& cfg, const std::vector<Point>* centers) {
    metrics::MetricReport rep;
    for (size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        Tensor x(Shape{1, 1, s.h, s.w});
        std::copy(s.image.begin(), s.image.end(), x.data());
        Tensor out = seg.forward(nullptr, x);
        Point c = centers ? (*centers)[i] : s.center;
        Mask pred = decode_dp(out.data(), s.h, s.w, c, cfg);
        score(rep, pred, s.mask);
    }
    return rep;
}

metrics::MetricReport eval_unet(const SegNet& seg, const std::vector<Sample>& samples,
                                const TrainConfig& cfg) {
    (void)cfg;
    metrics::MetricReport rep;
    for (const Sample& s : samples) {
        Tensor x(Shape{1, 1, s.h, s.w});
        std::copy(s.image.begin(), s.image.end(), x.data());
        Tensor out = seg.forward(nullptr, x);
        Mask pred(s.h, s.w);
        for (size_t p = 0; p < pred.v.size(); ++p) pred.v[p] = out.data()[p] > 0.0 ? 1 : 0;
        pred = metrics::select_component(pred, s.center);
        score(rep, pred, s.mask);
    }
    return rep;
}

TrainResult train(const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  Arm arm, const TrainConfig& cfg) {
    if (train_set.empty() || val_set.empty()) throw DataError("train: empty split");

    SegNet seg(cfg.seg_depth, cfg.seg_base, cfg.seed);
    ApproxNet approx(cfg.approx_base, cfg.seed);
    Adam opt_seg(cfg.lr, cfg.beta1, cfg.beta2);
    Adam opt_approx(cfg.lr, cfg.beta1, cfg.beta2);

    Rng rng_batch = make_rng(cfg.seed, 0xba7c);
    Rng rng_aug = make_rng(cfg.seed, 0xa096);
    Rng rng_noise = make_rng(cfg.seed, 0x0153);

    TrainLog log;
    auto best = snapshot(seg.params());

    std::uniform_int_distribution<size_t> pick(0, train_set.size() - 1);
    for (long iter = 1; iter <= cfg.iters; ++iter) {
        std::vector<const Sample*> batch;
        for (int b = 0; b < cfg.batch; ++b) batch.push_back(&train_set[pick(rng_batch)]);

        StepLosses losses{};
        if (arm == Arm::Edpcnn)
            losses = edpcnn_step(batch, seg, approx, opt_seg, opt_approx, cfg, rng_aug, rng_noise);
        else
            losses = unet_step(batch, seg, opt_seg, cfg);
        log.iters.push_back({iter, losses.inner_loss, losses.outer_loss});

        if (cfg.eval_every > 0 && iter % cfg.eval_every == 0) {
            metrics::MetricReport rep = (arm == Arm::Unet) ? eval_unet(seg, val_set, cfg)
                                                           : eval_edpcnn(seg, val_set, cfg);
            log.evals.push_back({iter, rep.dice_mean(), rep.dice_std(), rep.assd_mean(),
                                 rep.hd_mean(), rep.failures});
            if (rep.dice_mean() > log.best_dice) {
                log.best_dice = rep.dice_mean();
                log.best_iter = iter;
                best = snapshot(seg.params());
            }
        }
    }
    if (log.best_iter < 0) best = snapshot(seg.params());  // no eval happened

    restore(seg.params(), best);
    return {std::move(seg), std::move(approx), std::move(log)};
}

std::vector<AblateRow> ablate(const std::vector<Sample>& train_set,
                              const std::vector<Sample>& val_set, const std::vector<int>& sizes,
                              const std::vector<Arm>& arms, const TrainConfig& cfg) {
    for (size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] < sizes[i - 1]) throw std::invalid_argument("ablate: sizes must ascend");
    if (!sizes.empty() && sizes.back() > static_cast<int>(train_set.size()))
        throw DataError("ablate: size exceeds dataset");

    // one shuffle with the run seed; prefixes are then telescopic
    std::vector<Sample> shuffled = train_set;
    Rng rng = make_rng(cfg.seed, 0x5f1e);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    std::vector<AblateRow> rows;
    for (int size : sizes) {
        std::vector<Sample> subset(shuffled.begin(), shuffled.begin() + size);
        for (Arm arm : arms) {
            TrainResult r = train(subset, val_set, arm, cfg);
            metrics::MetricReport rep = (arm == Arm::Unet) ? eval_unet(r.seg, val_set, cfg)
                                                           : eval_edpcnn(r.seg, val_set, cfg);
            rows.push_back({size, arm, rep.dice_mean(), rep.assd_mean(), rep.hd_mean()});
        }
    }
    return rows;
}

std::vector<JitterRow> jitter_eval(const SegNet& seg, const std::vector<Sample>& val_set,
                                   const std::vector<double>& fractions, int n_seeds,
                                   const TrainConfig& cfg) {
    std::vector<JitterRow> rows;
    for (double frac : fractions) {
        std::vector<double> per_seed;
        for (int s = 0; s < n_seeds; ++s) {
            Rng rng = make_rng(cfg.seed, 0x717e, static_cast<std::uint64_t>(s));
            std::vector<Point> centers;
            centers.reserve(val_set.size());
            for (const Sample& smp : val_set)
                centers.push_back(jitter_center(smp.center, smp.object_radius, frac, rng));
            per_seed.push_back(eval_edpcnn(seg, val_set, cfg, &centers).dice_mean());
        }
        double m = 0.0;
        for (double d : per_seed) m += d;
        m /= per_seed.size();
        double var = 0.0;
        for (double d : per_seed) var += (d - m) * (d - m);
        rows.push_back({frac, m, std::sqrt(var / per_seed.size())});
    }
    return rows;
}

void TrainLog::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DataError("TrainLog: cannot write " + path);
    f << "iteration,inner_loss,outer_loss\n";
    char buf[128];
    for (const IterRecord& r : iters) {
        std::snprintf(buf, sizeof(buf), "%ld,%.10g,%.10g\n", r.iter, r.inner_loss, r.outer_loss);
        f << buf;
    }
}

void TrainLog::write_evals_json(const std::string& path) const {
    nlohmann::ordered_json j;
    j["best_iter"] = best_iter;
    j["best_dice"] = best_dice;
    j["evals"] = nlohmann::ordered_json::array();
    for (const EvalRecord& e : evals) {
        nlohmann::ordered_json r;
        r["iter"] = e.iter;
        r["dice_mean"] = e.dice_mean;
        r["dice_std"] = e.dice_std;
        r["assd_mean"] = e.assd_mean;
        r["hd_mean"] = e.hd_mean;
        r["failures"] = e.failures;
        j["evals"].push_back(r);
    }
    std::ofstream f(path);
    if (!f) throw DataError("TrainLog: cannot write " + path);
    f << j.dump(2) << "\n";
}

}  // namespace edp
