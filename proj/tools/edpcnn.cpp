#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "edp/checkpoint.hpp"
#include "edp/pgm.hpp"
#include "edp/trainer.hpp"

namespace fs = std::filesystem;
using namespace edp;

namespace {

struct CliConfig {
    TrainConfig train;
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::string config_path;
    std::string arm = "edpcnn";
    std::string polarity = "as-printed";
    int train_size = 0;  // 0 = whole split
};

void add_common_flags(CLI::App* cmd, CliConfig& c) {
    cmd->add_option("--config", c.config_path, "flat key=value config file; flags override");
    cmd->add_option("--lr", c.train.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch", c.train.batch, "batch size")->capture_default_str();
    cmd->add_option("--iters", c.train.iters, "training iterations")->capture_default_str();
    cmd->add_option("--sigma", c.train.sigma, "exploration noise std")->capture_default_str();
    cmd->add_option("--noise-samples", c.train.noise_samples, "noise samples S per step")
        ->capture_default_str();
    cmd->add_option("--inner-steps", c.train.inner_steps, "surrogate updates per noise sample")
        ->capture_default_str();
    cmd->add_option("--num-lines", c.train.num_lines, "radial lines N")->capture_default_str();
    cmd->add_option("--points-per-line", c.train.points_per_line, "points per line M")
        ->capture_default_str();
    cmd->add_option("--radius", c.train.radius, "star radius R in pixels")->capture_default_str();
    cmd->add_option("--delta", c.train.delta, "contour smoothness bound")->capture_default_str();
    cmd->add_option("--window", c.train.window, "index smoothing window (odd)")
        ->capture_default_str();
    cmd->add_option("--eval-every", c.train.eval_every, "validation interval in iterations")
        ->capture_default_str();
    cmd->add_option("--seed", c.train.seed, "run seed")->capture_default_str();
    cmd->add_option("--edge-polarity", c.polarity, "as-printed | negated")->capture_default_str();
    cmd->add_option("--jitter-frac", c.train.jitter_frac, "training center jitter fraction")
        ->capture_default_str();
    cmd->add_option("--seg-depth", c.train.seg_depth, "segmentation net depth")
        ->capture_default_str();
    cmd->add_option("--seg-base", c.train.seg_base, "segmentation net base channels")
        ->capture_default_str();
    cmd->add_option("--approx-base", c.train.approx_base, "surrogate base channels")
        ->capture_default_str();
}

// Flat key=value config files; values act as defaults, explicit flags win.
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--config", "cannot read " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw CLI::ValidationError("--config", "missing '=' on line " +
                                                       std::to_string(lineno));
        std::string key = line.substr(start, eq - start);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string val = line.substr(eq + 1);
        val.erase(0, val.find_first_not_of(" \t"));
        val.erase(val.find_last_not_of(" \t\r") + 1);
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config" || key == "help")
            throw CLI::ValidationError("--config", "unknown key '" + key + "'");
        if (opt->count() > 0) continue;  // explicit flag overrides
        opt->add_result(val);
        opt->run_callback();
    }
}

void finalize(CliConfig& c) {
    if (c.polarity == "as-printed")
        c.train.polarity = dp::EdgePolarity::AsPrinted;
    else if (c.polarity == "negated")
        c.train.polarity = dp::EdgePolarity::Negated;
    else
        throw CLI::ValidationError("--edge-polarity", "expected as-printed or negated");
}

void write_resolved_config(const CLI::App* cmd, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream f(dir + "/resolved-config.txt");
    f << "command=" << cmd->get_name() << "\n";
    for (const CLI::Option* opt : cmd->get_options()) {
        const auto& lnames = opt->get_lnames();
        std::string name = lnames.empty() ? std::string() : lnames[0];
        if (name.empty() || name == "help" || name == "config") continue;
        std::string val = opt->count() ? opt->results()[0] : opt->get_default_str();
        f << name << "=" << val << "\n";
    }
}

std::vector<Sample> telescopic_subset(std::vector<Sample> train_set, int size,
                                      std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x5f1e);  // same shuffle stream as ablate()
    std::shuffle(train_set.begin(), train_set.end(), rng);
    if (size > 0 && size < static_cast<int>(train_set.size()))
        train_set.resize(static_cast<size_t>(size));
    return train_set;
}

nlohmann::ordered_json report_json(const metrics::MetricReport& rep) {
    nlohmann::ordered_json j;
    j["dice_mean"] = rep.dice_mean();
    j["dice_std"] = rep.dice_std();
    j["assd_mean"] = rep.assd_mean();
    j["hd_mean"] = rep.hd_mean();
    j["failures"] = rep.failures;
    j["per_sample"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < rep.dice.size(); ++i) {
        nlohmann::ordered_json e;
        e["dice"] = rep.dice[i];
        e["assd"] = std::isnan(rep.assd[i]) ? nlohmann::ordered_json()
                                            : nlohmann::ordered_json(rep.assd[i]);
        e["hd"] = std::isnan(rep.hd[i]) ? nlohmann::ordered_json()
                                        : nlohmann::ordered_json(rep.hd[i]);
        j["per_sample"].push_back(e);
    }
    return j;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

void draw_polygon(std::vector<double>& img, int h, int w, const std::vector<Point>& poly) {
    auto plot = [&](int x, int y) {
        if (x >= 0 && x < w && y >= 0 && y < h) img[static_cast<size_t>(y) * w + x] = 1.0;
    };
    for (size_t i = 0; i < poly.size(); ++i) {
        Point a = poly[i], b = poly[(i + 1) % poly.size()];
        int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(b.x - a.x),
                                                                    std::abs(b.y - a.y)) * 2)));
        for (int s = 0; s <= steps; ++s) {
            double t = static_cast<double>(s) / steps;
            plot(static_cast<int>(std::lround(a.x + t * (b.x - a.x))),
                 static_cast<int>(std::lround(a.y + t * (b.y - a.y))));
        }
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Star-pattern contour segmentation with a learned solver surrogate"};
    app.require_subcommand(1);

    CliConfig c;
    SynthConfig synth;
    int n_train = 200, n_val = 60, img_h = 64, img_w = 64;
    std::string image_path, ckpt_path, center_str, sizes_str = "10,50,200";
    std::string arms_str = "edpcnn,unet,unet+dp", fractions_str = "0,0.1,0.2";
    int n_seeds = 5;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic blob dataset");
    gen->add_option("--seed", c.train.seed, "dataset seed")->capture_default_str();
    gen->add_option("--n-train", n_train, "training samples")->capture_default_str();
    gen->add_option("--n-val", n_val, "validation samples")->capture_default_str();
    gen->add_option("--height", img_h, "image height")->capture_default_str();
    gen->add_option("--width", img_w, "image width")->capture_default_str();
    gen->add_option("--noise", synth.noise, "pixel noise std")->capture_default_str();
    gen->add_option("--out", c.out_dir, "output directory")->capture_default_str();

    CLI::App* tr = app.add_subcommand("train", "train one arm and keep the best checkpoint");
    add_common_flags(tr, c);
    tr->add_option("--data", c.data_dir, "dataset directory")->capture_default_str();
    tr->add_option("--out", c.out_dir, "run output directory")->capture_default_str();
    tr->add_option("--arm", c.arm, "edpcnn | unet | unet+dp")->capture_default_str();
    tr->add_option("--train-size", c.train_size, "telescopic prefix size (0 = all)")
        ->capture_default_str();

    CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on the validation split");
    add_common_flags(ev, c);
    ev->add_option("--data", c.data_dir, "dataset directory")->capture_default_str();
    ev->add_option("--out", c.out_dir, "report output directory")->capture_default_str();
    ev->add_option("--arm", c.arm, "decoding: edpcnn | unet | unet+dp")->capture_default_str();
    ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();

    CLI::App* sg = app.add_subcommand("segment", "segment a single image");
    add_common_flags(sg, c);
    sg->add_option("--image", image_path, "input PGM image")->required();
    sg->add_option("--center", center_str, "star center as x,y")->required();
    sg->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    sg->add_option("--out", c.out_dir, "output directory")->capture_default_str();

    CLI::App* ab = app.add_subcommand("ablate", "telescopic training-set ablation");
    add_common_flags(ab, c);
    ab->add_option("--data", c.data_dir, "dataset directory")->capture_default_str();
    ab->add_option("--out", c.out_dir, "output directory")->capture_default_str();
    ab->add_option("--sizes", sizes_str, "comma-separated train sizes")->capture_default_str();
    ab->add_option("--arms", arms_str, "comma-separated arms")->capture_default_str();

    CLI::App* ji = app.add_subcommand("jitter", "center-jitter robustness sweep");
    add_common_flags(ji, c);
    ji->add_option("--data", c.data_dir, "dataset directory")->capture_default_str();
    ji->add_option("--out", c.out_dir, "output directory")->capture_default_str();
    ji->add_option("--checkpoint", ckpt_path, "trained edpcnn checkpoint")->required();
    ji->add_option("--fractions", fractions_str, "comma-separated jitter fractions")
        ->capture_default_str();
    ji->add_option("--seeds", n_seeds, "number of jitter seeds")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!c.config_path.empty()) {
        try {
            apply_config(app.get_subcommands().front(), c.config_path);
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
    }
    finalize(c);

    if (gen->parsed()) {
        gen_dataset(c.train.seed, n_train, n_val, img_h, img_w, synth, c.out_dir);
        std::cout << "wrote " << (n_train + n_val) << " samples to " << c.out_dir << "\n";
        return 0;
    }

    if (tr->parsed()) {
        Manifest mf = load_manifest(c.data_dir);
        std::vector<Sample> train_set =
            telescopic_subset(load_split(c.data_dir, mf, true), c.train_size, c.train.seed);
        std::vector<Sample> val_set = load_split(c.data_dir, mf, false);
        Arm arm = arm_from_string(c.arm);
        write_resolved_config(tr, c.out_dir);

        TrainResult r = train(train_set, val_set, arm, c.train);
        save_checkpoint(c.out_dir + "/best.ckpt", r.seg.params());
        if (arm == Arm::Edpcnn) save_checkpoint(c.out_dir + "/approx.ckpt", r.approx.params());
        r.log.write_csv(c.out_dir + "/log.csv");
        r.log.write_evals_json(c.out_dir + "/evals.json");
        std::cout << "arm=" << c.arm << " train_size=" << train_set.size()
                  << " best_iter=" << r.log.best_iter << " best_dice=" << r.log.best_dice << "\n";
        return 0;
    }

    if (ev->parsed()) {
        Manifest mf = load_manifest(c.data_dir);
        std::vector<Sample> val_set = load_split(c.data_dir, mf, false);
        Arm arm = arm_from_string(c.arm);
        SegNet seg(c.train.seg_depth, c.train.seg_base, c.train.seed);
        load_checkpoint(ckpt_path, seg.params());
        metrics::MetricReport rep = (arm == Arm::Unet) ? eval_unet(seg, val_set, c.train)
                                                       : eval_edpcnn(seg, val_set, c.train);
        write_resolved_config(ev, c.out_dir);
        std::ofstream f(c.out_dir + "/eval.json");
        f << report_json(rep).dump(2) << "\n";
        std::cout << "dice=" << rep.dice_mean() << " assd=" << rep.assd_mean()
                  << " hd=" << rep.hd_mean() << " failures=" << rep.failures << "\n";
        return 0;
    }

    if (sg->parsed()) {
        auto cs = parse_doubles(center_str);
        if (cs.size() != 2) throw CLI::ValidationError("--center", "expected x,y");
        int h = 0, w = 0;
        std::vector<double> img = read_image_pgm(image_path, h, w);
        SegNet seg(c.train.seg_depth, c.train.seg_base, c.train.seed);
        load_checkpoint(ckpt_path, seg.params());

        Tensor x(Shape{1, 1, h, w});
        std::copy(img.begin(), img.end(), x.data());
        Tensor out = seg.forward(nullptr, x);
        StarPattern star = build_star(Point{cs[0], cs[1]}, c.train.radius, c.train.num_lines,
                                      c.train.points_per_line, 0.0);
        WarpedMap wm = warp_forward(out.data(), h, w, star);
        dp::DpResult r = dp::dp_solve(wm.g, c.train.num_lines, c.train.points_per_line,
                                      c.train.delta, c.train.polarity);
        ContourIndices v = dp::smooth_indices(r.indices, c.train.window, c.train.points_per_line);
        std::vector<Point> poly = indices_to_polygon(star, v);

        fs::create_directories(c.out_dir);
        write_resolved_config(sg, c.out_dir);
        nlohmann::ordered_json j;
        j["center"] = {cs[0], cs[1]};
        j["radius"] = c.train.radius;
        j["v"] = v.v;
        j["polygon"] = nlohmann::ordered_json::array();
        for (const Point& p : poly) j["polygon"].push_back({p.x, p.y});
        std::ofstream f(c.out_dir + "/contour.json");
        f << j.dump(2) << "\n";

        std::vector<double> overlay = img;
        draw_polygon(overlay, h, w, poly);
        write_image_pgm(c.out_dir + "/overlay.pgm", overlay, h, w);
        std::cout << "wrote " << c.out_dir << "/contour.json and overlay.pgm\n";
        return 0;
    }

    if (ab->parsed()) {
        Manifest mf = load_manifest(c.data_dir);
        std::vector<Sample> train_set = load_split(c.data_dir, mf, true);
        std::vector<Sample> val_set = load_split(c.data_dir, mf, false);
        std::vector<Arm> arms;
        {
            std::stringstream ss(arms_str);
            std::string tok;
            while (std::getline(ss, tok, ',')) arms.push_back(arm_from_string(tok));
        }
        write_resolved_config(ab, c.out_dir);
        std::vector<AblateRow> rows = ablate(train_set, val_set, parse_ints(sizes_str), arms, c.train);
        std::ofstream f(c.out_dir + "/ablation.csv");
        f << "size,arm,dice,assd,hd\n";
        char buf[160];
        for (const AblateRow& r : rows) {
            std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%.6f\n", r.size,
                          arm_to_string(r.arm).c_str(), r.dice, r.assd, r.hd);
            f << buf;
            std::cout << buf;
        }
        return 0;
    }

    if (ji->parsed()) {
        Manifest mf = load_manifest(c.data_dir);
        std::vector<Sample> val_set = load_split(c.data_dir, mf, false);
        SegNet seg(c.train.seg_depth, c.train.seg_base, c.train.seed);
        load_checkpoint(ckpt_path, seg.params());
        write_resolved_config(ji, c.out_dir);
        std::vector<JitterRow> rows =
            jitter_eval(seg, val_set, parse_doubles(fractions_str), n_seeds, c.train);
        std::ofstream f(c.out_dir + "/jitter.csv");
        f << "fraction,dice_mean,dice_std\n";
        char buf[96];
        for (const JitterRow& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%.6f\n", r.fraction, r.dice_mean, r.dice_std);
            f << buf;
            std::cout << buf;
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
