#include "edp/nets.hpp"

#include <cmath>

namespace edp {

namespace {

void add_conv(ParamSet& ps, Rng& rng, const std::string& name, int cin, int cout, int k) {
    Tensor w(Shape{cout, cin, k, k});
    init_uniform_fanin(w, cin * k * k, rng);
    ps.add(name + ".w", std::move(w));
    ps.add(name + ".b", Tensor(Shape{cout}));  // zero bias
}

Tensor conv_relu(Tape* tape, const ParamSet& ps, const std::string& name, const Tensor& x,
                 int pad) {
    const ParamSet& cps = ps;
    auto* w = const_cast<ParamSet&>(cps).find(name + ".w");
    auto* b = const_cast<ParamSet&>(cps).find(name + ".b");
    return ops::relu(tape, ops::conv2d(tape, x, *w, *b, pad));
}

// Leaky activations keep the surrogate responsive everywhere: its whole job is to
// carry gradients back to the segmentation net, and the inner fit happens on noisy
// inputs whose scale can dwarf the clean map, which would leave plain relus dead there.
Tensor conv_lrelu(Tape* tape, const ParamSet& ps, const std::string& name, const Tensor& x,
                  int pad) {
    auto* w = const_cast<ParamSet&>(ps).find(name + ".w");
    auto* b = const_cast<ParamSet&>(ps).find(name + ".b");
    return ops::leaky_relu(tape, ops::conv2d(tape, x, *w, *b, pad));
}

Tensor conv_plain(Tape* tape, const ParamSet& ps, const std::string& name, const Tensor& x,
                  int pad) {
    auto* w = const_cast<ParamSet&>(ps).find(name + ".w");
    auto* b = const_cast<ParamSet&>(ps).find(name + ".b");
    return ops::conv2d(tape, x, *w, *b, pad);
}

}  // namespace

SegNet::SegNet(int depth, int base_channels, std::uint64_t init_seed)
    : depth_(depth), base_(base_channels) {
    Rng rng = make_rng(init_seed, 0x5e61);
    int cin = 1;
    for (int d = 0; d < depth_; ++d) {
        int ch = base_ << d;
        add_conv(params_, rng, "enc" + std::to_string(d) + ".conv0", cin, ch, 3);
        add_conv(params_, rng, "enc" + std::to_string(d) + ".conv1", ch, ch, 3);
        cin = ch;
    }
    int bottom = base_ << depth_;
    add_conv(params_, rng, "mid.conv0", cin, bottom, 3);
    add_conv(params_, rng, "mid.conv1", bottom, bottom, 3);
    for (int d = depth_ - 1; d >= 0; --d) {
        int ch = base_ << d;
        int up_in = (base_ << (d + 1)) + ch;  // upsampled + skip
        add_conv(params_, rng, "dec" + std::to_string(d) + ".conv0", up_in, ch, 3);
        add_conv(params_, rng, "dec" + std::to_string(d) + ".conv1", ch, ch, 3);
    }
    add_conv(params_, rng, "out", base_, 1, 1);
}

Tensor SegNet::forward(Tape* tape, const Tensor& image) const {
    if (image.ndim() != 4 || image.dim(1) != 1)
        throw std::invalid_argument("SegNet::forward: need [B,1,H,W]");
    int div = 1 << depth_;
    if (image.dim(2) % div != 0 || image.dim(3) % div != 0)
        throw std::invalid_argument("SegNet::forward: H and W must be divisible by 2^depth");

    std::vector<Tensor> skips;
    Tensor x = image;
    for (int d = 0; d < depth_; ++d) {
        x = conv_relu(tape, params_, "enc" + std::to_string(d) + ".conv0", x, 1);
        x = conv_relu(tape, params_, "enc" + std::to_string(d) + ".conv1", x, 1);
        skips.push_back(x);
        x = ops::maxpool2x2(tape, x);
    }
    x = conv_relu(tape, params_, "mid.conv0", x, 1);
    x = conv_relu(tape, params_, "mid.conv1", x, 1);
    for (int d = depth_ - 1; d >= 0; --d) {
        x = ops::upsample2x_nearest(tape, x);
        x = ops::concat_channels(tape, x, skips[static_cast<size_t>(d)]);
        x = conv_relu(tape, params_, "dec" + std::to_string(d) + ".conv0", x, 1);
        x = conv_relu(tape, params_, "dec" + std::to_string(d) + ".conv1", x, 1);
    }
    return conv_plain(tape, params_, "out", x, 0);
}

std::int64_t SegNet::expected_param_count(int depth, int base_channels) {
    auto conv = [](int cin, int cout, int k) {
        return static_cast<std::int64_t>(cout) * cin * k * k + cout;
    };
    std::int64_t total = 0;
    int cin = 1;
    for (int d = 0; d < depth; ++d) {
        int ch = base_channels << d;
        total += conv(cin, ch, 3) + conv(ch, ch, 3);
        cin = ch;
    }
    int bottom = base_channels << depth;
    total += conv(cin, bottom, 3) + conv(bottom, bottom, 3);
    for (int d = depth - 1; d >= 0; --d) {
        int ch = base_channels << d;
        total += conv((base_channels << (d + 1)) + ch, ch, 3) + conv(ch, ch, 3);
    }
    return total + conv(base_channels, 1, 1);
}

ApproxNet::ApproxNet(int base_channels, std::uint64_t init_seed) : base_(base_channels) {
    Rng rng = make_rng(init_seed, 0xa993);
    int cin = 1;
    for (int d = 0; d < kDepth; ++d) {
        int ch = base_ << d;
        add_conv(params_, rng, "enc" + std::to_string(d) + ".conv0", cin, ch, 3);
        add_conv(params_, rng, "enc" + std::to_string(d) + ".conv1", ch, ch, 3);
        cin = ch;
    }
    int bottom = base_ << kDepth;
    add_conv(params_, rng, "mid.conv0", cin, bottom, 3);
    add_conv(params_, rng, "mid.conv1", bottom, bottom, 3);
    for (int d = kDepth - 1; d >= 0; --d) {
        int ch = base_ << d;
        add_conv(params_, rng, "dec" + std::to_string(d) + ".conv0", (base_ << (d + 1)) + ch, ch, 3);
        add_conv(params_, rng, "dec" + std::to_string(d) + ".conv1", ch, ch, 3);
    }
    add_conv(params_, rng, "out", base_, 1, 1);
}

Tensor ApproxNet::forward(Tape* tape, const Tensor& g) const {
    if (g.ndim() != 4 || g.dim(1) != 1)
        throw std::invalid_argument("ApproxNet::forward: need [B,1,N,M]");
    const int B = g.dim(0), N = g.dim(2), M = g.dim(3);
    const int mult = 1 << kDepth;
    const int nh = (N + mult - 1) / mult * mult;
    const int nw = (M + mult - 1) / mult * mult;

    Tensor x = (nh != N || nw != M) ? ops::pad_spatial(tape, g, nh, nw) : g;
    std::vector<Tensor> skips;
    for (int d = 0; d < kDepth; ++d) {
        x = conv_lrelu(tape, params_, "enc" + std::to_string(d) + ".conv0", x, 1);
        x = conv_lrelu(tape, params_, "enc" + std::to_string(d) + ".conv1", x, 1);
        skips.push_back(x);
        x = ops::maxpool2x2(tape, x);
    }
    x = conv_lrelu(tape, params_, "mid.conv0", x, 1);
    x = conv_lrelu(tape, params_, "mid.conv1", x, 1);
    for (int d = kDepth - 1; d >= 0; --d) {
        x = ops::upsample2x_nearest(tape, x);
        x = ops::concat_channels(tape, x, skips[static_cast<size_t>(d)]);
        x = conv_lrelu(tape, params_, "dec" + std::to_string(d) + ".conv0", x, 1);
        x = conv_lrelu(tape, params_, "dec" + std::to_string(d) + ".conv1", x, 1);
    }
    x = conv_plain(tape, params_, "out", x, 0);
    if (nh != N || nw != M) x = ops::crop_spatial(tape, x, N, M);
    x = ops::reshape(tape, x, Shape{B, N, M});
    return ops::softmax_rows(tape, x);
}

std::int64_t ApproxNet::expected_param_count(int base_channels) {
    auto conv = [](int cin, int cout, int k) {
        return static_cast<std::int64_t>(cout) * cin * k * k + cout;
    };
    std::int64_t total = 0;
    int cin = 1;
    for (int d = 0; d < kDepth; ++d) {
        int ch = base_channels << d;
        total += conv(cin, ch, 3) + conv(ch, ch, 3);
        cin = ch;
    }
    int bottom = base_channels << kDepth;
    total += conv(cin, bottom, 3) + conv(bottom, bottom, 3);
    for (int d = kDepth - 1; d >= 0; --d) {
        int ch = base_channels << d;
        total += conv((base_channels << (d + 1)) + ch, ch, 3) + conv(ch, ch, 3);
    }
    return total + conv(base_channels, 1, 1);
}

Tensor baseline_seg_loss(Tape* tape, const Tensor& output_map, const Tensor& mask) {
    return ops::sigmoid_bce_mean(tape, output_map, mask);
}

}  // namespace edp
