#pragma once

#include <string>

#include "edp/optim.hpp"
#include "edp/ops.hpp"

namespace edp {

// Padded-convolution encoder-decoder with skip concatenation, single output
// channel, no final nonlinearity. Channels double per level. Decoders use
// nearest upsample + conv rather than transposed convolution.
class SegNet {
  public:
    SegNet(int depth = 2, int base_channels = 8, std::uint64_t init_seed = 0);

    Tensor forward(Tape* tape, const Tensor& image) const;  // [B,1,H,W] -> [B,1,H,W]

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    int depth() const { return depth_; }
    int base_channels() const { return base_; }

    // conv weights+biases as a closed-form function of (depth, base_channels)
    static std::int64_t expected_param_count(int depth, int base_channels);

  private:
    int depth_, base_;
    ParamSet params_;
    Tensor block(Tape* tape, const Tensor& x, const std::string& prefix, int n_convs) const;
};

// Surrogate for the contour solver: encoder-decoder over the N x M grid,
// 3 down / 3 up, returning a softmax distribution over M per radial line.
// Grids are zero-padded to multiples of 8 internally and cropped back.
class ApproxNet {
  public:
    explicit ApproxNet(int base_channels = 8, std::uint64_t init_seed = 0);

    // g: [B,1,N,M] -> [B,N,M], every row a distribution over M.
    Tensor forward(Tape* tape, const Tensor& g) const;

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    int base_channels() const { return base_; }

    static constexpr int kDepth = 3;
    static std::int64_t expected_param_count(int base_channels);

  private:
    int base_;
    ParamSet params_;
    Tensor block(Tape* tape, const Tensor& x, const std::string& prefix, int n_convs) const;
};

// Mean per-pixel BCE between sigmoid(output_map) and the binary mask.
Tensor baseline_seg_loss(Tape* tape, const Tensor& output_map, const Tensor& mask);

}  // namespace edp
