#pragma once

#include <vector>

#include "edp/tensor.hpp"

// Differentiable primitives. Every op validates shapes, checks its outputs for
// NaN/Inf (NumericalError), and, when a Tape is supplied, records the exact
// adjoint. Passing tape == nullptr runs forward-only.
namespace edp::ops {

// x:[B,C,H,W] w:[K,C,kh,kw] b:[K] -> [B,K,H',W'], cross-correlation.
Tensor conv2d(Tape* tape, const Tensor& x, const Tensor& w, const Tensor& b, int pad,
              int stride = 1);

Tensor relu(Tape* tape, const Tensor& x);
Tensor leaky_relu(Tape* tape, const Tensor& x, double slope = 0.1);
Tensor maxpool2x2(Tape* tape, const Tensor& x);            // even H,W required
Tensor upsample2x_nearest(Tape* tape, const Tensor& x);    // [B,C,H,W] -> [B,C,2H,2W]
Tensor add(Tape* tape, const Tensor& x, const Tensor& y);
Tensor mul_scalar(Tape* tape, const Tensor& x, double c);
Tensor concat_channels(Tape* tape, const Tensor& x, const Tensor& y);

// Zero-pad (bottom/right) or crop [B,C,H,W] to the target spatial size.
Tensor pad_spatial(Tape* tape, const Tensor& x, int target_h, int target_w);
Tensor crop_spatial(Tape* tape, const Tensor& x, int target_h, int target_w);

// Same storage size, new shape; identity adjoint.
Tensor reshape(Tape* tape, const Tensor& x, Shape shape);

// Softmax over the trailing dimension of every row, max-subtracted.
Tensor softmax_rows(Tape* tape, const Tensor& x);

// p: softmax output [...,M]; targets 1-based, one per row; mean of -log p[t].
Tensor cross_entropy_rows(Tape* tape, const Tensor& p, const std::vector<int>& targets);

Tensor sum(Tape* tape, const Tensor& x);
Tensor mean(Tape* tape, const Tensor& x);

// Mean per-pixel binary cross-entropy on sigmoid(logits); target in {0,1}.
Tensor sigmoid_bce_mean(Tape* tape, const Tensor& logits, const Tensor& target);

void check_finite(const char* who, const Tensor& t);

}  // namespace edp::ops
