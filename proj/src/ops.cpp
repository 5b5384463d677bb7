#include "edp/ops.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace edp::ops {

void check_finite(const char* who, const Tensor& t) {
    for (double v : t.values())
        if (!std::isfinite(v)) throw NumericalError(std::string(who) + ": non-finite value in output");
}

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// cols layout: [C*kh*kw, Ho*Wo], row-major.
void im2col(const double* img, int C, int H, int W, int kh, int kw, int pad, int stride,
            int Ho, int Wo, double* cols) {
    for (int c = 0; c < C; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                double* row = cols + (static_cast<size_t>(c) * kh * kw + ki * kw + kj) *
                                         (static_cast<size_t>(Ho) * Wo);
                for (int oy = 0; oy < Ho; ++oy) {
                    int iy = oy * stride - pad + ki;
                    if (iy < 0 || iy >= H) {
                        std::fill(row + static_cast<size_t>(oy) * Wo,
                                  row + static_cast<size_t>(oy + 1) * Wo, 0.0);
                        continue;
                    }
                    const double* src = img + (static_cast<size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < Wo; ++ox) {
                        int ix = ox * stride - pad + kj;
                        row[static_cast<size_t>(oy) * Wo + ox] =
                            (ix >= 0 && ix < W) ? src[ix] : 0.0;
                    }
                }
            }
        }
    }
}

void col2im_acc(const double* cols, int C, int H, int W, int kh, int kw, int pad, int stride,
                int Ho, int Wo, double* img) {
    for (int c = 0; c < C; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const double* row = cols + (static_cast<size_t>(c) * kh * kw + ki * kw + kj) *
                                               (static_cast<size_t>(Ho) * Wo);
                for (int oy = 0; oy < Ho; ++oy) {
                    int iy = oy * stride - pad + ki;
                    if (iy < 0 || iy >= H) continue;
                    double* dst = img + (static_cast<size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < Wo; ++ox) {
                        int ix = ox * stride - pad + kj;
                        if (ix >= 0 && ix < W) dst[ix] += row[static_cast<size_t>(oy) * Wo + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d(Tape* tape, const Tensor& x, const Tensor& w, const Tensor& b, int pad,
              int stride) {
    require(x.ndim() == 4 && w.ndim() == 4 && b.ndim() == 1, "conv2d: rank mismatch");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    require(w.dim(1) == C, "conv2d: channel mismatch");
    require(b.dim(0) == K, "conv2d: bias size mismatch");
    require(kh % 2 == 1 && kw % 2 == 1, "conv2d: kernel dims must be odd");
    require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
    require((H + 2 * pad - kh) % stride == 0 && (W + 2 * pad - kw) % stride == 0,
            "conv2d: output size not integral");
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    require(Ho > 0 && Wo > 0, "conv2d: empty output");

    const int ck = C * kh * kw;
    const size_t plane = static_cast<size_t>(Ho) * Wo;
    Tensor y(Shape{B, K, Ho, Wo});
    std::vector<double> cols(static_cast<size_t>(ck) * plane);
    for (int bi = 0; bi < B; ++bi) {
        im2col(x.data() + static_cast<size_t>(bi) * C * H * W, C, H, W, kh, kw, pad, stride, Ho,
               Wo, cols.data());
        double* out = y.data() + static_cast<size_t>(bi) * K * plane;
        cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, K, static_cast<int>(plane), ck,
                    1.0, w.data(), ck, cols.data(), static_cast<int>(plane), 0.0, out,
                    static_cast<int>(plane));
        for (int k = 0; k < K; ++k) {
            double bk = b.data()[k];
            double* row = out + static_cast<size_t>(k) * plane;
            for (size_t i = 0; i < plane; ++i) row[i] += bk;
        }
    }
    check_finite("conv2d", y);

    if (tape) {
        Tensor xc = x, wc = w, bc = b, yc = y;
        tape->record([xc, wc, bc, yc, pad, stride, B, C, H, W, K, kh, kw, Ho, Wo]() mutable {
            const int ck = C * kh * kw;
            const size_t plane = static_cast<size_t>(Ho) * Wo;
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            std::vector<double>& gw = wc.grad();
            std::vector<double>& gb = bc.grad();
            std::vector<double> cols(static_cast<size_t>(ck) * plane);
            std::vector<double> gcols(static_cast<size_t>(ck) * plane);
            for (int bi = 0; bi < B; ++bi) {
                const double* gyb = gy.data() + static_cast<size_t>(bi) * K * plane;
                im2col(xc.data() + static_cast<size_t>(bi) * C * H * W, C, H, W, kh, kw, pad,
                       stride, Ho, Wo, cols.data());
                // dW += gY . colsT
                cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, K, ck,
                            static_cast<int>(plane), 1.0, gyb, static_cast<int>(plane),
                            cols.data(), static_cast<int>(plane), 1.0, gw.data(), ck);
                // dcols = WT . gY, then scatter back into dx
                cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, ck,
                            static_cast<int>(plane), K, 1.0, wc.data(), ck, gyb,
                            static_cast<int>(plane), 0.0, gcols.data(),
                            static_cast<int>(plane));
                col2im_acc(gcols.data(), C, H, W, kh, kw, pad, stride, Ho, Wo,
                           gx.data() + static_cast<size_t>(bi) * C * H * W);
                for (int k = 0; k < K; ++k) {
                    const double* row = gyb + static_cast<size_t>(k) * plane;
                    double s = 0.0;
                    for (size_t i = 0; i < plane; ++i) s += row[i];
                    gb[static_cast<size_t>(k)] += s;
                }
            }
        });
    }
    return y;
}

Tensor relu(Tape* tape, const Tensor& x) {
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) y.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (size_t i = 0; i < gx.size(); ++i)
                if (xc.data()[i] > 0.0) gx[i] += gy[i];
        });
    }
    return y;
}

Tensor leaky_relu(Tape* tape, const Tensor& x, double slope) {
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i)
        y.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : slope * x.data()[i];
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, slope]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (size_t i = 0; i < gx.size(); ++i)
                gx[i] += (xc.data()[i] > 0.0 ? 1.0 : slope) * gy[i];
        });
    }
    return y;
}

Tensor maxpool2x2(Tape* tape, const Tensor& x) {
    require(x.ndim() == 4, "maxpool2x2: need [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    require(H % 2 == 0 && W % 2 == 0, "maxpool2x2: H and W must be even");
    const int Ho = H / 2, Wo = W / 2;
    Tensor y(Shape{B, C, Ho, Wo});
    std::vector<std::int32_t> arg(static_cast<size_t>(y.size()));
    size_t o = 0;
    for (int bc = 0; bc < B * C; ++bc) {
        const double* img = x.data() + static_cast<size_t>(bc) * H * W;
        for (int oy = 0; oy < Ho; ++oy) {
            for (int ox = 0; ox < Wo; ++ox, ++o) {
                // tie toward the first position in raster order
                int base = 2 * oy * W + 2 * ox;
                int cand[4] = {base, base + 1, base + W, base + W + 1};
                int best = cand[0];
                for (int t = 1; t < 4; ++t)
                    if (img[cand[t]] > img[best]) best = cand[t];
                y.data()[o] = img[best];
                arg[o] = best;
            }
        }
    }
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, arg = std::move(arg), H, W, B, C]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            const size_t per = static_cast<size_t>(yc.dim(2)) * yc.dim(3);
            for (int bc = 0; bc < B * C; ++bc) {
                double* gimg = gx.data() + static_cast<size_t>(bc) * H * W;
                const double* gyp = gy.data() + static_cast<size_t>(bc) * per;
                const std::int32_t* ap = arg.data() + static_cast<size_t>(bc) * per;
                for (size_t i = 0; i < per; ++i) gimg[ap[i]] += gyp[i];
            }
        });
    }
    return y;
}

Tensor upsample2x_nearest(Tape* tape, const Tensor& x) {
    require(x.ndim() == 4, "upsample2x_nearest: need [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor y(Shape{B, C, 2 * H, 2 * W});
    for (int bc = 0; bc < B * C; ++bc) {
        const double* img = x.data() + static_cast<size_t>(bc) * H * W;
        double* out = y.data() + static_cast<size_t>(bc) * 4 * H * W;
        for (int iy = 0; iy < H; ++iy) {
            for (int ix = 0; ix < W; ++ix) {
                double v = img[iy * W + ix];
                size_t base = (static_cast<size_t>(2 * iy) * 2 * W) + 2 * ix;
                out[base] = v;
                out[base + 1] = v;
                out[base + 2 * W] = v;
                out[base + 2 * W + 1] = v;
            }
        }
    }
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, B, C, H, W]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (int bc = 0; bc < B * C; ++bc) {
                const double* gout = gy.data() + static_cast<size_t>(bc) * 4 * H * W;
                double* gimg = gx.data() + static_cast<size_t>(bc) * H * W;
                for (int iy = 0; iy < H; ++iy)
                    for (int ix = 0; ix < W; ++ix) {
                        size_t base = (static_cast<size_t>(2 * iy) * 2 * W) + 2 * ix;
                        gimg[iy * W + ix] +=
                            gout[base] + gout[base + 1] + gout[base + 2 * W] + gout[base + 2 * W + 1];
                    }
            }
        });
    }
    return y;
}

Tensor add(Tape* tape, const Tensor& x, const Tensor& y) {
    require(x.shape() == y.shape(), "add: shape mismatch");
    Tensor z(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) z.data()[i] = x.data()[i] + y.data()[i];
    check_finite("add", z);
    if (tape) {
        Tensor xc = x, yc = y, zc = z;
        tape->record([xc, yc, zc]() mutable {
            const std::vector<double>& gz = zc.grad();
            std::vector<double>& gx = xc.grad();
            std::vector<double>& gy = yc.grad();
            for (size_t i = 0; i < gz.size(); ++i) {
                gx[i] += gz[i];
                gy[i] += gz[i];
            }
        });
    }
    return z;
}

Tensor mul_scalar(Tape* tape, const Tensor& x, double c) {
    Tensor z(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) z.data()[i] = x.data()[i] * c;
    check_finite("mul_scalar", z);
    if (tape) {
        Tensor xc = x, zc = z;
        tape->record([xc, zc, c]() mutable {
            const std::vector<double>& gz = zc.grad();
            std::vector<double>& gx = xc.grad();
            for (size_t i = 0; i < gz.size(); ++i) gx[i] += c * gz[i];
        });
    }
    return z;
}

Tensor concat_channels(Tape* tape, const Tensor& x, const Tensor& y) {
    require(x.ndim() == 4 && y.ndim() == 4, "concat_channels: need [B,C,H,W]");
    require(x.dim(0) == y.dim(0) && x.dim(2) == y.dim(2) && x.dim(3) == y.dim(3),
            "concat_channels: non-channel dims mismatch");
    const int B = x.dim(0), Cx = x.dim(1), Cy = y.dim(1), H = x.dim(2), W = x.dim(3);
    const size_t plane = static_cast<size_t>(H) * W;
    Tensor z(Shape{B, Cx + Cy, H, W});
    for (int bi = 0; bi < B; ++bi) {
        std::memcpy(z.data() + static_cast<size_t>(bi) * (Cx + Cy) * plane,
                    x.data() + static_cast<size_t>(bi) * Cx * plane, Cx * plane * sizeof(double));
        std::memcpy(z.data() + (static_cast<size_t>(bi) * (Cx + Cy) + Cx) * plane,
                    y.data() + static_cast<size_t>(bi) * Cy * plane, Cy * plane * sizeof(double));
    }
    if (tape) {
        Tensor xc = x, yc = y, zc = z;
        tape->record([xc, yc, zc, B, Cx, Cy, plane]() mutable {
            const std::vector<double>& gz = zc.grad();
            std::vector<double>& gx = xc.grad();
            std::vector<double>& gy = yc.grad();
            for (int bi = 0; bi < B; ++bi) {
                const double* gzx = gz.data() + static_cast<size_t>(bi) * (Cx + Cy) * plane;
                const double* gzy = gzx + static_cast<size_t>(Cx) * plane;
                double* gxp = gx.data() + static_cast<size_t>(bi) * Cx * plane;
                double* gyp = gy.data() + static_cast<size_t>(bi) * Cy * plane;
                for (size_t i = 0; i < static_cast<size_t>(Cx) * plane; ++i) gxp[i] += gzx[i];
                for (size_t i = 0; i < static_cast<size_t>(Cy) * plane; ++i) gyp[i] += gzy[i];
            }
        });
    }
    return z;
}

Tensor pad_spatial(Tape* tape, const Tensor& x, int target_h, int target_w) {
    require(x.ndim() == 4, "pad_spatial: need [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    require(target_h >= H && target_w >= W, "pad_spatial: target smaller than input");
    Tensor y(Shape{B, C, target_h, target_w});
    for (int bc = 0; bc < B * C; ++bc) {
        const double* img = x.data() + static_cast<size_t>(bc) * H * W;
        double* out = y.data() + static_cast<size_t>(bc) * target_h * target_w;
        for (int iy = 0; iy < H; ++iy)
            std::memcpy(out + static_cast<size_t>(iy) * target_w, img + static_cast<size_t>(iy) * W,
                        W * sizeof(double));
    }
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, B, C, H, W, target_h, target_w]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (int bc = 0; bc < B * C; ++bc) {
                const double* gout = gy.data() + static_cast<size_t>(bc) * target_h * target_w;
                double* gimg = gx.data() + static_cast<size_t>(bc) * H * W;
                for (int iy = 0; iy < H; ++iy)
                    for (int ix = 0; ix < W; ++ix)
                        gimg[iy * W + ix] += gout[static_cast<size_t>(iy) * target_w + ix];
            }
        });
    }
    return y;
}

Tensor crop_spatial(Tape* tape, const Tensor& x, int target_h, int target_w) {
    require(x.ndim() == 4, "crop_spatial: need [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    require(target_h <= H && target_w <= W, "crop_spatial: target larger than input");
    Tensor y(Shape{B, C, target_h, target_w});
    for (int bc = 0; bc < B * C; ++bc) {
        const double* img = x.data() + static_cast<size_t>(bc) * H * W;
        double* out = y.data() + static_cast<size_t>(bc) * target_h * target_w;
        for (int iy = 0; iy < target_h; ++iy)
            std::memcpy(out + static_cast<size_t>(iy) * target_w, img + static_cast<size_t>(iy) * W,
                        target_w * sizeof(double));
    }
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, B, C, H, W, target_h, target_w]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (int bc = 0; bc < B * C; ++bc) {
                const double* gout = gy.data() + static_cast<size_t>(bc) * target_h * target_w;
                double* gimg = gx.data() + static_cast<size_t>(bc) * H * W;
                for (int iy = 0; iy < target_h; ++iy)
                    for (int ix = 0; ix < target_w; ++ix)
                        gimg[iy * W + ix] += gout[static_cast<size_t>(iy) * target_w + ix];
            }
        });
    }
    return y;
}

Tensor reshape(Tape* tape, const Tensor& x, Shape shape) {
    require(shape_numel(shape) == x.size(), "reshape: element count mismatch");
    Tensor y(std::move(shape));
    std::memcpy(y.data(), x.data(), static_cast<size_t>(x.size()) * sizeof(double));
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
        });
    }
    return y;
}

Tensor softmax_rows(Tape* tape, const Tensor& x) {
    require(x.ndim() >= 1, "softmax_rows: empty shape");
    const int M = x.dim(x.ndim() - 1);
    const std::int64_t rows = x.size() / M;
    Tensor y(x.shape());
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* in = x.data() + r * M;
        double* out = y.data() + r * M;
        double mx = in[0];
        for (int i = 1; i < M; ++i) mx = std::max(mx, in[i]);
        double s = 0.0;
        for (int i = 0; i < M; ++i) {
            out[i] = std::exp(in[i] - mx);
            s += out[i];
        }
        for (int i = 0; i < M; ++i) out[i] /= s;
    }
    check_finite("softmax_rows", y);
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc, rows, M]() mutable {
            const std::vector<double>& gy = yc.grad();
            std::vector<double>& gx = xc.grad();
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* p = yc.data() + r * M;
                const double* gp = gy.data() + r * M;
                double dot = 0.0;
                for (int i = 0; i < M; ++i) dot += p[i] * gp[i];
                for (int i = 0; i < M; ++i) gx[r * M + i] += p[i] * (gp[i] - dot);
            }
        });
    }
    return y;
}

Tensor cross_entropy_rows(Tape* tape, const Tensor& p, const std::vector<int>& targets) {
    const int M = p.dim(p.ndim() - 1);
    const std::int64_t rows = p.size() / M;
    require(static_cast<std::int64_t>(targets.size()) == rows,
            "cross_entropy_rows: one target per row required");
    for (int t : targets)
        if (t < 1 || t > M) throw std::invalid_argument("cross_entropy_rows: target out of range");
    constexpr double kFloor = 1e-300;  // p comes from softmax, strictly positive
    Tensor loss(Shape{1});
    double acc = 0.0;
    for (std::int64_t r = 0; r < rows; ++r)
        acc -= std::log(std::max(p.data()[r * M + targets[static_cast<size_t>(r)] - 1], kFloor));
    loss.data()[0] = acc / static_cast<double>(rows);
    check_finite("cross_entropy_rows", loss);
    if (tape) {
        Tensor pc = p, lc = loss;
        tape->record([pc, lc, targets, rows, M]() mutable {
            double gl = lc.grad()[0];
            std::vector<double>& gp = pc.grad();
            for (std::int64_t r = 0; r < rows; ++r) {
                size_t idx = static_cast<size_t>(r * M + targets[static_cast<size_t>(r)] - 1);
                gp[idx] += gl * (-1.0 / (std::max(pc.data()[idx], 1e-300) * rows));
            }
        });
    }
    return loss;
}

Tensor sum(Tape* tape, const Tensor& x) {
    Tensor y(Shape{1});
    double acc = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) acc += x.data()[i];
    y.data()[0] = acc;
    check_finite("sum", y);
    if (tape) {
        Tensor xc = x, yc = y;
        tape->record([xc, yc]() mutable {
            double g = yc.grad()[0];
            std::vector<double>& gx = xc.grad();
            for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        });
    }
    return y;
}

Tensor mean(Tape* tape, const Tensor& x) {
    Tensor s = sum(tape, x);
    return mul_scalar(tape, s, 1.0 / static_cast<double>(x.size()));
}

Tensor sigmoid_bce_mean(Tape* tape, const Tensor& logits, const Tensor& target) {
    require(logits.shape() == target.shape(), "sigmoid_bce_mean: shape mismatch");
    const std::int64_t n = logits.size();
    Tensor loss(Shape{1});
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double z = logits.data()[i], y = target.data()[i];
        // stable: max(z,0) - z*y + log(1 + exp(-|z|))
        acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    loss.data()[0] = acc / static_cast<double>(n);
    check_finite("sigmoid_bce_mean", loss);
    if (tape) {
        Tensor lc = logits, tc = target, oc = loss;
        tape->record([lc, tc, oc, n]() mutable {
            double g = oc.grad()[0] / static_cast<double>(n);
            std::vector<double>& gx = lc.grad();
            for (std::int64_t i = 0; i < n; ++i) {
                double z = lc.data()[i];
                double s = 1.0 / (1.0 + std::exp(-z));
                gx[static_cast<size_t>(i)] += g * (s - tc.data()[i]);
            }
        });
    }
    return loss;
}

}  // namespace edp::ops
