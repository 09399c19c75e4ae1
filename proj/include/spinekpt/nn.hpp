#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinekpt/tensor.hpp"

namespace spinekpt {

enum class LayerKind {
    conv3x3,
    conv1x1,
    relu,
    sigmoid,
    upsample2x_nearest,
    add_skip,
};

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv3x3: return "conv3x3";
        case LayerKind::conv1x1: return "conv1x1";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::upsample2x_nearest: return "upsample2x_nearest";
        case LayerKind::add_skip: return "add_skip";
    }
    return "?";
}

inline LayerKind layer_kind_from_name(const std::string& s) {
    if (s == "conv3x3") return LayerKind::conv3x3;
    if (s == "conv1x1") return LayerKind::conv1x1;
    if (s == "relu") return LayerKind::relu;
    if (s == "sigmoid") return LayerKind::sigmoid;
    if (s == "upsample2x_nearest") return LayerKind::upsample2x_nearest;
    if (s == "add_skip") return LayerKind::add_skip;
    throw std::invalid_argument("unknown layer kind: " + s);
}

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int in_channels = 0;
    int out_channels = 0;
    int stride = 1;

    bool operator==(const LayerSpec&) const = default;
};

namespace nn {

inline int conv_pad(int kernel) { return kernel == 3 ? 1 : 0; }

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline std::size_t conv_out_dim(std::size_t in, int kernel, int stride) {
    const int pad = conv_pad(kernel);
    return (in + 2 * static_cast<std::size_t>(pad) - kernel) / stride + 1;
}

/// Cross-correlation of a CxHxW input with an OxIxKxK kernel. 3x3 kernels use
/// zero padding 1, 1x1 kernels no padding; stride is 1 or 2.
inline Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                     int stride) {
    if (input.shape.size() != 3 || kernel.shape.size() != 4)
        throw std::invalid_argument("conv2d: input must be CxHxW, kernel OxIxKhxKw");
    if (kernel.dim(2) != kernel.dim(3) || (kernel.dim(2) != 1 && kernel.dim(2) != 3))
        throw std::invalid_argument("conv2d: kernel must be 1x1 or 3x3");
    if (kernel.dim(1) != input.dim(0))
        throw std::invalid_argument("conv2d: kernel input channels mismatch");
    if (bias.numel() != kernel.dim(0))
        throw std::invalid_argument("conv2d: bias size mismatch");
    if (stride != 1 && stride != 2)
        throw std::invalid_argument("conv2d: stride must be 1 or 2");
    if (stride == 2 && (input.dim(1) % 2 != 0 || input.dim(2) % 2 != 0))
        throw std::invalid_argument("conv2d: stride-2 input dims must be even");

    const int k = static_cast<int>(kernel.dim(2));
    const int pad = conv_pad(k);
    const std::size_t in_c = input.dim(0);
    const int in_h = static_cast<int>(input.dim(1));
    const int in_w = static_cast<int>(input.dim(2));
    const std::size_t out_c = kernel.dim(0);
    const int out_h = static_cast<int>(conv_out_dim(input.dim(1), k, stride));
    const int out_w = static_cast<int>(conv_out_dim(input.dim(2), k, stride));

    Tensor out({out_c, static_cast<std::size_t>(out_h), static_cast<std::size_t>(out_w)});
    for (std::size_t o = 0; o < out_c; ++o) {
        double* out_plane = out.plane(o);
        std::fill(out_plane, out_plane + static_cast<std::size_t>(out_h) * out_w,
                  bias.data[o]);
        for (std::size_t i = 0; i < in_c; ++i) {
            const double* in_plane = input.plane(i);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = kernel.at4(o, i, ky, kx);
                    if (wv == 0.0) continue;
                    // valid output range so that the tap stays inside the input
                    const int oy_lo = std::max(0, (pad - ky + stride - 1) / stride);
                    const int oy_hi = std::min(out_h - 1, floor_div(in_h - 1 + pad - ky, stride));
                    const int ox_lo = std::max(0, (pad - kx + stride - 1) / stride);
                    const int ox_hi = std::min(out_w - 1, floor_div(in_w - 1 + pad - kx, stride));
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        const double* in_row = in_plane + static_cast<std::size_t>(iy) * in_w;
                        double* out_row = out_plane + static_cast<std::size_t>(oy) * out_w;
                        int ix = ox_lo * stride - pad + kx;
                        for (int ox = ox_lo; ox <= ox_hi; ++ox, ix += stride)
                            out_row[ox] += wv * in_row[ix];
                    }
                }
            }
        }
    }
    return out;
}

struct ConvGrads {
    Tensor grad_input;
    Tensor grad_kernel;
    Tensor grad_bias;
};

/// Exact reverse-mode gradients of conv2d for the input, kernel and bias.
inline ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                                 const Tensor& grad_out, int stride) {
    const int k = static_cast<int>(kernel.dim(2));
    const int pad = conv_pad(k);
    const std::size_t in_c = input.dim(0);
    const int in_h = static_cast<int>(input.dim(1));
    const int in_w = static_cast<int>(input.dim(2));
    const std::size_t out_c = kernel.dim(0);
    const int out_h = static_cast<int>(grad_out.dim(1));
    const int out_w = static_cast<int>(grad_out.dim(2));
    if (grad_out.dim(0) != out_c ||
        grad_out.dim(1) != conv_out_dim(input.dim(1), k, stride) ||
        grad_out.dim(2) != conv_out_dim(input.dim(2), k, stride))
        throw std::invalid_argument("conv2d_backward: grad_out shape mismatch");

    ConvGrads g;
    g.grad_input = Tensor(input.shape);
    g.grad_kernel = Tensor(kernel.shape);
    g.grad_bias = Tensor(std::vector<std::size_t>{out_c});

    for (std::size_t o = 0; o < out_c; ++o) {
        const double* go_plane = grad_out.plane(o);
        double bias_acc = 0.0;
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox)
                bias_acc += go_plane[static_cast<std::size_t>(oy) * out_w + ox];
        g.grad_bias.data[o] = bias_acc;

        for (std::size_t i = 0; i < in_c; ++i) {
            const double* in_plane = input.plane(i);
            double* gi_plane = g.grad_input.plane(i);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = kernel.at4(o, i, ky, kx);
                    const int oy_lo = std::max(0, (pad - ky + stride - 1) / stride);
                    const int oy_hi = std::min(out_h - 1, floor_div(in_h - 1 + pad - ky, stride));
                    const int ox_lo = std::max(0, (pad - kx + stride - 1) / stride);
                    const int ox_hi = std::min(out_w - 1, floor_div(in_w - 1 + pad - kx, stride));
                    double w_acc = 0.0;
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const int iy = oy * stride - pad + ky;
                        const double* in_row = in_plane + static_cast<std::size_t>(iy) * in_w;
                        double* gi_row = gi_plane + static_cast<std::size_t>(iy) * in_w;
                        const double* go_row = go_plane + static_cast<std::size_t>(oy) * out_w;
                        int ix = ox_lo * stride - pad + kx;
                        for (int ox = ox_lo; ox <= ox_hi; ++ox, ix += stride) {
                            const double go = go_row[ox];
                            w_acc += go * in_row[ix];
                            gi_row[ix] += go * wv;
                        }
                    }
                    g.grad_kernel.at4(o, i, ky, kx) += w_acc;
                }
            }
        }
    }
    return g;
}

inline Tensor relu(const Tensor& x) {
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i)
        out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
    return out;
}

/// Subgradient at 0 is taken as 0: grad flows only where the pre-activation
/// was strictly positive.
inline Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_out) {
    require_same_shape(pre_activation, grad_out, "relu_backward");
    Tensor g(grad_out.shape);
    for (std::size_t i = 0; i < g.numel(); ++i)
        g.data[i] = pre_activation.data[i] > 0.0 ? grad_out.data[i] : 0.0;
    return g;
}

inline Tensor sigmoid(const Tensor& x) {
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i)
        out.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
    return out;
}

inline Tensor sigmoid_backward(const Tensor& activated, const Tensor& grad_out) {
    require_same_shape(activated, grad_out, "sigmoid_backward");
    Tensor g(grad_out.shape);
    for (std::size_t i = 0; i < g.numel(); ++i) {
        const double s = activated.data[i];
        g.data[i] = grad_out.data[i] * s * (1.0 - s);
    }
    return g;
}

inline Tensor upsample2x_nearest(const Tensor& x) {
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double* in_plane = x.plane(ci);
        double* out_plane = out.plane(ci);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x2 = 0; x2 < w; ++x2) {
                const double v = in_plane[y * w + x2];
                double* r0 = out_plane + (2 * y) * (2 * w) + 2 * x2;
                double* r1 = r0 + 2 * w;
                r0[0] = r0[1] = r1[0] = r1[1] = v;
            }
        }
    }
    return out;
}

/// Each source cell receives the sum of its replicated 2x2 block.
inline Tensor upsample2x_nearest_backward(const Tensor& grad_out) {
    const std::size_t c = grad_out.dim(0), h2 = grad_out.dim(1), w2 = grad_out.dim(2);
    if (h2 % 2 != 0 || w2 % 2 != 0)
        throw std::invalid_argument("upsample2x backward: grad dims must be even");
    Tensor g({c, h2 / 2, w2 / 2});
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double* go = grad_out.plane(ci);
        double* gi = g.plane(ci);
        for (std::size_t y = 0; y < h2 / 2; ++y) {
            for (std::size_t x = 0; x < w2 / 2; ++x) {
                const double* r0 = go + (2 * y) * w2 + 2 * x;
                const double* r1 = r0 + w2;
                gi[y * (w2 / 2) + x] = r0[0] + r0[1] + r1[0] + r1[1];
            }
        }
    }
    return g;
}

} // namespace nn
} // namespace spinekpt
