#pragma once

#include <cmath>
#include <stdexcept>

#include "spinekpt/codec.hpp"
#include "spinekpt/tensor.hpp"

namespace spinekpt {

struct FocalParams {
    double alpha = 2.0;
    double beta = 4.0;
    double epsilon = 1e-12;  // clamp for log arguments
};

/// Scalar loss value plus its exact gradient w.r.t. the prediction tensor.
struct LossBundle {
    double value = 0.0;
    Tensor grad;
};

struct LossWeights {
    double w_heatmap = 1.0;
    double w_center_offset = 1.0;
    double w_corner_offset = 0.1;
};

/// Penalty-reduced focal loss on a post-sigmoid heatmap. Cells where the
/// target equals 1.0 exactly use the positive branch; all others use the
/// beta-down-weighted negative branch. Normalized by the total cell count.
/// Predictions are clamped into [epsilon, 1-epsilon] before the logs and the
/// gradient is taken at the clamped value.
inline LossBundle focal_loss(const Tensor& pred, const Tensor& target,
                             const FocalParams& params = {}) {
    require_same_shape(pred, target, "focal_loss");
    if (!pred.all_finite() || !target.all_finite())
        throw std::invalid_argument("focal_loss: non-finite input");

    const double alpha = params.alpha;
    const double beta = params.beta;
    const double eps = params.epsilon;
    const std::size_t n = pred.numel();
    const double inv_n = 1.0 / static_cast<double>(n);

    LossBundle out;
    out.grad = Tensor(pred.shape);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = target.data[i];
        const double p = std::min(std::max(pred.data[i], eps), 1.0 - eps);
        if (y == 1.0) {
            const double q = 1.0 - p;
            total += std::pow(q, alpha) * std::log(p);
            out.grad.data[i] =
                -inv_n * (-alpha * std::pow(q, alpha - 1.0) * std::log(p) +
                          std::pow(q, alpha) / p);
        } else {
            const double w = std::pow(1.0 - y, beta);
            total += w * std::pow(p, alpha) * std::log(1.0 - p);
            out.grad.data[i] =
                -inv_n * w * (alpha * std::pow(p, alpha - 1.0) * std::log(1.0 - p) -
                              std::pow(p, alpha) / (1.0 - p));
        }
    }
    out.value = -inv_n * total;
    return out;
}

/// L1 loss restricted to masked cells. The mask is 1xHxW and broadcasts over
/// prediction channels; normalization is by the number of masked cells. An
/// all-zero mask yields value 0 with zero gradient.
inline LossBundle masked_l1(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    require_same_shape(pred, target, "masked_l1");
    if (mask.shape.size() != 3 || mask.dim(0) != 1 || mask.dim(1) != pred.dim(1) ||
        mask.dim(2) != pred.dim(2))
        throw std::invalid_argument("masked_l1: mask must be 1xHxW matching prediction");

    const std::size_t channels = pred.dim(0);
    const std::size_t cells = pred.dim(1) * pred.dim(2);
    double mask_sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) mask_sum += mask.data[i];

    LossBundle out;
    out.grad = Tensor(pred.shape);
    if (mask_sum <= 0.0) return out;

    double total = 0.0;
    const double inv = 1.0 / mask_sum;
    for (std::size_t c = 0; c < channels; ++c) {
        const double* p = pred.plane(c);
        const double* t = target.plane(c);
        double* g = out.grad.plane(c);
        for (std::size_t i = 0; i < cells; ++i) {
            const double m = mask.data[i];
            if (m == 0.0) continue;
            const double d = p[i] - t[i];
            total += m * std::abs(d);
            g[i] = m * inv * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
        }
    }
    out.value = total * inv;
    return out;
}

/// Weighted sum of the three map losses plus the per-map gradients already
/// scaled by their weights.
struct TotalLoss {
    double value = 0.0;
    double heatmap_term = 0.0;        // unweighted component values
    double center_offset_term = 0.0;
    double corner_offset_term = 0.0;
    Tensor d_heatmap;
    Tensor d_center_offset;
    Tensor d_corner_offset;
};

inline TotalLoss total_loss(const PredictionMaps& pred, const TargetMaps& tgt,
                            const LossWeights& weights = {},
                            const FocalParams& params = {}) {
    LossBundle hm = focal_loss(pred.heatmap, tgt.heatmap, params);
    LossBundle co = masked_l1(pred.center_offset, tgt.center_offset, tgt.center_mask);
    LossBundle cr = masked_l1(pred.corner_offset, tgt.corner_offset, tgt.center_mask);

    TotalLoss out;
    out.heatmap_term = hm.value;
    out.center_offset_term = co.value;
    out.corner_offset_term = cr.value;
    out.value = weights.w_heatmap * hm.value + weights.w_center_offset * co.value +
                weights.w_corner_offset * cr.value;
    out.d_heatmap = std::move(hm.grad);
    out.d_center_offset = std::move(co.grad);
    out.d_corner_offset = std::move(cr.grad);
    for (double& v : out.d_heatmap.data) v *= weights.w_heatmap;
    for (double& v : out.d_center_offset.data) v *= weights.w_center_offset;
    for (double& v : out.d_corner_offset.data) v *= weights.w_corner_offset;
    return out;
}

} // namespace spinekpt
