#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spinekpt/codec.hpp"
#include "spinekpt/nn.hpp"
#include "spinekpt/tensor.hpp"

namespace spinekpt {

/// Ordered name -> tensor map. Order is the canonical parameter order used by
/// the optimizer and the checkpoint format.
struct NamedTensors {
    std::vector<std::pair<std::string, Tensor>> items;

    Tensor& operator[](const std::string& name) {
        for (auto& [k, v] : items)
            if (k == name) return v;
        items.emplace_back(name, Tensor{});
        return items.back().second;
    }
    const Tensor& at(const std::string& name) const {
        for (const auto& [k, v] : items)
            if (k == name) return v;
        throw std::out_of_range("no tensor named " + name);
    }
    bool contains(const std::string& name) const {
        for (const auto& [k, v] : items)
            if (k == name) return true;
        return false;
    }
    std::size_t size() const { return items.size(); }
};

using ModelParams = NamedTensors;

/// Encoder-decoder graph: three stride-2 stages, one nearest upsample back to
/// stride 4, a skip connection summing the stride-4 encoder features into the
/// decoder, and three 1x1 prediction heads (heatmap via sigmoid, center
/// offsets, corner offsets).
inline std::vector<LayerSpec> default_layer_specs() {
    using K = LayerKind;
    return {
        {K::conv3x3, 1, 16, 1},  {K::relu, 16, 16, 1},
        {K::conv3x3, 16, 32, 2}, {K::relu, 32, 32, 1},
        {K::conv3x3, 32, 64, 2}, {K::relu, 64, 64, 1},   // skip tap
        {K::conv3x3, 64, 64, 2}, {K::relu, 64, 64, 1},
        {K::upsample2x_nearest, 64, 64, 1},
        {K::add_skip, 64, 64, 1},
        {K::conv1x1, 64, 32, 1}, {K::relu, 32, 32, 1},
        {K::conv1x1, 32, 1, 1},  {K::sigmoid, 1, 1, 1},  // heatmap head
        {K::conv1x1, 32, 2, 1},                          // center offset head
        {K::conv1x1, 32, 8, 1},                          // corner offset head
    };
}

namespace detail {

struct ConvShape {
    const char* name;
    std::size_t out_c, in_c, k;
};

inline const std::vector<ConvShape>& conv_shapes() {
    static const std::vector<ConvShape> shapes = {
        {"conv1", 16, 1, 3},  {"conv2", 32, 16, 3}, {"conv3", 64, 32, 3},
        {"conv4", 64, 64, 3}, {"conv5", 32, 64, 1}, {"head_hm", 1, 32, 1},
        {"head_co", 2, 32, 1}, {"head_cr", 8, 32, 1},
    };
    return shapes;
}

} // namespace detail

/// Kernels drawn from N(0, 2/fan_in); biases zero except the heatmap head,
/// whose bias starts at -2.19 so the initial sigmoid output is about 0.1.
inline ModelParams init_model_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelParams params;
    for (const auto& s : detail::conv_shapes()) {
        Tensor w({s.out_c, s.in_c, s.k, s.k});
        const double stddev = std::sqrt(2.0 / static_cast<double>(s.in_c * s.k * s.k));
        std::normal_distribution<double> dist(0.0, stddev);
        for (double& v : w.data) v = dist(rng);
        params[std::string(s.name) + ".w"] = std::move(w);
        Tensor b(std::vector<std::size_t>{s.out_c});
        params[std::string(s.name) + ".b"] = std::move(b);
    }
    params["head_hm.b"].data[0] = -2.19;
    return params;
}

inline void validate_model_params(const ModelParams& params) {
    for (const auto& s : detail::conv_shapes()) {
        const std::string wn = std::string(s.name) + ".w";
        const std::string bn = std::string(s.name) + ".b";
        if (!params.contains(wn) || !params.contains(bn))
            throw std::invalid_argument("model params missing " + std::string(s.name));
        const std::vector<std::size_t> want{s.out_c, s.in_c, s.k, s.k};
        if (params.at(wn).shape != want)
            throw std::invalid_argument("model params: bad shape for " + wn);
        if (params.at(bn).numel() != s.out_c)
            throw std::invalid_argument("model params: bad shape for " + bn);
    }
}

/// Activations saved by the forward pass for the matching backward pass.
struct ForwardCache {
    Tensor input;
    Tensor z1, a1;  // conv1 pre-act, post-relu
    Tensor z2, a2;
    Tensor z3, a3;  // a3 feeds the skip connection
    Tensor z4, a4;
    Tensor up;      // upsampled a4
    Tensor merged;  // up + a3
    Tensor z5, feat;
    Tensor heatmap; // post-sigmoid
    bool valid = false;
};

struct ForwardResult {
    PredictionMaps maps;
    ForwardCache cache;
};

inline ForwardResult model_forward(const Tensor& image, const ModelParams& params) {
    if (image.shape.size() != 3 || image.dim(0) != 1)
        throw std::invalid_argument("model_forward: image must be 1xHxW");
    if (image.dim(1) % 8 != 0 || image.dim(2) % 8 != 0)
        throw std::invalid_argument("model_forward: image dims must be divisible by 8");

    ForwardResult r;
    ForwardCache& c = r.cache;
    c.input = image;
    c.z1 = nn::conv2d(image, params.at("conv1.w"), params.at("conv1.b"), 1);
    c.a1 = nn::relu(c.z1);
    c.z2 = nn::conv2d(c.a1, params.at("conv2.w"), params.at("conv2.b"), 2);
    c.a2 = nn::relu(c.z2);
    c.z3 = nn::conv2d(c.a2, params.at("conv3.w"), params.at("conv3.b"), 2);
    c.a3 = nn::relu(c.z3);
    c.z4 = nn::conv2d(c.a3, params.at("conv4.w"), params.at("conv4.b"), 2);
    c.a4 = nn::relu(c.z4);
    c.up = nn::upsample2x_nearest(c.a4);
    c.merged = Tensor(c.up.shape);
    for (std::size_t i = 0; i < c.merged.numel(); ++i)
        c.merged.data[i] = c.up.data[i] + c.a3.data[i];
    c.z5 = nn::conv2d(c.merged, params.at("conv5.w"), params.at("conv5.b"), 1);
    c.feat = nn::relu(c.z5);

    Tensor hm_pre = nn::conv2d(c.feat, params.at("head_hm.w"), params.at("head_hm.b"), 1);
    c.heatmap = nn::sigmoid(hm_pre);
    r.maps.heatmap = c.heatmap;
    r.maps.center_offset =
        nn::conv2d(c.feat, params.at("head_co.w"), params.at("head_co.b"), 1);
    r.maps.corner_offset =
        nn::conv2d(c.feat, params.at("head_cr.w"), params.at("head_cr.b"), 1);
    c.valid = true;
    return r;
}

/// Reverse pass over the fixed graph. Takes the loss gradients on the three
/// output maps and returns gradients for every parameter; the skip connection
/// sums the gradients arriving from both branches.
inline ModelParams model_backward(const Tensor& d_heatmap, const Tensor& d_center_offset,
                                  const Tensor& d_corner_offset,
                                  const ModelParams& params, const ForwardCache& cache) {
    if (!cache.valid)
        throw std::runtime_error("model_backward: cache does not match a forward call");
    if (!d_heatmap.same_shape(cache.heatmap))
        throw std::runtime_error("model_backward: heatmap grad shape mismatch");

    ModelParams grads;
    auto conv_back = [&](const char* name, const Tensor& input, const Tensor& grad_out,
                         int stride) {
        nn::ConvGrads g = nn::conv2d_backward(input, params.at(std::string(name) + ".w"),
                                              grad_out, stride);
        grads[std::string(name) + ".w"] = std::move(g.grad_kernel);
        grads[std::string(name) + ".b"] = std::move(g.grad_bias);
        return std::move(g.grad_input);
    };

    Tensor d_hm_pre = nn::sigmoid_backward(cache.heatmap, d_heatmap);
    Tensor d_feat = conv_back("head_hm", cache.feat, d_hm_pre, 1);
    {
        Tensor d_co = conv_back("head_co", cache.feat, d_center_offset, 1);
        Tensor d_cr = conv_back("head_cr", cache.feat, d_corner_offset, 1);
        for (std::size_t i = 0; i < d_feat.numel(); ++i)
            d_feat.data[i] += d_co.data[i] + d_cr.data[i];
    }

    Tensor d_z5 = nn::relu_backward(cache.z5, d_feat);
    Tensor d_merged = conv_back("conv5", cache.merged, d_z5, 1);

    Tensor d_a4 = nn::upsample2x_nearest_backward(d_merged);
    Tensor d_z4 = nn::relu_backward(cache.z4, d_a4);
    Tensor d_a3 = conv_back("conv4", cache.a3, d_z4, 2);
    for (std::size_t i = 0; i < d_a3.numel(); ++i)
        d_a3.data[i] += d_merged.data[i];  // skip branch

    Tensor d_z3 = nn::relu_backward(cache.z3, d_a3);
    Tensor d_a2 = conv_back("conv3", cache.a2, d_z3, 2);
    Tensor d_z2 = nn::relu_backward(cache.z2, d_a2);
    Tensor d_a1 = conv_back("conv2", cache.a1, d_z2, 2);
    Tensor d_z1 = nn::relu_backward(cache.z1, d_a1);
    conv_back("conv1", cache.input, d_z1, 1);

    // canonical parameter order
    ModelParams ordered;
    for (const auto& [name, value] : params.items) ordered[name] = grads.at(name);
    return ordered;
}

} // namespace spinekpt
