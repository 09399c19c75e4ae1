#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "spinekpt/model.hpp"
#include "spinekpt/tensor.hpp"

namespace spinekpt {

struct AdamState {
    double lr = 2.5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    NamedTensors m;  // first moments, parameter shapes
    NamedTensors v;  // second moments

    static AdamState for_params(const ModelParams& params, double lr = 2.5e-4) {
        AdamState s;
        s.lr = lr;
        for (const auto& [name, tensor] : params.items) {
            s.m[name] = Tensor(tensor.shape);
            s.v[name] = Tensor(tensor.shape);
        }
        return s;
    }
};

/// Bias-corrected Adam update applied in place, one step for all parameters.
inline void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (auto& [name, p] : params.items) {
        const Tensor& g = grads.at(name);
        if (!g.same_shape(p))
            throw std::invalid_argument("adam_step: grad shape mismatch for " + name);
        if (!g.all_finite())
            throw std::runtime_error("adam_step: non-finite gradient for " + name);
        Tensor& m = state.m[name];
        Tensor& v = state.v[name];
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double gi = g.data[i];
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * gi;
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * gi * gi;
            const double m_hat = m.data[i] / bc1;
            const double v_hat = v.data[i] / bc2;
            p.data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

} // namespace spinekpt
