#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinekpt {

/// Dense row-major array of doubles. Feature maps use channels x height x width;
/// conv kernels use out x in x kh x kw.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(count(shape), 0.0) {}
    Tensor(std::vector<std::size_t> s, double fill)
        : shape(std::move(s)), data(count(shape), fill) {}

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double& at3(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    double at3(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    double& at4(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
        return data[((o * shape[1] + i) * shape[2] + ky) * shape[3] + kx];
    }
    double at4(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return data[((o * shape[1] + i) * shape[2] + ky) * shape[3] + kx];
    }

    double* plane(std::size_t c) { return data.data() + c * shape[1] * shape[2]; }
    const double* plane(std::size_t c) const { return data.data() + c * shape[1] * shape[2]; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

} // namespace spinekpt
