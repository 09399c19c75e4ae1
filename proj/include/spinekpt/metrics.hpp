#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinekpt/types.hpp"

namespace spinekpt {

/// The three regional Cobb angles of one image, degrees.
struct AngleTriple {
    double pt = 0.0;
    double mt = 0.0;
    double tl = 0.0;

    double component(int i) const { return i == 0 ? pt : (i == 1 ? mt : tl); }
};

struct UndefinedImageError : std::runtime_error {
    int index;
    explicit UndefinedImageError(int i)
        : std::runtime_error("smape undefined for image " + std::to_string(i) +
                             ": zero angle-sum denominator"),
          index(i) {}
};

/// Symmetric mean absolute percentage error over the three regional angles,
/// averaged across images and reported in percent.
inline double smape(const std::vector<AngleTriple>& estimates,
                    const std::vector<AngleTriple>& truths) {
    if (estimates.empty() || estimates.size() != truths.size())
        throw std::invalid_argument("smape: inputs must be equal-length and nonempty");
    double acc = 0.0;
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 3; ++i) {
            num += std::abs(estimates[j].component(i) - truths[j].component(i));
            den += estimates[j].component(i) + truths[j].component(i);
        }
        if (den <= 0.0) throw UndefinedImageError(static_cast<int>(j));
        acc += num / den;
    }
    return 100.0 * acc / static_cast<double>(estimates.size());
}

/// SMAPE restricted to one regional angle (0 = PT, 1 = MT, 2 = TL). Images
/// where both angles are zero contribute zero error.
inline double smape_region(const std::vector<AngleTriple>& estimates,
                           const std::vector<AngleTriple>& truths, int region) {
    if (estimates.empty() || estimates.size() != truths.size())
        throw std::invalid_argument("smape_region: inputs must be equal-length and nonempty");
    if (region < 0 || region > 2)
        throw std::invalid_argument("smape_region: region must be 0, 1 or 2");
    double acc = 0.0;
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        const double a = estimates[j].component(region);
        const double b = truths[j].component(region);
        const double den = a + b;
        if (den > 0.0) acc += std::abs(a - b) / den;
    }
    return 100.0 * acc / static_cast<double>(estimates.size());
}

/// Mean Euclidean distance between detected and ground-truth landmarks,
/// matched by index, in input pixels.
inline double error_dec(const std::vector<Point2>& detected,
                        const std::vector<Point2>& truth) {
    if (detected.size() != truth.size())
        throw std::invalid_argument("error_dec: length mismatch");
    if (detected.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < detected.size(); ++i)
        acc += std::hypot(detected[i].x - truth[i].x, detected[i].y - truth[i].y);
    return acc / static_cast<double>(detected.size());
}

/// Flattens an annotation into the fixed 68-landmark order.
inline std::vector<Point2> landmarks_of(const SpineAnnotation& ann) {
    std::vector<Point2> out;
    out.reserve(ann.vertebrae.size() * kCornersPerVertebra);
    for (const VertebraCorners& v : ann.vertebrae)
        for (int k = 0; k < kCornersPerVertebra; ++k) out.push_back(v.corner(k));
    return out;
}

} // namespace spinekpt
