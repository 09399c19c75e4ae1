#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "spinekpt/tensor.hpp"
#include "spinekpt/types.hpp"

namespace spinekpt {

/// Geometry and appearance of a generated AP-spine sample. The centerline is
/// a sum of two sinusoids; vertebrae are oriented rectangles following the
/// local tangent.
struct SpineGenConfig {
    int image_width = 64;
    int image_height = 128;
    double amp1 = 3.5;    // pixels
    double amp2 = 0.8;
    double freq1 = 0.7;   // cycles over the vertebra span
    double freq2 = 1.6;
    double phase1 = 0.4;  // radians
    double phase2 = 2.1;
    // pitch of 7.7 px keeps consecutive centers close to two output-grid
    // rows apart at n=4, which is as far as 17 vertebrae can spread on a
    // 128-pixel canvas
    double vertebra_width = 10.0;   // pixels
    double vertebra_height = 2.6;
    double vertebra_gap = 5.1;
    double background_mean = 0.12;
    double vertebra_mean = 0.78;
    double noise_std = 0.02;
    std::uint64_t seed = 0;
};

struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg)
        : std::runtime_error("generation: " + msg) {}
};

struct SpineSample {
    Tensor image;  // 1 x H x W in [0,1]
    SpineAnnotation annotation;
};

namespace detail {

struct Centerline {
    double x_mid, a1, a2, f1, f2, p1, p2;
    double x(double t) const {
        using std::numbers::pi;
        return x_mid + a1 * std::sin(2.0 * pi * f1 * t + p1) +
               a2 * std::sin(2.0 * pi * f2 * t + p2);
    }
    double dx_dt(double t) const {
        using std::numbers::pi;
        return a1 * 2.0 * pi * f1 * std::cos(2.0 * pi * f1 * t + p1) +
               a2 * 2.0 * pi * f2 * std::cos(2.0 * pi * f2 * t + p2);
    }
};

} // namespace detail

/// Builds one sample: 17 tangent-aligned rectangles on the sinusoidal
/// centerline, rendered flat with Gaussian pixel noise. Deterministic in the
/// seed; corners that would leave the canvas raise GenerationError.
inline SpineSample generate_sample(const SpineGenConfig& cfg) {
    const double vy = cfg.vertebra_height + cfg.vertebra_gap;
    const double span = (kVertebraCount - 1) * vy;
    if (span >= cfg.image_height)
        throw GenerationError("vertebra span exceeds image height");
    const double y_top = (cfg.image_height - span) / 2.0;
    if (!(cfg.vertebra_mean > cfg.background_mean))
        throw GenerationError("vertebra mean must exceed background mean");

    detail::Centerline line{cfg.image_width / 2.0, cfg.amp1, cfg.amp2,
                            cfg.freq1, cfg.freq2, cfg.phase1, cfg.phase2};

    SpineSample sample;
    sample.annotation.image_width = cfg.image_width;
    sample.annotation.image_height = cfg.image_height;

    struct Rect {
        Point2 c;
        double ux, uy;  // unit tangent, pointing down the spine
        double hw, hh;
    };
    std::vector<Rect> rects;
    for (int k = 0; k < kVertebraCount; ++k) {
        const double t = kVertebraCount == 1 ? 0.0 : double(k) / (kVertebraCount - 1);
        const Point2 c{line.x(t), y_top + k * vy};
        const double dx = line.dx_dt(t);
        const double dy = span > 0.0 ? span : 1.0;  // dy/dt over t in [0,1]
        const double norm = std::hypot(dx, dy);
        const double ux = dx / norm, uy = dy / norm;
        // left-to-right axis is the tangent rotated a quarter turn
        const double rx = uy, ry = -ux;
        const double hw = cfg.vertebra_width / 2.0;
        const double hh = cfg.vertebra_height / 2.0;

        VertebraCorners v;
        v.tl = {c.x - hw * rx - hh * ux, c.y - hw * ry - hh * uy};
        v.tr = {c.x + hw * rx - hh * ux, c.y + hw * ry - hh * uy};
        v.bl = {c.x - hw * rx + hh * ux, c.y - hw * ry + hh * uy};
        v.br = {c.x + hw * rx + hh * ux, c.y + hw * ry + hh * uy};
        for (int i = 0; i < kCornersPerVertebra; ++i) {
            const Point2 p = v.corner(i);
            if (p.x < 0.0 || p.x >= cfg.image_width || p.y < 0.0 ||
                p.y >= cfg.image_height)
                throw GenerationError("vertebra " + std::to_string(k) +
                                      " corner out of bounds; reduce amplitudes");
        }
        sample.annotation.vertebrae.push_back(v);
        rects.push_back({c, ux, uy, hw, hh});
    }

    const std::size_t h = static_cast<std::size_t>(cfg.image_height);
    const std::size_t w = static_cast<std::size_t>(cfg.image_width);
    sample.image = Tensor({1, h, w}, cfg.background_mean);
    for (const Rect& r : rects) {
        // bounding box of the oriented rectangle, pixel centers at integers
        const double reach = r.hw + r.hh + 1.0;
        const int y0 = std::max(0, static_cast<int>(std::floor(r.c.y - reach)));
        const int y1 = std::min(cfg.image_height - 1,
                                static_cast<int>(std::ceil(r.c.y + reach)));
        const int x0 = std::max(0, static_cast<int>(std::floor(r.c.x - reach)));
        const int x1 = std::min(cfg.image_width - 1,
                                static_cast<int>(std::ceil(r.c.x + reach)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double px = x - r.c.x, py = y - r.c.y;
                const double along = px * r.ux + py * r.uy;
                const double across = px * r.uy - py * r.ux;
                if (std::abs(along) <= r.hh && std::abs(across) <= r.hw)
                    sample.image.at3(0, y, x) = cfg.vertebra_mean;
            }
        }
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : sample.image.data) {
        if (cfg.noise_std > 0.0) v += noise(rng);
        v = std::min(std::max(v, 0.0), 1.0);
    }
    return sample;
}

/// Photometric and geometric training augmentations.
struct AugmentConfig {
    double max_pad_fraction = 0.10;      // expand: total padding per axis
    double min_crop_fraction = 0.85;     // crop: minimum retained per axis
    double brightness_delta = 0.08;      // +- range
    double contrast_low = 0.85;
    double contrast_high = 1.15;
    double pad_value = 0.12;             // background fill for expansion
    int max_crop_attempts = 50;
    std::uint64_t seed = 0;
};

struct AugmentedSample {
    Tensor image;
    SpineAnnotation annotation;
    bool geometry_skipped = false;  // crop retries exhausted; photometric only
};

namespace detail {

inline Tensor resize_nearest(const Tensor& img, std::size_t out_h, std::size_t out_w) {
    const std::size_t in_h = img.dim(1), in_w = img.dim(2);
    Tensor out({1, out_h, out_w});
    const double sy = static_cast<double>(in_h) / out_h;
    const double sx = static_cast<double>(in_w) / out_w;
    for (std::size_t y = 0; y < out_h; ++y) {
        const std::size_t iy = std::min(in_h - 1, static_cast<std::size_t>(y * sy));
        for (std::size_t x = 0; x < out_w; ++x) {
            const std::size_t ix = std::min(in_w - 1, static_cast<std::size_t>(x * sx));
            out.at3(0, y, x) = img.at3(0, iy, ix);
        }
    }
    return out;
}

} // namespace detail

/// Applies expand, crop, contrast and brightness in that order, then resizes
/// back to the input dimensions with matching landmark scaling. The crop is
/// resampled until all 68 landmarks survive; if attempts run out the
/// geometric steps are skipped and only photometric changes apply.
inline AugmentedSample augment(const Tensor& image, const SpineAnnotation& ann,
                               const AugmentConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int orig_w = ann.image_width;
    const int orig_h = ann.image_height;

    AugmentedSample out;
    out.image = image;
    out.annotation = ann;

    // expand: pad with background, split between the two sides
    {
        const double fx = unit(rng) * cfg.max_pad_fraction;
        const double fy = unit(rng) * cfg.max_pad_fraction;
        const int pad_x = static_cast<int>(std::lround(fx * orig_w));
        const int pad_y = static_cast<int>(std::lround(fy * orig_h));
        const int left = static_cast<int>(std::lround(unit(rng) * pad_x));
        const int top = static_cast<int>(std::lround(unit(rng) * pad_y));
        if (pad_x > 0 || pad_y > 0) {
            const std::size_t nw = static_cast<std::size_t>(orig_w + pad_x);
            const std::size_t nh = static_cast<std::size_t>(orig_h + pad_y);
            Tensor padded({1, nh, nw}, cfg.pad_value);
            for (int y = 0; y < orig_h; ++y)
                for (int x = 0; x < orig_w; ++x)
                    padded.at3(0, y + top, x + left) = out.image.at3(0, y, x);
            out.image = std::move(padded);
            for (VertebraCorners& v : out.annotation.vertebrae)
                for (int k = 0; k < kCornersPerVertebra; ++k) {
                    v.corner(k).x += left;
                    v.corner(k).y += top;
                }
            out.annotation.image_width = static_cast<int>(nw);
            out.annotation.image_height = static_cast<int>(nh);
        }
    }

    // crop: retain a random window holding every landmark
    {
        const int cur_w = out.annotation.image_width;
        const int cur_h = out.annotation.image_height;
        bool done = false;
        for (int attempt = 0; attempt < cfg.max_crop_attempts && !done; ++attempt) {
            const double rx = cfg.min_crop_fraction + unit(rng) * (1.0 - cfg.min_crop_fraction);
            const double ry = cfg.min_crop_fraction + unit(rng) * (1.0 - cfg.min_crop_fraction);
            const int cw = std::min(cur_w, std::max(1, static_cast<int>(std::lround(rx * cur_w))));
            const int ch = std::min(cur_h, std::max(1, static_cast<int>(std::lround(ry * cur_h))));
            const int x0 = static_cast<int>(std::lround(unit(rng) * (cur_w - cw)));
            const int y0 = static_cast<int>(std::lround(unit(rng) * (cur_h - ch)));

            bool keeps_all = true;
            for (const VertebraCorners& v : out.annotation.vertebrae)
                for (int k = 0; k < kCornersPerVertebra && keeps_all; ++k) {
                    const Point2 p = v.corner(k);
                    if (p.x < x0 || p.x >= x0 + cw || p.y < y0 || p.y >= y0 + ch)
                        keeps_all = false;
                }
            if (!keeps_all) continue;

            Tensor cropped({1, static_cast<std::size_t>(ch), static_cast<std::size_t>(cw)});
            for (int y = 0; y < ch; ++y)
                for (int x = 0; x < cw; ++x)
                    cropped.at3(0, y, x) = out.image.at3(0, y + y0, x + x0);
            out.image = std::move(cropped);
            for (VertebraCorners& v : out.annotation.vertebrae)
                for (int k = 0; k < kCornersPerVertebra; ++k) {
                    v.corner(k).x -= x0;
                    v.corner(k).y -= y0;
                }
            out.annotation.image_width = cw;
            out.annotation.image_height = ch;
            done = true;
        }
        if (!done) {
            // geometric identity; photometric steps still run below
            out.image = image;
            out.annotation = ann;
            out.geometry_skipped = true;
        }
    }

    // contrast about the current image mean, then brightness
    {
        const double factor = cfg.contrast_low + unit(rng) * (cfg.contrast_high - cfg.contrast_low);
        const double delta = (2.0 * unit(rng) - 1.0) * cfg.brightness_delta;
        if (factor != 1.0 || delta != 0.0) {
            double mean = 0.0;
            for (double v : out.image.data) mean += v;
            mean /= static_cast<double>(out.image.numel());
            for (double& v : out.image.data) {
                v = mean + factor * (v - mean) + delta;
                v = std::min(std::max(v, 0.0), 1.0);
            }
        }
    }

    // restore original dimensions
    if (out.annotation.image_width != orig_w || out.annotation.image_height != orig_h) {
        const double sx = static_cast<double>(orig_w) / out.annotation.image_width;
        const double sy = static_cast<double>(orig_h) / out.annotation.image_height;
        out.image = detail::resize_nearest(out.image, static_cast<std::size_t>(orig_h),
                                           static_cast<std::size_t>(orig_w));
        for (VertebraCorners& v : out.annotation.vertebrae)
            for (int k = 0; k < kCornersPerVertebra; ++k) {
                v.corner(k).x *= sx;
                v.corner(k).y *= sy;
            }
        out.annotation.image_width = orig_w;
        out.annotation.image_height = orig_h;
    }
    return out;
}

} // namespace spinekpt
