#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinekpt/tensor.hpp"
#include "spinekpt/types.hpp"

namespace spinekpt {

/// Geometry and decoding knobs shared by target encoding and landmark decoding.
struct CodecConfig {
    int n = 4;              // downsampling factor, input px per grid cell
    int out_height = 0;     // input height / n
    int out_width = 0;      // input width / n
    double min_overlap = 0.7;
    double sigma_floor = 1.0;  // minimum Gaussian sigma, grid cells
    int topk = kVertebraCount;
    double score_threshold = 0.0;  // peaks must exceed this; 0 = fixed-K decoding
};

inline CodecConfig make_codec_config(int image_width, int image_height, int n = 4) {
    if (n <= 0) throw std::invalid_argument("codec: n must be positive");
    if (image_width % n != 0 || image_height % n != 0)
        throw std::invalid_argument("codec: image dims must be divisible by n");
    CodecConfig cfg;
    cfg.n = n;
    cfg.out_width = image_width / n;
    cfg.out_height = image_height / n;
    return cfg;
}

/// Training targets at output resolution.
struct TargetMaps {
    Tensor heatmap;        // 1 x H x W, in [0,1], exactly 1.0 at center cells
    Tensor center_offset;  // 2 x H x W, (x than y) sub-cell remainders
    Tensor corner_offset;  // 8 x H x W, (tl.x,tl.y,tr.x,tr.y,bl.x,bl.y,br.x,br.y)
    Tensor center_mask;    // 1 x H x W, 1.0 at center cells
};

/// Network outputs at output resolution; heatmap is post-sigmoid.
struct PredictionMaps {
    Tensor heatmap;        // 1 x H x W
    Tensor center_offset;  // 2 x H x W
    Tensor corner_offset;  // 8 x H x W
};

/// Two vertebrae landed on the same output cell; the caller must regenerate
/// or rescale the sample.
struct EncodingCollisionError : std::runtime_error {
    int first_index;
    int second_index;
    EncodingCollisionError(int a, int b)
        : std::runtime_error("encoding collision: vertebrae " + std::to_string(a) +
                             " and " + std::to_string(b) +
                             " map to the same center cell"),
          first_index(a), second_index(b) {}
};

/// Largest corner shift r (grid cells) that keeps IoU >= min_overlap for the
/// three quadratic overlap cases of same-size translation, shrinking and
/// growing a box. Clamped below at 0.
inline double gaussian_radius(double box_height, double box_width, double min_overlap) {
    if (box_height <= 0.0 || box_width <= 0.0)
        throw std::invalid_argument("gaussian_radius: box dims must be positive");
    if (!(min_overlap > 0.0 && min_overlap < 1.0))
        throw std::invalid_argument("gaussian_radius: min_overlap must be in (0,1)");
    const double h = box_height, w = box_width, o = min_overlap;

    // translated equal box: overlap (h-r)(w-r), union 2wh - overlap
    const double b1 = h + w;
    const double c1 = w * h * (1.0 - o) / (1.0 + o);
    const double r1 = (b1 - std::sqrt(std::max(b1 * b1 - 4.0 * c1, 0.0))) / 2.0;

    // shrunk box: overlap (h-2r)(w-2r), union wh
    const double b2 = 2.0 * (h + w);
    const double c2 = (1.0 - o) * w * h;
    const double r2 = (b2 - std::sqrt(std::max(b2 * b2 - 16.0 * c2, 0.0))) / 8.0;

    // grown box: overlap wh, union (h+2r)(w+2r)
    const double b3 = -2.0 * o * (h + w);
    const double c3 = (o - 1.0) * w * h;
    const double r3 = (b3 + std::sqrt(std::max(b3 * b3 - 16.0 * o * c3, 0.0))) / (8.0 * o);

    return std::max(0.0, std::min({r1, r2, r3}));
}

namespace detail {

inline void splat_gaussian(Tensor& heatmap, int cx, int cy, double sigma) {
    const int h = static_cast<int>(heatmap.dim(1));
    const int w = static_cast<int>(heatmap.dim(2));
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const double denom = 2.0 * sigma * sigma;
    for (int dy = -radius; dy <= radius; ++dy) {
        const int y = cy + dy;
        if (y < 0 || y >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx;
            if (x < 0 || x >= w) continue;
            const double g = std::exp(-(double(dx) * dx + double(dy) * dy) / denom);
            double& cell = heatmap.at3(0, y, x);
            cell = std::max(cell, g);
        }
    }
}

} // namespace detail

/// Encodes an annotation into heatmap, center-offset, corner-offset and
/// center-mask maps at output resolution.
inline TargetMaps encode_targets(const SpineAnnotation& ann, const CodecConfig& cfg) {
    if (ann.image_width != cfg.out_width * cfg.n ||
        ann.image_height != cfg.out_height * cfg.n)
        throw std::invalid_argument("encode_targets: annotation dims inconsistent with config");

    const std::size_t h = static_cast<std::size_t>(cfg.out_height);
    const std::size_t w = static_cast<std::size_t>(cfg.out_width);
    TargetMaps maps;
    maps.heatmap = Tensor({1, h, w});
    maps.center_offset = Tensor({2, h, w});
    maps.corner_offset = Tensor({8, h, w});
    maps.center_mask = Tensor({1, h, w});

    std::vector<int> cell_owner(h * w, -1);
    const double n = static_cast<double>(cfg.n);

    for (int vi = 0; vi < static_cast<int>(ann.vertebrae.size()); ++vi) {
        const VertebraCorners& v = ann.vertebrae[vi];
        const Point2 c = center_of(v);
        const int cx = static_cast<int>(std::floor(c.x / n));
        const int cy = static_cast<int>(std::floor(c.y / n));
        if (cx < 0 || cx >= cfg.out_width || cy < 0 || cy >= cfg.out_height)
            throw std::invalid_argument("encode_targets: center cell out of grid for vertebra " +
                                        std::to_string(vi));
        int& owner = cell_owner[static_cast<std::size_t>(cy) * w + cx];
        if (owner >= 0) throw EncodingCollisionError(owner, vi);
        owner = vi;

        double min_x = v.tl.x, max_x = v.tl.x, min_y = v.tl.y, max_y = v.tl.y;
        for (int k = 1; k < kCornersPerVertebra; ++k) {
            Point2 p = v.corner(k);
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        const double box_w = (max_x - min_x) / n;
        const double box_h = (max_y - min_y) / n;
        const double radius = gaussian_radius(box_h, box_w, cfg.min_overlap);
        const double sigma = std::max(cfg.sigma_floor, radius / 3.0);

        detail::splat_gaussian(maps.heatmap, cx, cy, sigma);
        maps.heatmap.at3(0, cy, cx) = 1.0;
        maps.center_mask.at3(0, cy, cx) = 1.0;
        maps.center_offset.at3(0, cy, cx) = c.x / n - cx;
        maps.center_offset.at3(1, cy, cx) = c.y / n - cy;
        for (int k = 0; k < kCornersPerVertebra; ++k) {
            const Point2 p = v.corner(k);
            maps.corner_offset.at3(2 * k + 0, cy, cx) = (p.x - c.x) / n;
            maps.corner_offset.at3(2 * k + 1, cy, cx) = (p.y - c.y) / n;
        }
    }
    return maps;
}

/// 3x3 non-maximum suppression followed by top-k selection. A cell qualifies
/// iff it strictly exceeds score_threshold and equals its neighborhood
/// maximum, with equal-valued neighbors resolved toward the smaller
/// row-major index. Peaks come back sorted by score descending.
inline std::vector<GridPeak> extract_peaks(const Tensor& heatmap, const CodecConfig& cfg) {
    if (heatmap.shape.size() != 3 || heatmap.dim(0) != 1)
        throw std::invalid_argument("extract_peaks: heatmap must be 1xHxW");
    if (cfg.topk < 1) throw std::invalid_argument("extract_peaks: topk must be >= 1");
    if (!heatmap.all_finite())
        throw std::invalid_argument("extract_peaks: heatmap has non-finite values");

    const int h = static_cast<int>(heatmap.dim(1));
    const int w = static_cast<int>(heatmap.dim(2));
    std::vector<GridPeak> peaks;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = heatmap.at3(0, y, x);
            if (!(v > cfg.score_threshold)) continue;
            const long idx = static_cast<long>(y) * w + x;
            bool is_peak = true;
            for (int dy = -1; dy <= 1 && is_peak; ++dy) {
                for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    const double nv = heatmap.at3(0, ny, nx);
                    if (nv > v) is_peak = false;
                    else if (nv == v && static_cast<long>(ny) * w + nx < idx) is_peak = false;
                }
            }
            if (is_peak) peaks.push_back({x, y, v});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [w](const GridPeak& a, const GridPeak& b) {
        if (a.score != b.score) return a.score > b.score;
        return static_cast<long>(a.cy) * w + a.cx < static_cast<long>(b.cy) * w + b.cx;
    });
    if (static_cast<int>(peaks.size()) > cfg.topk) peaks.resize(cfg.topk);
    return peaks;
}

/// Landmarks decoded from prediction maps. Holds fewer than 17 vertebrae when
/// fewer peaks qualified (the skipped-vertebra failure mode); peaks_found
/// carries the count.
struct DecodedLandmarks {
    int image_width = 0;
    int image_height = 0;
    std::vector<VertebraCorners> vertebrae;  // ordered by refined center y
    std::vector<Point2> centers;             // refined centers, input pixels
    std::vector<double> scores;              // peak scores, same order
    int peaks_found = 0;

    bool complete() const { return peaks_found >= kVertebraCount; }

    SpineAnnotation to_annotation() const {
        SpineAnnotation ann;
        ann.image_width = image_width;
        ann.image_height = image_height;
        ann.vertebrae = vertebrae;
        return ann;
    }
};

/// Recovers ordered landmarks from prediction maps: peak cells refined by the
/// center offset, corners traced from the refined center via the corner
/// offsets, vertebrae sorted top to bottom by refined center y.
inline DecodedLandmarks decode_landmarks(const PredictionMaps& pred, const CodecConfig& cfg) {
    const std::size_t h = static_cast<std::size_t>(cfg.out_height);
    const std::size_t w = static_cast<std::size_t>(cfg.out_width);
    if (pred.heatmap.shape != std::vector<std::size_t>{1, h, w} ||
        pred.center_offset.shape != std::vector<std::size_t>{2, h, w} ||
        pred.corner_offset.shape != std::vector<std::size_t>{8, h, w})
        throw std::invalid_argument("decode_landmarks: map shapes inconsistent with config");

    std::vector<GridPeak> peaks = extract_peaks(pred.heatmap, cfg);

    struct Refined {
        double x, y, score;
        long cell;
        VertebraCorners corners;
    };
    std::vector<Refined> refined;
    refined.reserve(peaks.size());
    const double n = static_cast<double>(cfg.n);
    for (const GridPeak& p : peaks) {
        const double fx = p.cx + pred.center_offset.at3(0, p.cy, p.cx);
        const double fy = p.cy + pred.center_offset.at3(1, p.cy, p.cx);
        Refined r;
        r.x = fx * n;
        r.y = fy * n;
        r.score = p.score;
        r.cell = static_cast<long>(p.cy) * static_cast<long>(w) + p.cx;
        for (int k = 0; k < kCornersPerVertebra; ++k) {
            r.corners.corner(k) = {
                (fx + pred.corner_offset.at3(2 * k + 0, p.cy, p.cx)) * n,
                (fy + pred.corner_offset.at3(2 * k + 1, p.cy, p.cx)) * n};
        }
        refined.push_back(r);
    }
    std::sort(refined.begin(), refined.end(), [](const Refined& a, const Refined& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.cell < b.cell;
    });

    DecodedLandmarks out;
    out.image_width = cfg.out_width * cfg.n;
    out.image_height = cfg.out_height * cfg.n;
    out.peaks_found = static_cast<int>(refined.size());
    for (const Refined& r : refined) {
        out.vertebrae.push_back(r.corners);
        out.centers.push_back({r.x, r.y});
        out.scores.push_back(r.score);
    }
    return out;
}

} // namespace spinekpt
