#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace spinekpt {

constexpr int kVertebraCount = 17;
constexpr int kCornersPerVertebra = 4;
constexpr int kLandmarkCount = kVertebraCount * kCornersPerVertebra;

/// Continuous position in input-image pixels. x grows rightward (columns),
/// y grows downward (rows); pixel centers sit at integer coordinates.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }

/// The four corner landmarks of one vertebra body, in the fixed order
/// top-left, top-right, bottom-left, bottom-right.
struct VertebraCorners {
    Point2 tl, tr, bl, br;

    Point2 corner(int i) const {
        switch (i) {
            case 0: return tl;
            case 1: return tr;
            case 2: return bl;
            default: return br;
        }
    }
    Point2& corner(int i) {
        switch (i) {
            case 0: return tl;
            case 1: return tr;
            case 2: return bl;
            default: return br;
        }
    }
};

/// Ground truth for one image: 17 vertebrae ordered top to bottom,
/// 68 landmarks total.
struct SpineAnnotation {
    int image_width = 0;
    int image_height = 0;
    std::vector<VertebraCorners> vertebrae;
};

/// Integer cell on the output grid plus its heatmap score.
struct GridPeak {
    int cx = 0;
    int cy = 0;
    double score = 0.0;
};

/// Vertebra center, defined as the arithmetic mean of the 4 corners.
inline Point2 center_of(const VertebraCorners& c) {
    return {(c.tl.x + c.tr.x + c.bl.x + c.br.x) / 4.0,
            (c.tl.y + c.tr.y + c.bl.y + c.br.y) / 4.0};
}

/// Checks every annotation invariant. Returns one human-readable line per
/// violation; an empty list means the annotation is well formed.
inline std::vector<std::string> validate_annotation(const SpineAnnotation& ann) {
    std::vector<std::string> out;
    const int n = static_cast<int>(ann.vertebrae.size());
    if (n != kVertebraCount)
        out.push_back("vertebra count " + std::to_string(n) + " != " +
                      std::to_string(kVertebraCount));

    auto in_bounds = [&](Point2 p) {
        return p.x >= 0.0 && p.x < ann.image_width && p.y >= 0.0 &&
               p.y < ann.image_height;
    };

    for (int i = 0; i < n; ++i) {
        const VertebraCorners& v = ann.vertebrae[i];
        const std::string tag = "vertebra " + std::to_string(i);
        bool finite = true;
        for (int k = 0; k < kCornersPerVertebra; ++k) {
            Point2 p = v.corner(k);
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) finite = false;
        }
        if (!finite) {
            out.push_back(tag + " has non-finite coordinates");
            continue;
        }
        if (!(v.tl.x < v.tr.x))
            out.push_back(tag + " top corners not ordered left to right");
        if (!(v.bl.x < v.br.x))
            out.push_back(tag + " bottom corners not ordered left to right");
        if (!((v.tl.y + v.tr.y) / 2.0 < (v.bl.y + v.br.y) / 2.0))
            out.push_back(tag + " top edge not above bottom edge");
        for (int k = 0; k < kCornersPerVertebra; ++k)
            if (!in_bounds(v.corner(k))) {
                out.push_back(tag + " landmark out of bounds");
                break;
            }
    }

    for (int i = 0; i + 1 < n; ++i) {
        double y0 = center_of(ann.vertebrae[i]).y;
        double y1 = center_of(ann.vertebrae[i + 1]).y;
        if (std::isfinite(y0) && std::isfinite(y1) && !(y1 > y0))
            out.push_back("center y not increasing at index " + std::to_string(i));
    }
    return out;
}

} // namespace spinekpt
