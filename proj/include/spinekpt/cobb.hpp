#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinekpt/types.hpp"

namespace spinekpt {

/// PT/MT/TL Cobb angles in degrees plus the vertebra indices that produced
/// them. MT comes from the most mutually tilted pair; PT and TL extend from
/// that pair toward the ends of the spine.
struct CobbResult {
    double pt_deg = 0.0;
    double mt_deg = 0.0;
    double tl_deg = 0.0;
    int mt_upper = 0;   // upper vertebra of the MT pair
    int mt_lower = 0;   // lower vertebra of the MT pair
    int pt_partner = 0; // vertebra paired with mt_upper, pt_partner <= mt_upper
    int tl_partner = 0; // vertebra paired with mt_lower, tl_partner >= mt_lower
};

struct DegenerateVertebraError : std::runtime_error {
    int index;
    explicit DegenerateVertebraError(int i)
        : std::runtime_error("degenerate vertebra " + std::to_string(i) +
                             ": coincident edge midpoints"),
          index(i) {}
};

/// Unit left-to-right axis of a vertebra: the normalized vector from the
/// midpoint of its left corners to the midpoint of its right corners.
inline std::array<double, 2> vertebra_direction(const VertebraCorners& v, int index = -1) {
    const double mx_r = (v.tr.x + v.br.x) / 2.0;
    const double my_r = (v.tr.y + v.br.y) / 2.0;
    const double mx_l = (v.tl.x + v.bl.x) / 2.0;
    const double my_l = (v.tl.y + v.bl.y) / 2.0;
    const double dx = mx_r - mx_l;
    const double dy = my_r - my_l;
    const double norm = std::hypot(dx, dy);
    if (norm == 0.0) throw DegenerateVertebraError(index);
    return {dx / norm, dy / norm};
}

/// Undirected angle between two unit vectors, in degrees within [0, 90].
inline double angle_between(const std::array<double, 2>& d1,
                            const std::array<double, 2>& d2) {
    const double n1 = std::hypot(d1[0], d1[1]);
    const double n2 = std::hypot(d2[0], d2[1]);
    if (std::abs(n1 - 1.0) > 1e-9 || std::abs(n2 - 1.0) > 1e-9)
        throw std::invalid_argument("angle_between: inputs must be unit vectors");
    const double dot = std::abs(d1[0] * d2[0] + d1[1] * d2[1]);
    return std::acos(std::min(dot, 1.0)) * 180.0 / std::numbers::pi;
}

/// MT is the maximum pairwise angle over all vertebra pairs (i < j, ties
/// toward the smaller indices). PT maximizes against the MT upper vertebra
/// over indices at or above it; TL symmetrically below the MT lower vertebra.
inline CobbResult cobb_angles(const SpineAnnotation& ann) {
    const int n = static_cast<int>(ann.vertebrae.size());
    if (n < 2) throw std::invalid_argument("cobb_angles: need at least 2 vertebrae");

    std::vector<std::array<double, 2>> dirs(n);
    for (int i = 0; i < n; ++i) dirs[i] = vertebra_direction(ann.vertebrae[i], i);

    CobbResult r;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double a = angle_between(dirs[i], dirs[j]);
            if (a > best) {
                best = a;
                r.mt_upper = i;
                r.mt_lower = j;
            }
        }
    }
    r.mt_deg = best;

    // the self pair contributes exactly zero; acos of a rounded unit norm
    // would otherwise leak ~1e-7 degrees
    double best_pt = -1.0;
    for (int k = 0; k <= r.mt_upper; ++k) {
        const double a =
            k == r.mt_upper ? 0.0 : angle_between(dirs[k], dirs[r.mt_upper]);
        if (a > best_pt) {
            best_pt = a;
            r.pt_partner = k;
        }
    }
    r.pt_deg = best_pt;

    double best_tl = -1.0;
    for (int k = r.mt_lower; k < n; ++k) {
        const double a =
            k == r.mt_lower ? 0.0 : angle_between(dirs[k], dirs[r.mt_lower]);
        if (a > best_tl) {
            best_tl = a;
            r.tl_partner = k;
        }
    }
    r.tl_deg = best_tl;
    return r;
}

} // namespace spinekpt
