#pragma once

#include <cstdio>
#include <string>

#include "spinekpt/annotation_io.hpp"
#include "spinekpt/types.hpp"

namespace spinekpt {

/// Renders an annotation (or a decoded result) as an SVG overlay: landmark
/// dots, vertebra outlines and, when refined centers are present, one arrow
/// from each center to each of its four corners. The raster image is
/// referenced by path, not embedded.
inline std::string render_annotation_svg(const AnnotationFile& file) {
    const SpineAnnotation& ann = file.annotation;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(ann.image_width) + "\" height=\"" +
           std::to_string(ann.image_height) + "\" viewBox=\"0 0 " +
           std::to_string(ann.image_width) + " " + std::to_string(ann.image_height) +
           "\">\n";
    svg += "  <defs>\n"
           "    <marker id=\"arrowhead\" markerWidth=\"4\" markerHeight=\"4\" "
           "refX=\"3\" refY=\"2\" orient=\"auto\">\n"
           "      <path d=\"M0,0 L4,2 L0,4 z\" fill=\"#e7a33d\"/>\n"
           "    </marker>\n"
           "  </defs>\n";
    if (!file.image.empty())
        svg += "  <image href=\"" + file.image + "\" x=\"0\" y=\"0\" width=\"" +
               std::to_string(ann.image_width) + "\" height=\"" +
               std::to_string(ann.image_height) + "\"/>\n";

    for (const VertebraCorners& v : ann.vertebrae) {
        // outline order tl -> tr -> br -> bl closes the quadrilateral
        svg += "  <polygon class=\"vertebra\" points=\"" + num(v.tl.x) + "," +
               num(v.tl.y) + " " + num(v.tr.x) + "," + num(v.tr.y) + " " +
               num(v.br.x) + "," + num(v.br.y) + " " + num(v.bl.x) + "," +
               num(v.bl.y) +
               "\" fill=\"none\" stroke=\"#4fb3ff\" stroke-width=\"0.4\"/>\n";
    }

    if (file.centers && file.centers->size() == ann.vertebrae.size()) {
        for (std::size_t i = 0; i < ann.vertebrae.size(); ++i) {
            const Point2 c = (*file.centers)[i];
            for (int k = 0; k < kCornersPerVertebra; ++k) {
                const Point2 p = ann.vertebrae[i].corner(k);
                svg += "  <line class=\"arrow\" x1=\"" + num(c.x) + "\" y1=\"" +
                       num(c.y) + "\" x2=\"" + num(p.x) + "\" y2=\"" + num(p.y) +
                       "\" stroke=\"#e7a33d\" stroke-width=\"0.3\" "
                       "marker-end=\"url(#arrowhead)\"/>\n";
            }
        }
    }

    for (const VertebraCorners& v : ann.vertebrae)
        for (int k = 0; k < kCornersPerVertebra; ++k) {
            const Point2 p = v.corner(k);
            svg += "  <circle class=\"landmark\" cx=\"" + num(p.x) + "\" cy=\"" +
                   num(p.y) + "\" r=\"0.8\" fill=\"#ffd24d\"/>\n";
        }

    svg += "</svg>\n";
    return svg;
}

} // namespace spinekpt
