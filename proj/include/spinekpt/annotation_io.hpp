#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinekpt/codec.hpp"
#include "spinekpt/types.hpp"

namespace spinekpt {

/// Contents of one annotation file: the image it belongs to, its dimensions
/// and the 68 ordered landmarks. Decoded results additionally carry refined
/// centers and peak scores.
struct AnnotationFile {
    std::string image;  // relative path to the P5 PGM
    SpineAnnotation annotation;
    std::optional<std::vector<Point2>> centers;  // present for decoded results
    std::optional<std::vector<double>> scores;
};

inline void write_annotation(const AnnotationFile& file, const std::string& path) {
    nlohmann::json j;
    j["image"] = file.image;
    j["width"] = file.annotation.image_width;
    j["height"] = file.annotation.image_height;
    nlohmann::json landmarks = nlohmann::json::array();
    for (const VertebraCorners& v : file.annotation.vertebrae)
        for (int k = 0; k < kCornersPerVertebra; ++k) {
            const Point2 p = v.corner(k);
            landmarks.push_back({p.x, p.y});
        }
    j["landmarks"] = std::move(landmarks);
    if (file.centers) {
        nlohmann::json centers = nlohmann::json::array();
        for (const Point2& p : *file.centers) centers.push_back({p.x, p.y});
        j["centers"] = std::move(centers);
    }
    if (file.scores) j["scores"] = *file.scores;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_annotation: cannot open " + path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write_annotation: write failed: " + path);
}

inline AnnotationFile read_annotation(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_annotation: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_annotation: malformed JSON in " + path + ": " +
                                 e.what());
    }

    AnnotationFile file;
    try {
        file.image = j.at("image").get<std::string>();
        file.annotation.image_width = j.at("width").get<int>();
        file.annotation.image_height = j.at("height").get<int>();
        const auto& landmarks = j.at("landmarks");
        if (landmarks.size() % kCornersPerVertebra != 0)
            throw std::runtime_error("landmark count not a multiple of 4");
        for (std::size_t i = 0; i < landmarks.size(); i += kCornersPerVertebra) {
            VertebraCorners v;
            for (int k = 0; k < kCornersPerVertebra; ++k) {
                v.corner(k).x = landmarks[i + k].at(0).get<double>();
                v.corner(k).y = landmarks[i + k].at(1).get<double>();
            }
            file.annotation.vertebrae.push_back(v);
        }
        if (j.contains("centers")) {
            std::vector<Point2> centers;
            for (const auto& c : j["centers"])
                centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            file.centers = std::move(centers);
        }
        if (j.contains("scores")) file.scores = j["scores"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_annotation: bad annotation in " + path + ": " +
                                 e.what());
    }
    return file;
}

inline AnnotationFile annotation_file_from_decoded(const DecodedLandmarks& dec,
                                                   const std::string& image_path) {
    AnnotationFile file;
    file.image = image_path;
    file.annotation = dec.to_annotation();
    file.centers = dec.centers;
    file.scores = dec.scores;
    return file;
}

} // namespace spinekpt
