#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "spinekpt/annotation_io.hpp"
#include "spinekpt/checkpoint.hpp"
#include "spinekpt/cobb.hpp"
#include "spinekpt/codec.hpp"
#include "spinekpt/dataset.hpp"
#include "spinekpt/metrics.hpp"
#include "spinekpt/model.hpp"

namespace spinekpt {

enum class EvalMode {
    model,      // decode network predictions from a checkpoint
    oracle,     // ground truth against itself; all metrics must be zero
    roundtrip,  // decode re-encoded ground truth; isolates the codec
};

struct PerImageAngles {
    std::string image;
    AngleTriple estimate;
    AngleTriple truth;
};

struct EvalResult {
    std::vector<PerImageAngles> per_image;
    double smape_all = 0.0;
    double smape_pt = 0.0;
    double smape_mt = 0.0;
    double smape_tl = 0.0;
    double error_dec = 0.0;
    std::string report;  // line-oriented text table
};

namespace detail {

inline AngleTriple angles_of(const SpineAnnotation& ann) {
    const CobbResult c = cobb_angles(ann);
    return {c.pt_deg, c.mt_deg, c.tl_deg};
}

inline PredictionMaps prediction_from_targets(const TargetMaps& t) {
    return {t.heatmap, t.center_offset, t.corner_offset};
}

} // namespace detail

/// Evaluates one split: decodes every image, compares Cobb angles and
/// landmark positions against ground truth, renders the report table and
/// optionally writes the decoded annotations to out_dir.
inline EvalResult evaluate_samples(const std::vector<DatasetSample>& samples,
                                   EvalMode mode, const ModelCheckpoint* ckpt,
                                   const std::string& out_dir = "") {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty split");
    if (mode == EvalMode::model) {
        if (ckpt == nullptr) throw std::invalid_argument("evaluate: model mode needs a checkpoint");
        validate_model_params(ckpt->params);
    }

    EvalResult result;
    std::vector<Point2> all_detected, all_truth;
    std::vector<AngleTriple> est_angles, truth_angles;

    for (const DatasetSample& s : samples) {
        SpineAnnotation decoded;
        std::vector<Point2> centers;
        std::vector<double> scores;

        if (mode == EvalMode::oracle) {
            decoded = s.annotation;
        } else {
            CodecConfig codec;
            if (mode == EvalMode::model) {
                if (s.annotation.image_width % ckpt->codec.n != 0 ||
                    s.annotation.image_height % ckpt->codec.n != 0)
                    throw std::runtime_error(
                        "evaluate: image dims of " + s.image_name +
                        " are not divisible by the checkpoint downsampling factor " +
                        std::to_string(ckpt->codec.n));
                codec = make_codec_config(s.annotation.image_width,
                                          s.annotation.image_height, ckpt->codec.n);
                codec.min_overlap = ckpt->codec.min_overlap;
                codec.sigma_floor = ckpt->codec.sigma_floor;
                codec.topk = ckpt->codec.topk;
                codec.score_threshold = ckpt->codec.score_threshold;
            } else {
                codec = make_codec_config(s.annotation.image_width,
                                          s.annotation.image_height);
            }

            DecodedLandmarks dec;
            if (mode == EvalMode::model) {
                if (s.image.dim(1) % 8 != 0 || s.image.dim(2) % 8 != 0)
                    throw std::runtime_error("evaluate: image dims of " + s.image_name +
                                             " are not divisible by the model stride");
                const ForwardResult fwd = model_forward(s.image, ckpt->params);
                dec = decode_landmarks(fwd.maps, codec);
            } else {
                const TargetMaps targets = encode_targets(s.annotation, codec);
                dec = decode_landmarks(detail::prediction_from_targets(targets), codec);
            }
            if (!dec.complete())
                throw std::runtime_error("evaluate: only " + std::to_string(dec.peaks_found) +
                                         " of 17 vertebrae decoded for " + s.image_name);
            decoded = dec.to_annotation();
            centers = dec.centers;
            scores = dec.scores;

            if (!out_dir.empty()) {
                namespace fs = std::filesystem;
                fs::create_directories(out_dir);
                AnnotationFile file;
                file.image = s.image_name;
                file.annotation = decoded;
                file.centers = centers;
                file.scores = scores;
                const std::string stem = fs::path(s.image_name).stem().string();
                write_annotation(file, (fs::path(out_dir) / (stem + ".decoded.json")).string());
            }
        }

        const std::vector<Point2> det = landmarks_of(decoded);
        const std::vector<Point2> gt = landmarks_of(s.annotation);
        all_detected.insert(all_detected.end(), det.begin(), det.end());
        all_truth.insert(all_truth.end(), gt.begin(), gt.end());

        PerImageAngles row;
        row.image = s.image_name;
        row.estimate = detail::angles_of(decoded);
        row.truth = detail::angles_of(s.annotation);
        est_angles.push_back(row.estimate);
        truth_angles.push_back(row.truth);
        result.per_image.push_back(std::move(row));
    }

    result.error_dec = error_dec(all_detected, all_truth);
    result.smape_all = smape(est_angles, truth_angles);
    result.smape_pt = smape_region(est_angles, truth_angles, 0);
    result.smape_mt = smape_region(est_angles, truth_angles, 1);
    result.smape_tl = smape_region(est_angles, truth_angles, 2);

    std::string report = "image pt_est pt_true mt_est mt_true tl_est tl_true\n";
    char line[256];
    for (const PerImageAngles& row : result.per_image) {
        std::snprintf(line, sizeof(line), "%s %.4f %.4f %.4f %.4f %.4f %.4f\n",
                      row.image.c_str(), row.estimate.pt, row.truth.pt, row.estimate.mt,
                      row.truth.mt, row.estimate.tl, row.truth.tl);
        report += line;
    }
    report += "SMAPE SMAPE_PT SMAPE_MT SMAPE_TL Error_dec\n";
    std::snprintf(line, sizeof(line), "%.4f %.4f %.4f %.4f %.4f\n", result.smape_all,
                  result.smape_pt, result.smape_mt, result.smape_tl, result.error_dec);
    report += line;
    result.report = std::move(report);
    return result;
}

} // namespace spinekpt
