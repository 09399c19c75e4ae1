#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinekpt/annotation_io.hpp"
#include "spinekpt/checkpoint.hpp"
#include "spinekpt/dataset.hpp"
#include "spinekpt/eval.hpp"
#include "spinekpt/pgm.hpp"
#include "spinekpt/svg.hpp"
#include "spinekpt/synth.hpp"
#include "spinekpt/train.hpp"

namespace fs = std::filesystem;
using namespace spinekpt;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SPINEKPT_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vertebra landmark detection on synthetic spine images"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset with a split manifest");
    int gen_count = 100;
    std::string gen_out = "data";
    SpineGenConfig gen_cfg;
    std::uint64_t gen_seed = default_seed();
    gen->add_option("--count", gen_count, "Number of samples")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Base seed; sample i uses seed+i");
    gen->add_option("--width", gen_cfg.image_width, "Image width in pixels");
    gen->add_option("--height", gen_cfg.image_height, "Image height in pixels");
    gen->add_option("--amp1", gen_cfg.amp1, "Primary curve amplitude, pixels");
    gen->add_option("--amp2", gen_cfg.amp2, "Secondary curve amplitude, pixels");
    gen->add_option("--freq1", gen_cfg.freq1, "Primary curve frequency, cycles");
    gen->add_option("--freq2", gen_cfg.freq2, "Secondary curve frequency, cycles");
    gen->add_option("--phase1", gen_cfg.phase1, "Primary curve phase, radians");
    gen->add_option("--phase2", gen_cfg.phase2, "Secondary curve phase, radians");
    gen->add_option("--vert-width", gen_cfg.vertebra_width, "Vertebra width, pixels");
    gen->add_option("--vert-height", gen_cfg.vertebra_height, "Vertebra height, pixels");
    gen->add_option("--vert-gap", gen_cfg.vertebra_gap, "Gap between vertebrae, pixels");
    gen->add_option("--bg-mean", gen_cfg.background_mean, "Background intensity");
    gen->add_option("--vert-mean", gen_cfg.vertebra_mean, "Vertebra intensity");
    gen->add_option("--noise-std", gen_cfg.noise_std, "Pixel noise standard deviation");

    // train
    auto* train = app.add_subcommand("train", "Train the detector on a generated dataset");
    std::string train_data, train_ckpt = "model.ckpt", train_log = "loss_log.txt";
    TrainConfig train_cfg;
    train_cfg.seed = default_seed();
    train->add_option("--data-dir", train_data, "Dataset directory")->required();
    train->add_option("--checkpoint", train_ckpt, "Checkpoint output path");
    train->add_option("--log", train_log, "Loss log output path");
    train->add_option("--epochs", train_cfg.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    train->add_option("--lr", train_cfg.lr, "Adam learning rate");
    train->add_option("--seed", train_cfg.seed, "Training seed");
    train->add_option("--w-heatmap", train_cfg.weights.w_heatmap, "Heatmap loss weight");
    train->add_option("--w-center", train_cfg.weights.w_center_offset, "Center offset loss weight");
    train->add_option("--w-corner", train_cfg.weights.w_corner_offset, "Corner offset loss weight");
    train->add_option("--min-overlap", train_cfg.min_overlap, "Gaussian radius overlap bound");
    train->add_option("--sigma-floor", train_cfg.sigma_floor, "Minimum Gaussian sigma, cells");
    train->add_flag("!--no-augment", train_cfg.use_augment, "Disable training augmentation");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a split and print the metric report");
    std::string eval_data, eval_ckpt, eval_split = "test", eval_out = "decoded", eval_report;
    bool eval_oracle = false, eval_roundtrip = false;
    eval->add_option("--data-dir", eval_data, "Dataset directory")->required();
    eval->add_option("--checkpoint", eval_ckpt, "Model checkpoint");
    eval->add_option("--split", eval_split, "Split to evaluate (train|val|test)");
    eval->add_option("--out", eval_out, "Directory for decoded annotations");
    eval->add_option("--report", eval_report, "Also write the report to this file");
    eval->add_flag("--oracle", eval_oracle, "Evaluate ground truth against itself");
    eval->add_flag("--roundtrip", eval_roundtrip, "Evaluate encode/decode round trip, no network");

    // decode
    auto* decode = app.add_subcommand("decode", "Decode landmarks for one image");
    std::string dec_ckpt, dec_image, dec_out;
    decode->add_option("--checkpoint", dec_ckpt, "Model checkpoint")->required();
    decode->add_option("--image", dec_image, "Input P5 PGM image")->required();
    decode->add_option("--out", dec_out, "Output annotation file")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "Render an annotation as an SVG overlay");
    std::string plot_ann, plot_out, plot_image;
    plot->add_option("--annotation", plot_ann, "Annotation or decoded result file")->required();
    plot->add_option("--out", plot_out, "Output SVG path")->required();
    plot->add_option("--image", plot_image, "Override the image path referenced by the SVG");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            gen_cfg.seed = gen_seed;
            const auto entries = generate_dataset(gen_count, gen_cfg, gen_out);
            int n_train = 0, n_val = 0, n_test = 0;
            for (const auto& e : entries) {
                if (e.split == "train") ++n_train;
                else if (e.split == "val") ++n_val;
                else ++n_test;
            }
            std::printf("wrote %zu samples to %s (train %d, val %d, test %d)\n",
                        entries.size(), gen_out.c_str(), n_train, n_val, n_test);
        } else if (*train) {
            const auto train_samples = load_split(train_data, "train");
            const auto val_samples = load_split(train_data, "val");
            if (train_samples.empty())
                throw std::runtime_error("train split is empty in " + train_data);
            const TrainResult result = train_model(train_samples, val_samples, train_cfg);
            save_checkpoint(result.best, train_ckpt);
            write_text(train_log, result.loss_log);
            std::printf("trained %d epochs, best val loss %.10g, checkpoint %s\n",
                        result.epochs_run, result.best_val_loss, train_ckpt.c_str());
        } else if (*eval) {
            if (eval_oracle && eval_roundtrip)
                throw std::runtime_error("--oracle and --roundtrip are mutually exclusive");
            const EvalMode mode = eval_oracle ? EvalMode::oracle
                                : eval_roundtrip ? EvalMode::roundtrip
                                                 : EvalMode::model;
            ModelCheckpoint ckpt;
            if (mode == EvalMode::model) {
                if (eval_ckpt.empty())
                    throw std::runtime_error("--checkpoint is required unless --oracle or --roundtrip is given");
                ckpt = load_checkpoint(eval_ckpt);
            }
            const auto samples = load_split(eval_data, eval_split);
            if (samples.empty())
                throw std::runtime_error("split '" + eval_split + "' is empty in " + eval_data);
            const EvalResult result = evaluate_samples(
                samples, mode, mode == EvalMode::model ? &ckpt : nullptr, eval_out);
            std::fputs(result.report.c_str(), stdout);
            if (!eval_report.empty()) write_text(eval_report, result.report);
        } else if (*decode) {
            const ModelCheckpoint ckpt = load_checkpoint(dec_ckpt);
            const Tensor image = read_pgm(dec_image);
            CodecConfig codec = make_codec_config(static_cast<int>(image.dim(2)),
                                                  static_cast<int>(image.dim(1)),
                                                  ckpt.codec.n);
            codec.min_overlap = ckpt.codec.min_overlap;
            codec.sigma_floor = ckpt.codec.sigma_floor;
            codec.topk = ckpt.codec.topk;
            codec.score_threshold = ckpt.codec.score_threshold;
            const ForwardResult fwd = model_forward(image, ckpt.params);
            const DecodedLandmarks dec = decode_landmarks(fwd.maps, codec);
            write_annotation(annotation_file_from_decoded(dec, fs::path(dec_image).filename().string()),
                             dec_out);
            std::printf("decoded %d vertebrae to %s\n", dec.peaks_found, dec_out.c_str());
        } else if (*plot) {
            AnnotationFile file = read_annotation(plot_ann);
            if (!plot_image.empty()) file.image = plot_image;
            write_text(plot_out, render_annotation_svg(file));
            std::printf("wrote %s\n", plot_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
