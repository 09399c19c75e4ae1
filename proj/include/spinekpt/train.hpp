#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "spinekpt/adam.hpp"
#include "spinekpt/checkpoint.hpp"
#include "spinekpt/codec.hpp"
#include "spinekpt/dataset.hpp"
#include "spinekpt/losses.hpp"
#include "spinekpt/model.hpp"
#include "spinekpt/rng.hpp"

namespace spinekpt {

struct TrainConfig {
    int epochs = 100;
    double lr = 2.5e-4;
    LossWeights weights;
    FocalParams focal;
    double min_overlap = 0.7;
    double sigma_floor = 1.0;
    bool use_augment = true;
    AugmentConfig augment;
    std::uint64_t seed = 0;
    // stop when validation loss has not improved by at least
    // early_stop_rel for early_stop_patience consecutive epochs
    double early_stop_rel = 0.01;
    int early_stop_patience = 10;
};

struct TrainResult {
    ModelCheckpoint best;       // parameters at the best validation epoch
    std::string loss_log;       // one line per epoch: epoch, train loss, val loss
    int epochs_run = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
};

struct TrainAbortError : std::runtime_error {
    long step;
    TrainAbortError(long s, const std::string& why)
        : std::runtime_error("training aborted at step " + std::to_string(s) + ": " + why),
          step(s) {}
};

namespace detail {

inline CodecConfig codec_for(const SpineAnnotation& ann, const TrainConfig& cfg) {
    CodecConfig codec = make_codec_config(ann.image_width, ann.image_height);
    codec.min_overlap = cfg.min_overlap;
    codec.sigma_floor = cfg.sigma_floor;
    return codec;
}

} // namespace detail

/// Single-sample stochastic training with Adam. Train samples are augmented
/// per epoch; validation runs unaugmented after every epoch. Keeps the
/// checkpoint of the best validation epoch and stops early once the
/// validation loss stagnates.
inline TrainResult train_model(const std::vector<DatasetSample>& train_samples,
                               const std::vector<DatasetSample>& val_samples,
                               const TrainConfig& cfg) {
    if (train_samples.empty())
        throw std::invalid_argument("train_model: empty training split");

    ModelParams params = init_model_params(mix_seed(cfg.seed, 0x7061726d));
    AdamState adam = AdamState::for_params(params, cfg.lr);
    const CodecConfig codec = detail::codec_for(train_samples.front().annotation, cfg);

    TrainResult result;
    result.best.codec = codec;
    result.best.layers = default_layer_specs();

    auto eval_loss = [&](const DatasetSample& s) {
        const TargetMaps tgt = encode_targets(s.annotation, detail::codec_for(s.annotation, cfg));
        const ForwardResult fwd = model_forward(s.image, params);
        return total_loss(fwd.maps, tgt, cfg.weights, cfg.focal).value;
    };

    std::vector<std::size_t> order(train_samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    long step = 0;
    int patience = 0;
    std::string log;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x65706f63 + epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double train_acc = 0.0;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const DatasetSample& s = train_samples[order[oi]];
            const Tensor* image = &s.image;
            const SpineAnnotation* ann = &s.annotation;

            AugmentedSample aug;
            if (cfg.use_augment) {
                AugmentConfig acfg = cfg.augment;
                acfg.seed = mix_seed(cfg.seed, (std::uint64_t(epoch) << 20) + oi);
                aug = augment(s.image, s.annotation, acfg);
                image = &aug.image;
                ann = &aug.annotation;
            }

            TargetMaps tgt;
            try {
                tgt = encode_targets(*ann, detail::codec_for(*ann, cfg));
            } catch (const EncodingCollisionError&) {
                // augmentation squeezed two centers into one cell; train on
                // the unaugmented sample instead
                image = &s.image;
                ann = &s.annotation;
                tgt = encode_targets(*ann, detail::codec_for(*ann, cfg));
            }

            ++step;
            const ForwardResult fwd = model_forward(*image, params);
            const TotalLoss loss = total_loss(fwd.maps, tgt, cfg.weights, cfg.focal);
            if (!std::isfinite(loss.value)) throw TrainAbortError(step, "non-finite loss");
            train_acc += loss.value;

            const ModelParams grads = model_backward(loss.d_heatmap, loss.d_center_offset,
                                                     loss.d_corner_offset, params, fwd.cache);
            adam_step(params, grads, adam);
        }
        const double train_loss = train_acc / static_cast<double>(train_samples.size());

        double val_loss = train_loss;
        if (!val_samples.empty()) {
            double val_acc = 0.0;
            for (const DatasetSample& s : val_samples) val_acc += eval_loss(s);
            val_loss = val_acc / static_cast<double>(val_samples.size());
        }

        char line[128];
        std::snprintf(line, sizeof(line), "epoch %d train %.10g val %.10g\n", epoch,
                      train_loss, val_loss);
        log += line;
        result.epochs_run = epoch;

        if (val_loss < result.best_val_loss * (1.0 - cfg.early_stop_rel) ||
            !std::isfinite(result.best_val_loss)) {
            result.best_val_loss = val_loss;
            result.best.params = params;
            result.best.adam = adam;
            patience = 0;
        } else {
            ++patience;
            if (patience >= cfg.early_stop_patience) break;
        }
    }

    if (result.best.params.size() == 0) {  // no epoch improved; keep final state
        result.best.params = params;
        result.best.adam = adam;
    }
    result.loss_log = std::move(log);
    return result;
}

} // namespace spinekpt
