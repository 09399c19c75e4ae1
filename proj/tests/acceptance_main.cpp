// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spinekpt/adam.hpp"
#include "spinekpt/checkpoint.hpp"
#include "spinekpt/cobb.hpp"
#include "spinekpt/codec.hpp"
#include "spinekpt/dataset.hpp"
#include "spinekpt/eval.hpp"
#include "spinekpt/losses.hpp"
#include "spinekpt/metrics.hpp"
#include "spinekpt/model.hpp"
#include "spinekpt/nn.hpp"
#include "spinekpt/pgm.hpp"
#include "spinekpt/synth.hpp"
#include "spinekpt/train.hpp"
#include "test_util.hpp"

using namespace spinekpt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
    const char* name;
    bool passed;
    double seconds;
    std::string detail;
};

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double lo,
                     double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(std::move(shape));
    for (double& v : t.data) v = dist(rng);
    return t;
}

// ---------------------------------------------------------------- criterion 1
// Gradient audit: losses and every layer < 1e-4, end-to-end < 1e-3, 3 seeds.
Criterion gradient_audit() {
    const auto start = Clock::now();
    double worst_layer = 0.0, worst_e2e = 0.0;

    for (std::uint64_t seed : {101u, 202u, 303u}) {
        // focal loss
        {
            Tensor pred = random_tensor({1, 8, 8}, seed, 0.05, 0.95);
            Tensor target = random_tensor({1, 8, 8}, seed + 1, 0.0, 0.9);
            target.data[seed % 64] = 1.0;
            target.data[(seed * 7) % 64] = 1.0;
            const LossBundle lb = focal_loss(pred, target);
            for (std::size_t i = 0; i < pred.numel(); ++i) {
                const double saved = pred.data[i];
                const double h = 1e-6;
                pred.data[i] = saved + h;
                const double up = focal_loss(pred, target).value;
                pred.data[i] = saved - h;
                const double down = focal_loss(pred, target).value;
                pred.data[i] = saved;
                worst_layer = std::max(worst_layer,
                                       rel_err((up - down) / (2 * h), lb.grad.data[i]));
            }
        }
        // masked L1
        {
            Tensor pred = random_tensor({2, 6, 6}, seed + 2, -1.0, 1.0);
            Tensor target = random_tensor({2, 6, 6}, seed + 3, -1.0, 1.0);
            Tensor mask({1, 6, 6});
            std::mt19937_64 rng(seed + 4);
            for (int k = 0; k < 7; ++k) mask.data[rng() % 36] = 1.0;
            const LossBundle lb = masked_l1(pred, target, mask);
            for (std::size_t i = 0; i < pred.numel(); ++i) {
                const double saved = pred.data[i];
                const double h = 1e-6;
                pred.data[i] = saved + h;
                const double up = masked_l1(pred, target, mask).value;
                pred.data[i] = saved - h;
                const double down = masked_l1(pred, target, mask).value;
                pred.data[i] = saved;
                worst_layer = std::max(worst_layer,
                                       rel_err((up - down) / (2 * h), lb.grad.data[i]));
            }
        }
        // conv layers, both strides, via a linear probe
        for (int stride : {1, 2}) {
            Tensor input = random_tensor({2, 6, 6}, seed + 10 + stride, -1.0, 1.0);
            Tensor kernel = random_tensor({3, 2, 3, 3}, seed + 20 + stride, -1.0, 1.0);
            Tensor bias = random_tensor({3}, seed + 30 + stride, -1.0, 1.0);
            const Tensor out = nn::conv2d(input, kernel, bias, stride);
            const Tensor w = random_tensor(out.shape, seed + 40 + stride, -1.0, 1.0);
            auto probe = [&]() {
                const Tensor o = nn::conv2d(input, kernel, bias, stride);
                double acc = 0.0;
                for (std::size_t i = 0; i < o.numel(); ++i) acc += o.data[i] * w.data[i];
                return acc;
            };
            const nn::ConvGrads grads = nn::conv2d_backward(input, kernel, w, stride);
            auto check = [&](Tensor& target, const Tensor& analytic) {
                for (std::size_t i = 0; i < target.numel(); ++i) {
                    const double saved = target.data[i];
                    const double h = 1e-6;
                    target.data[i] = saved + h;
                    const double up = probe();
                    target.data[i] = saved - h;
                    const double down = probe();
                    target.data[i] = saved;
                    worst_layer = std::max(
                        worst_layer, rel_err((up - down) / (2 * h), analytic.data[i]));
                }
            };
            check(input, grads.grad_input);
            check(kernel, grads.grad_kernel);
            check(bias, grads.grad_bias);
        }
        // relu / sigmoid / upsample via probes
        {
            Tensor x = random_tensor({2, 4, 4}, seed + 50, -1.0, 1.0);
            for (double& v : x.data)
                if (std::abs(v) < 1e-3) v = 0.5;  // keep away from the relu kink
            const Tensor w = random_tensor(x.shape, seed + 51, -1.0, 1.0);
            const Tensor grad = nn::relu_backward(x, w);
            for (std::size_t i = 0; i < x.numel(); ++i) {
                const double h = 1e-6;
                const double up = std::max(x.data[i] + h, 0.0) * w.data[i];
                const double down = std::max(x.data[i] - h, 0.0) * w.data[i];
                worst_layer = std::max(worst_layer,
                                       rel_err((up - down) / (2 * h), grad.data[i]));
            }

            const Tensor sx = random_tensor({2, 4, 4}, seed + 52, -2.0, 2.0);
            const Tensor sy = nn::sigmoid(sx);
            const Tensor sgrad = nn::sigmoid_backward(sy, w);
            for (std::size_t i = 0; i < sx.numel(); ++i) {
                const double h = 1e-6;
                const double up = w.data[i] / (1.0 + std::exp(-(sx.data[i] + h)));
                const double down = w.data[i] / (1.0 + std::exp(-(sx.data[i] - h)));
                worst_layer = std::max(worst_layer,
                                       rel_err((up - down) / (2 * h), sgrad.data[i]));
            }

            Tensor ux = random_tensor({2, 3, 3}, seed + 53, -1.0, 1.0);
            const Tensor uw = random_tensor({2, 6, 6}, seed + 54, -1.0, 1.0);
            const Tensor ugrad = nn::upsample2x_nearest_backward(uw);
            auto uprobe = [&]() {
                const Tensor o = nn::upsample2x_nearest(ux);
                double acc = 0.0;
                for (std::size_t i = 0; i < o.numel(); ++i) acc += o.data[i] * uw.data[i];
                return acc;
            };
            for (std::size_t i = 0; i < ux.numel(); ++i) {
                const double saved = ux.data[i];
                const double h = 1e-6;
                ux.data[i] = saved + h;
                const double up = uprobe();
                ux.data[i] = saved - h;
                const double down = uprobe();
                ux.data[i] = saved;
                worst_layer = std::max(worst_layer,
                                       rel_err((up - down) / (2 * h), ugrad.data[i]));
            }
        }
        // end-to-end parameter gradients through the whole model
        {
            ModelParams params = init_model_params(seed);
            const Tensor image = random_tensor({1, 16, 16}, seed + 60, 0.0, 1.0);
            TargetMaps tgt;
            tgt.heatmap = Tensor({1, 4, 4});
            tgt.center_offset = Tensor({2, 4, 4});
            tgt.corner_offset = Tensor({8, 4, 4});
            tgt.center_mask = Tensor({1, 4, 4});
            tgt.heatmap.at3(0, 1, 1) = 1.0;
            tgt.heatmap.at3(0, 3, 2) = 1.0;
            tgt.center_mask.at3(0, 1, 1) = 1.0;
            tgt.center_mask.at3(0, 3, 2) = 1.0;
            tgt.center_offset.at3(0, 1, 1) = 0.25;
            tgt.corner_offset.at3(3, 3, 2) = -1.25;

            auto loss_value = [&]() {
                const ForwardResult fwd = model_forward(image, params);
                return total_loss(fwd.maps, tgt).value;
            };
            const ForwardResult fwd = model_forward(image, params);
            const TotalLoss loss = total_loss(fwd.maps, tgt);
            const ModelParams grads = model_backward(
                loss.d_heatmap, loss.d_center_offset, loss.d_corner_offset, params, fwd.cache);

            std::mt19937_64 rng(seed + 70);
            int checked = 0;
            for (int probe_i = 0; probe_i < 80 && checked < 20; ++probe_i) {
                auto& [name, tensor] = params.items[rng() % params.items.size()];
                const std::size_t j = rng() % tensor.numel();
                const double saved = tensor.data[j];
                auto central = [&](double h) {
                    tensor.data[j] = saved + h;
                    const double up = loss_value();
                    tensor.data[j] = saved - h;
                    const double down = loss_value();
                    tensor.data[j] = saved;
                    return (up - down) / (2 * h);
                };
                const double fd1 = central(1e-5);
                const double fd2 = central(3e-5);
                // a relu/L1 kink inside the stencil invalidates the FD oracle
                if (rel_err(fd1, fd2) > 1e-4) continue;
                ++checked;
                worst_e2e = std::max(worst_e2e, rel_err(fd1, grads.at(name).data[j]));
            }
            if (checked < 15) worst_e2e = 1.0;
        }
    }

    const double secs = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "max layer rel err %.2e (<1e-4), end-to-end %.2e (<1e-3)", worst_layer,
                  worst_e2e);
    return {"gradient-audit", worst_layer < 1e-4 && worst_e2e < 1e-3 && secs < 60.0,
            secs, detail};
}

// ---------------------------------------------------------------- criterion 2
// Codec round trip over 100 random annotations within 1e-9 px + collision error.
Criterion codec_round_trip() {
    const auto start = Clock::now();
    double worst = 0.0;
    bool ok = true;
    std::string detail;

    for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
        const SpineSample s = generate_sample(test_util::random_gen_config(seed));
        if (!validate_annotation(s.annotation).empty()) {
            ok = false;
            detail = "generated annotation invalid at seed " + std::to_string(seed);
            break;
        }
        const CodecConfig cfg = make_codec_config(s.annotation.image_width,
                                                  s.annotation.image_height);
        const TargetMaps maps = encode_targets(s.annotation, cfg);
        const DecodedLandmarks dec =
            decode_landmarks({maps.heatmap, maps.center_offset, maps.corner_offset}, cfg);
        if (!dec.complete() || dec.vertebrae.size() != s.annotation.vertebrae.size()) {
            ok = false;
            detail = "incomplete decode at seed " + std::to_string(seed);
            break;
        }
        for (std::size_t i = 0; i < dec.vertebrae.size(); ++i)
            for (int k = 0; k < kCornersPerVertebra; ++k) {
                const Point2 got = dec.vertebrae[i].corner(k);
                const Point2 want = s.annotation.vertebrae[i].corner(k);
                worst = std::max({worst, std::abs(got.x - want.x), std::abs(got.y - want.y)});
            }
        if (worst >= 1e-9) {
            ok = false;
            detail = "round-trip error " + std::to_string(worst) + " at seed " +
                     std::to_string(seed);
        }
    }

    // collisions must raise the documented error
    if (ok) {
        SpineAnnotation ann = test_util::straight_annotation(96, 224, 12.0);
        const double y3 = center_of(ann.vertebrae[3]).y;
        ann.vertebrae[4] = test_util::rect_vertebra(48.0, y3 + 0.5, 18.0, 3.0);
        bool collided = false;
        try {
            encode_targets(ann, make_codec_config(96, 224));
        } catch (const EncodingCollisionError& e) {
            collided = e.first_index == 3 && e.second_index == 4;
        }
        if (!collided) {
            ok = false;
            detail = "collision error not raised";
        }
    }

    const double secs = seconds_since(start);
    if (ok) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), "100 annotations, max landmark error %.2e px (<1e-9)",
                      worst);
        detail = buf;
    }
    return {"codec-round-trip", ok && secs < 10.0, secs, detail};
}

// ---------------------------------------------------------------- criterion 3
// smape / error_dec vs literal brute force, 1e-12; MT vs all-pair maximum.
Criterion metric_oracles() {
    const auto start = Clock::now();
    double worst = 0.0;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> deg(0.5, 60.0);
    std::uniform_real_distribution<double> coord(-100.0, 100.0);
    std::uniform_int_distribution<int> n_images(1, 8);

    for (int trial = 0; trial < 50; ++trial) {
        const int n = n_images(rng);
        std::vector<AngleTriple> a, b;
        for (int j = 0; j < n; ++j) {
            a.push_back({deg(rng), deg(rng), deg(rng)});
            b.push_back({deg(rng), deg(rng), deg(rng)});
        }
        // literal Eq. 3 evaluation
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double num = std::abs(a[j].pt - b[j].pt) + std::abs(a[j].mt - b[j].mt) +
                               std::abs(a[j].tl - b[j].tl);
            const double den =
                a[j].pt + b[j].pt + a[j].mt + b[j].mt + a[j].tl + b[j].tl;
            acc += num / den;
        }
        worst = std::max(worst, std::abs(smape(a, b) - 100.0 * acc / n));

        // literal Eq. 4 evaluation
        const int m = 20 + trial;
        std::vector<Point2> det, gt;
        for (int i = 0; i < m; ++i) {
            det.push_back({coord(rng), coord(rng)});
            gt.push_back({coord(rng), coord(rng)});
        }
        double dist_acc = 0.0;
        for (int i = 0; i < m; ++i)
            dist_acc += std::sqrt((det[i].x - gt[i].x) * (det[i].x - gt[i].x) +
                                  (det[i].y - gt[i].y) * (det[i].y - gt[i].y));
        worst = std::max(worst, std::abs(error_dec(det, gt) - dist_acc / m));
    }

    // MT equals the brute-force maximum over all 136 pairs
    bool mt_ok = true;
    for (std::uint64_t seed = 0; seed < 30 && mt_ok; ++seed) {
        const SpineSample s = generate_sample(test_util::random_gen_config(seed + 500));
        std::vector<std::array<double, 2>> dirs;
        for (const auto& v : s.annotation.vertebrae) dirs.push_back(vertebra_direction(v));
        double best = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < dirs.size(); ++i)
            for (std::size_t j = i + 1; j < dirs.size(); ++j) {
                ++pairs;
                const double dot =
                    std::abs(dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1]);
                best = std::max(best, std::acos(std::min(dot, 1.0)) * 180.0 / M_PI);
            }
        const CobbResult r = cobb_angles(s.annotation);
        if (pairs != 136 || std::abs(r.mt_deg - best) > 1e-12) mt_ok = false;
    }

    const double secs = seconds_since(start);
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "max oracle deviation %.2e (<1e-12), MT matches all-pair max: %s", worst,
                  mt_ok ? "yes" : "no");
    return {"metric-oracles", worst < 1e-12 && mt_ok, secs, detail};
}

// ---------------------------------------------------------------- criterion 4
// Cobb angles invariant under 20 random similarity transforms per annotation.
Criterion geometric_invariance() {
    const auto start = Clock::now();
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> angle(-180.0, 180.0);
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    std::uniform_real_distribution<double> shift(-200.0, 200.0);

    double worst = 0.0;
    bool indices_ok = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SpineSample s = generate_sample(test_util::random_gen_config(seed + 900));
        const CobbResult base = cobb_angles(s.annotation);
        for (int trial = 0; trial < 20; ++trial) {
            const double rad = angle(rng) * M_PI / 180.0;
            const double c = std::cos(rad), sn = std::sin(rad);
            const double sc = scale(rng);
            const Point2 t{shift(rng), shift(rng)};
            SpineAnnotation moved = s.annotation;
            for (VertebraCorners& v : moved.vertebrae)
                for (int k = 0; k < kCornersPerVertebra; ++k) {
                    const Point2 p = v.corner(k);
                    v.corner(k) = {sc * (p.x * c - p.y * sn) + t.x,
                                   sc * (p.x * sn + p.y * c) + t.y};
                }
            const CobbResult r = cobb_angles(moved);
            worst = std::max({worst, std::abs(r.mt_deg - base.mt_deg),
                              std::abs(r.pt_deg - base.pt_deg),
                              std::abs(r.tl_deg - base.tl_deg)});
            if (r.mt_upper != base.mt_upper || r.mt_lower != base.mt_lower ||
                r.pt_partner != base.pt_partner || r.tl_partner != base.tl_partner)
                indices_ok = false;
        }
    }

    const double secs = seconds_since(start);
    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "max angle drift %.2e deg (<1e-9), indices stable: %s", worst,
                  indices_ok ? "yes" : "no");
    return {"geometric-invariance", worst < 1e-9 && indices_ok, secs, detail};
}

// ---------------------------------------------------------------- criterion 5
// Training sanity: overfit one sample, then the full desk-scale run.
Criterion training_sanity() {
    const auto start = Clock::now();
    std::string detail;
    bool ok = true;

    // (a) 200 Adam steps on one sample cut the loss by at least 90%
    double first_loss = 0.0, last_loss = 0.0;
    {
        SpineGenConfig gen_cfg;  // desk-scale defaults, 64x128
        gen_cfg.seed = 7;
        const SpineSample s = generate_sample(gen_cfg);
        const CodecConfig codec = make_codec_config(64, 128);
        const TargetMaps tgt = encode_targets(s.annotation, codec);

        ModelParams params = init_model_params(1);
        AdamState adam = AdamState::for_params(params, 2.5e-4);
        for (int step = 0; step < 200; ++step) {
            const ForwardResult fwd = model_forward(s.image, params);
            const TotalLoss loss = total_loss(fwd.maps, tgt);
            if (step == 0) first_loss = loss.value;
            last_loss = loss.value;
            const ModelParams grads = model_backward(
                loss.d_heatmap, loss.d_center_offset, loss.d_corner_offset, params,
                fwd.cache);
            adam_step(params, grads, adam);
        }
        if (!(last_loss <= 0.10 * first_loss)) {
            ok = false;
            char buf[120];
            std::snprintf(buf, sizeof(buf), "overfit: loss %.4g -> %.4g (needs <=10%%)",
                          first_loss, last_loss);
            detail = buf;
        }
    }

    // (b) full desk-scale run: 64 train / 16 val at 64x128, <= 60 epochs
    double err = 0.0, smape_val = 0.0;
    int epochs_run = 0;
    if (ok) {
        auto make_samples = [](int count, std::uint64_t seed0) {
            std::vector<DatasetSample> out;
            for (int i = 0; i < count; ++i) {
                SpineGenConfig cfg;
                cfg.seed = seed0 + static_cast<std::uint64_t>(i);
                const SpineSample s = generate_sample(cfg);
                DatasetSample d;
                d.image = s.image;
                d.annotation = s.annotation;
                char name[32];
                std::snprintf(name, sizeof(name), "s%llu_%04d.pgm",
                              static_cast<unsigned long long>(seed0), i);
                d.image_name = name;
                out.push_back(std::move(d));
            }
            return out;
        };
        const auto train_samples = make_samples(64, 0);
        const auto val_samples = make_samples(16, 1000);
        const auto test_samples = make_samples(20, 2000);

        TrainConfig tc;
        tc.epochs = 60;
        tc.lr = 2.5e-4;
        tc.seed = 42;
        const TrainResult result = train_model(train_samples, val_samples, tc);
        epochs_run = result.epochs_run;

        const EvalResult ev =
            evaluate_samples(test_samples, EvalMode::model, &result.best);
        err = ev.error_dec;
        smape_val = ev.smape_all;
        ok = err < 8.0 && smape_val < 35.0;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "overfit %.4g->%.4g; full run %d epochs, test Error_dec %.3f px "
                      "(<8), SMAPE %.2f%% (<35)",
                      first_loss, last_loss, epochs_run, err, smape_val);
        detail = buf;
    }

    const double secs = seconds_since(start);
    if (secs >= 900.0) ok = false;
    return {"training-sanity", ok, secs, detail};
}

// ---------------------------------------------------------------- criterion 6
// Byte-for-byte determinism of gen -> train -> eval with fixed seeds.
Criterion determinism() {
    const auto start = Clock::now();

    auto run_pipeline = [](const fs::path& dir) {
        SpineGenConfig gen_cfg;
        gen_cfg.seed = 9001;
        generate_dataset(15, gen_cfg, dir.string());
        const auto train_samples = load_split(dir.string(), "train");
        const auto val_samples = load_split(dir.string(), "val");
        TrainConfig tc;
        tc.epochs = 3;
        tc.seed = 77;
        const TrainResult result = train_model(train_samples, val_samples, tc);
        const auto test_samples = load_split(dir.string(), "test");
        const EvalResult ev = evaluate_samples(test_samples, EvalMode::model, &result.best);
        return std::pair{result.loss_log, ev.report};
    };

    const fs::path d1 = fs::temp_directory_path() / "spinekpt_accept_det_a";
    const fs::path d2 = fs::temp_directory_path() / "spinekpt_accept_det_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    const auto [log1, report1] = run_pipeline(d1);
    const auto [log2, report2] = run_pipeline(d2);

    bool files_equal = true;
    for (const auto& entry : fs::directory_iterator(d1)) {
        std::ifstream a(entry.path(), std::ios::binary);
        std::ifstream b(d2 / entry.path().filename(), std::ios::binary);
        const std::string sa((std::istreambuf_iterator<char>(a)),
                             std::istreambuf_iterator<char>());
        const std::string sb((std::istreambuf_iterator<char>(b)),
                             std::istreambuf_iterator<char>());
        if (sa != sb || sa.empty()) files_equal = false;
    }
    fs::remove_all(d1);
    fs::remove_all(d2);

    const bool ok = log1 == log2 && report1 == report2 && files_equal && !log1.empty();
    const double secs = seconds_since(start);
    return {"determinism", ok, secs,
            ok ? "loss log, report and dataset bytes identical across reruns"
               : "pipeline outputs differ between identical runs"};
}

// ---------------------------------------------------------------- criterion 7
// Oracle-mode evaluation reports exactly zero everywhere.
Criterion oracle_mode_zero() {
    const auto start = Clock::now();
    std::vector<DatasetSample> samples;
    for (int i = 0; i < 10; ++i) {
        SpineGenConfig cfg;
        cfg.seed = 3000 + static_cast<std::uint64_t>(i);
        const SpineSample s = generate_sample(cfg);
        DatasetSample d;
        d.image = s.image;
        d.annotation = s.annotation;
        d.image_name = "oracle_" + std::to_string(i) + ".pgm";
        samples.push_back(std::move(d));
    }
    const EvalResult ev = evaluate_samples(samples, EvalMode::oracle, nullptr);
    const bool ok = ev.smape_all == 0.0 && ev.smape_pt == 0.0 && ev.smape_mt == 0.0 &&
                    ev.smape_tl == 0.0 && ev.error_dec == 0.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "SMAPE %.17g, PT %.17g, MT %.17g, TL %.17g, Error_dec %.17g",
                  ev.smape_all, ev.smape_pt, ev.smape_mt, ev.smape_tl, ev.error_dec);
    return {"oracle-mode-zero", ok, seconds_since(start), detail};
}

} // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(gradient_audit());
    results.push_back(codec_round_trip());
    results.push_back(metric_oracles());
    results.push_back(geometric_invariance());
    results.push_back(training_sanity());
    results.push_back(determinism());
    results.push_back(oracle_mode_zero());

    int failures = 0;
    for (const Criterion& c : results) {
        if (!c.passed) ++failures;
        std::printf("[%s] %-21s (%6.1f s) %s\n", c.passed ? "PASS" : "FAIL", c.name,
                    c.seconds, c.detail.c_str());
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failures);
    return failures;
}
