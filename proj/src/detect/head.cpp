// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/adamw.hpp"
#include "tomo/trainer/checkpoint.hpp"
#include "tomo/trainer/loss.hpp"
#include "tomo/trainer/schedule.hpp"

namespace tomo::detect {

using trainer::LinearHead;
using trainer::Matrix;

trainer::Matrix slice_features(const embeddings::TokenGrid& grid, const Projection& proj, const PyramidSpec& spec) {
    return build_pyramid(grid, proj, spec).flatten();
}

LinearHead init_detect_head(std::size_t channels, std::uint64_t seed, double init_scale, double prior) {
    if (!(prior > 0.0 && prior < 1.0)) fail(ErrorKind::Usage, "prior must be in (0, 1)");
    Rng rng(seed);
    LinearHead head = LinearHead::random(channels, kHeadOutputs, rng, init_scale);
    for (std::size_t k = 0; k < kAnchorsPerLocation; ++k) head.bias(k) = -std::log((1.0 - prior) / prior);
    return head;
}

namespace {

void check_features(const LinearHead& head, const Matrix& features, const AnchorSet& anchors) {
    if (features.rows * kAnchorsPerLocation != anchors.size()) {
        fail(ErrorKind::ShapeMismatch, "feature locations do not match the anchor set");
    }
    if (features.cols != head.in_dim()) fail(ErrorKind::DimMismatch, "feature channels do not match the head");
}

}  // namespace

DetectionLoss slice_loss(const LinearHead& head, const SliceSample& sample, const AnchorSet& anchors,
                         const DetectConfig& cfg, std::uint64_t seed, std::span<double> grad_params, double scale) {
    check_features(head, sample.features, anchors);
    const Assignment full = assign_anchors(anchors, sample.boxes, cfg.assign, seed);

    // Compact to the anchors that contribute, grouped by location.
    std::vector<std::size_t> active;
    for (std::size_t a = 0; a < full.labels.size(); ++a) {
        if (full.labels[a] != kIgnore) active.push_back(a);
    }
    Assignment compact;
    compact.n_pos = full.n_pos;
    compact.n_neg = full.n_neg;
    std::vector<double> logits(active.size());
    std::vector<Deltas> deltas(active.size()), targets(active.size());
    std::vector<double> out(kHeadOutputs);
    std::size_t last_loc = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const std::size_t a = active[i];
        const std::size_t loc = a / kAnchorsPerLocation;
        const std::size_t k = a % kAnchorsPerLocation;
        if (loc != last_loc) {
            trainer::forward_linear(head, sample.features.row(loc), out);
            last_loc = loc;
        }
        const int label = full.labels[a];
        compact.labels.push_back(label);
        logits[i] = out[k];
        for (std::size_t c = 0; c < 4; ++c) deltas[i][c] = out[kAnchorsPerLocation + 4 * k + c];
        if (label >= 0) targets[i] = encode_box(anchors.boxes[a], sample.boxes[static_cast<std::size_t>(label)]);
    }
    DetectionLoss loss = detection_loss(logits, deltas, compact, targets, cfg.loss);

    std::vector<double> d_out(kHeadOutputs, 0.0);
    std::size_t i = 0;
    while (i < active.size()) {
        const std::size_t loc = active[i] / kAnchorsPerLocation;
        std::fill(d_out.begin(), d_out.end(), 0.0);
        for (; i < active.size() && active[i] / kAnchorsPerLocation == loc; ++i) {
            const std::size_t k = active[i] % kAnchorsPerLocation;
            d_out[k] = loss.d_logits[i];
            for (std::size_t c = 0; c < 4; ++c) d_out[kAnchorsPerLocation + 4 * k + c] = loss.d_deltas[i][c];
        }
        trainer::accumulate_linear_grad(head, sample.features.row(loc), d_out, grad_params, scale);
    }
    return loss;
}

std::vector<Detection> predict_slice(const LinearHead& head, const Matrix& features, const AnchorSet& anchors,
                                     const DetectConfig& cfg, int slice_index) {
    check_features(head, features, anchors);
    struct Candidate {
        double score;
        std::size_t anchor;
        Deltas deltas;
    };
    std::vector<Candidate> cands;
    std::vector<double> out(kHeadOutputs);
    for (std::size_t loc = 0; loc < features.rows; ++loc) {
        trainer::forward_linear(head, features.row(loc), out);
        for (std::size_t k = 0; k < kAnchorsPerLocation; ++k) {
            const double s = trainer::sigmoid(out[k]);
            if (s < cfg.min_score) continue;
            Candidate c{s, loc * kAnchorsPerLocation + k, {}};
            for (std::size_t j = 0; j < 4; ++j) c.deltas[j] = out[kAnchorsPerLocation + 4 * k + j];
            cands.push_back(c);
        }
    }
    const auto by_score = [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.anchor < b.anchor;
    };
    if (cands.size() > cfg.top_k) {
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(cfg.top_k), cands.end(), by_score);
        cands.resize(cfg.top_k);
    }
    std::vector<Detection> dets;
    dets.reserve(cands.size());
    for (const auto& c : cands) {
        Deltas d = c.deltas;
        // Keep exp() finite for wild early-training predictions.
        d[2] = std::clamp(d[2], -4.0, 4.0);
        d[3] = std::clamp(d[3], -4.0, 4.0);
        const Box b = clip_to_frame(decode_box(anchors.boxes[c.anchor], d));
        if (b.w <= 0.0 || b.h <= 0.0) continue;
        dets.push_back({b, c.score, slice_index});
    }
    return nms(dets, cfg.nms_iou);
}

std::vector<Detection> predict_volume(const LinearHead& head, const VolumeSample& volume, const AnchorSet& anchors,
                                      const DetectConfig& cfg) {
    std::vector<std::vector<Detection>> per_slice;
    for (std::size_t s = 0; s < volume.slices.size(); ++s) {
        per_slice.push_back(predict_slice(head, volume.slices[s], anchors, cfg, static_cast<int>(s)));
    }
    auto dets = aggregate_volume(per_slice, cfg.nms_iou);
    if (dets.size() > cfg.max_per_volume) dets.resize(cfg.max_per_volume);
    return dets;
}

double validation_sensitivity(const LinearHead& head, std::span<const VolumeSample> volumes, const AnchorSet& anchors,
                              const DetectConfig& cfg) {
    std::vector<VolumeTruth> truth;
    std::vector<ScoredBox> preds;
    for (const auto& v : volumes) {
        truth.push_back({v.volume_id, v.truth});
        for (const auto& d : predict_volume(head, v, anchors, cfg)) {
            preds.push_back({v.volume_id, d.box, d.score, d.slice_index});
        }
    }
    return froc(truth, preds, cfg.val_fp_points).average;
}

DetectRun train_detect_head(std::span<const SliceSample> train, std::span<const VolumeSample> val,
                            const DetectConfig& cfg) {
    const bool any_box = std::any_of(train.begin(), train.end(), [](const SliceSample& s) { return !s.boxes.empty(); });
    if (!any_box) fail(ErrorKind::NoAnnotations, "detection training needs annotated slices");
    if (cfg.train.batch_size == 0 || cfg.train.epochs == 0) fail(ErrorKind::Usage, "epochs and batch size must be positive");
    const AnchorSet anchors = generate_anchors(cfg.pyramid);
    const std::size_t channels = train.front().features.cols;

    DetectRun run;
    LinearHead head = init_detect_head(channels, cfg.train.seed, cfg.train.init_scale, cfg.prior);
    run.head = head;
    trainer::OptimState state(head.parameter_count(), trainer::AdamWConfig{.weight_decay = cfg.train.weight_decay});
    const std::size_t batches = (train.size() + cfg.train.batch_size - 1) / cfg.train.batch_size;
    const trainer::ScheduleConfig schedule{cfg.train.lr, cfg.train.lr_min, cfg.train.epochs * batches};
    Rng order_rng(derive_seed(cfg.train.seed, 1));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(head.parameter_count());
    std::uint64_t step = 0;
    double best = -1.0;

    for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        shuffle(std::span(order), order_rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * cfg.train.batch_size;
            const std::size_t end = std::min(train.size(), begin + cfg.train.batch_size);
            const double scale = 1.0 / static_cast<double>(end - begin);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = order[k];
                const std::uint64_t seed = derive_seed(cfg.train.seed, 2 + epoch * train.size() + i);
                epoch_loss += slice_loss(head, train[i], anchors, cfg, seed, grad, scale).total;
            }
            trainer::adamw_step(head.params(), grad, state, trainer::cosine_lr(schedule, step++));
        }
        run.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));
        run.epochs_run = epoch + 1;
        if (val.empty()) {
            run.head = head;
            run.best_epoch = epoch;
            continue;
        }
        const double sens = validation_sensitivity(head, val, anchors, cfg);
        run.val_sensitivity.push_back(sens);
        if (sens > best) {
            best = sens;
            run.best_epoch = epoch;
            run.head = head;
        } else if (epoch - run.best_epoch >= cfg.patience) {
            break;
        }
    }
    return run;
}

nlohmann::json to_json(const DetectRun& run) {
    return {{"best_epoch", run.best_epoch},
            {"epochs_run", run.epochs_run},
            {"train_loss", run.train_loss},
            {"val_sensitivity", run.val_sensitivity},
            {"head", trainer::head_to_json(run.head)}};
}

DetectRun detect_run_from_json(const nlohmann::json& j) {
    try {
        DetectRun run;
        run.best_epoch = j.at("best_epoch").get<std::size_t>();
        run.epochs_run = j.at("epochs_run").get<std::size_t>();
        run.train_loss = j.at("train_loss").get<std::vector<double>>();
        run.val_sensitivity = j.at("val_sensitivity").get<std::vector<double>>();
        run.head = trainer::head_from_json(j.at("head"));
        return run;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("detect run: ") + e.what());
    }
}

}  // namespace tomo::detect
