// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomo/detect/assign.hpp"
#include "tomo/detect/froc.hpp"
#include "tomo/detect/loss.hpp"
#include "tomo/detect/nms.hpp"
#include "tomo/detect/pyramid.hpp"
#include "tomo/trainer/linear.hpp"
#include "tomo/trainer/train_loop.hpp"

namespace tomo::detect {

/// Outputs per location: 9 class logits, then 9 x 4 box deltas.
inline constexpr std::size_t kHeadOutputs = kAnchorsPerLocation * 5;

struct DetectConfig {
    PyramidSpec pyramid;
    AssignConfig assign;
    LossConfig loss;
    double nms_iou = 0.1;
    double min_score = 0.05;
    /// Candidates kept per slice before NMS.
    std::size_t top_k = 1000;
    std::size_t max_per_volume = 100;
    /// Initial foreground probability encoded in the class bias.
    double prior = 0.01;
    trainer::TrainConfig train{.epochs = 50, .batch_size = 8, .lr = 1e-2, .lr_min = 0.0, .weight_decay = 1e-4};
    /// Epochs without validation improvement before stopping.
    std::size_t patience = 10;
    std::vector<double> val_fp_points = kFpPointsExtended;
};

/// One annotated slice: pyramid locations as matrix rows plus its boxes.
struct SliceSample {
    trainer::Matrix features;
    std::vector<Box> boxes;
};

struct VolumeSample {
    std::string volume_id;
    std::vector<trainer::Matrix> slices;
    std::vector<Box> truth;
};

struct DetectRun {
    trainer::LinearHead head;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<double> train_loss;
    std::vector<double> val_sensitivity;
};

/// Flattened pyramid features of one slice.
trainer::Matrix slice_features(const embeddings::TokenGrid& grid, const Projection& proj, const PyramidSpec& spec);

/// Weights N(0, scale^2); class biases -ln((1 - prior) / prior), box biases 0.
trainer::LinearHead init_detect_head(std::size_t channels, std::uint64_t seed, double init_scale, double prior);

/// Loss of one slice; accumulates scale * gradient into grad_params.
DetectionLoss slice_loss(const trainer::LinearHead& head, const SliceSample& sample, const AnchorSet& anchors,
                         const DetectConfig& cfg, std::uint64_t seed, std::span<double> grad_params, double scale);

/// Scored, decoded, frame-clipped and NMS-filtered detections of one slice.
std::vector<Detection> predict_slice(const trainer::LinearHead& head, const trainer::Matrix& features,
                                     const AnchorSet& anchors, const DetectConfig& cfg, int slice_index);

std::vector<Detection> predict_volume(const trainer::LinearHead& head, const VolumeSample& volume,
                                      const AnchorSet& anchors, const DetectConfig& cfg);

/// Mean sensitivity at cfg.val_fp_points over the given volumes.
double validation_sensitivity(const trainer::LinearHead& head, std::span<const VolumeSample> volumes,
                              const AnchorSet& anchors, const DetectConfig& cfg);

/// AdamW with a per-step cosine schedule. Keeps the head with the best
/// validation sensitivity and stops after cfg.patience stale epochs. Without
/// validation volumes the final head is returned.
/// Throws NoAnnotations when no sample carries a box.
DetectRun train_detect_head(std::span<const SliceSample> train, std::span<const VolumeSample> val,
                            const DetectConfig& cfg);

nlohmann::json to_json(const DetectRun& run);
DetectRun detect_run_from_json(const nlohmann::json& j);

}  // namespace tomo::detect
