// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomo/detect/geometry.hpp"

namespace tomo::detect {

inline const std::vector<double> kFpPoints{1.0, 2.0, 3.0, 4.0};
inline const std::vector<double> kFpPointsExtended{1.0, 2.0, 3.0, 4.0, 5.0};

struct VolumeTruth {
    std::string volume_id;
    std::vector<Box> boxes;
};

struct ScoredBox {
    std::string volume_id;
    Box box;
    double score = 0.0;
    int slice_index = 0;
};

/// max(diagonal / 2, 20) pixels around the ground-truth centre.
double hit_radius(const Box& truth) noexcept;
bool center_hit(const Box& truth, const Box& prediction) noexcept;

struct FrocPoint {
    double threshold = 0.0;
    double fp_per_volume = 0.0;
    double sensitivity = 0.0;
};

struct FrocResult {
    std::vector<double> fp_points;
    std::vector<double> sensitivities;
    double average = 0.0;
    /// One point per distinct score threshold, descending threshold.
    std::vector<FrocPoint> curve;
    std::size_t n_volumes = 0;
    std::size_t n_lesions = 0;
};

/// Greedy per-volume matching in descending score order: a prediction is a
/// true positive when its centre hits an unmatched lesion (nearest first),
/// otherwise a false positive. Sensitivity at f is the best sensitivity over
/// thresholds whose mean false positives per volume stay <= f.
/// Throws NoVolumes for an empty truth set and MissingKey for predictions on
/// unknown volumes.
FrocResult froc(std::span<const VolumeTruth> truth, std::span<const ScoredBox> predictions,
                std::span<const double> fp_points);

nlohmann::json to_json(const FrocResult& r);
/// "fp_per_volume,sensitivity,threshold" rows.
std::string froc_curve_csv(const FrocResult& r);

}  // namespace tomo::detect
