// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "tomo/detect/geometry.hpp"

namespace tomo::detect {

struct Detection {
    Box box;
    double score = 0.0;
    int slice_index = 0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Score descending, then x, y, w, h, slice ascending.
bool detection_order(const Detection& a, const Detection& b) noexcept;

/// Greedy suppression: a detection is dropped when its IoU with an already
/// kept one exceeds the threshold. Output follows detection_order.
std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold);

/// Pools detections from all slices and runs 2D NMS ignoring the slice index;
/// survivors keep their originating slice.
std::vector<Detection> aggregate_volume(std::span<const std::vector<Detection>> per_slice, double iou_threshold);

nlohmann::json to_json(const Detection& d);
Detection detection_from_json(const nlohmann::json& j);

}  // namespace tomo::detect
