// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/nms.hpp"

#include <algorithm>
#include <tuple>

#include "tomo/error.hpp"

namespace tomo::detect {

bool detection_order(const Detection& a, const Detection& b) noexcept {
    return std::make_tuple(-a.score, a.box.x, a.box.y, a.box.w, a.box.h, a.slice_index) <
           std::make_tuple(-b.score, b.box.x, b.box.y, b.box.w, b.box.h, b.slice_index);
}

std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold) {
    std::vector<Detection> sorted(detections.begin(), detections.end());
    std::sort(sorted.begin(), sorted.end(), detection_order);
    std::vector<Detection> kept;
    for (const auto& d : sorted) {
        const bool suppressed =
            std::any_of(kept.begin(), kept.end(), [&](const Detection& k) { return iou(k.box, d.box) > iou_threshold; });
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<Detection> aggregate_volume(std::span<const std::vector<Detection>> per_slice, double iou_threshold) {
    std::vector<Detection> pooled;
    for (const auto& s : per_slice) pooled.insert(pooled.end(), s.begin(), s.end());
    return nms(pooled, iou_threshold);
}

nlohmann::json to_json(const Detection& d) {
    return {{"x", d.box.x}, {"y", d.box.y}, {"w", d.box.w}, {"h", d.box.h}, {"score", d.score},
            {"slice_index", d.slice_index}};
}

Detection detection_from_json(const nlohmann::json& j) {
    try {
        return {{j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()},
                j.at("score").get<double>(),
                j.value("slice_index", 0)};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("detection: ") + e.what());
    }
}

}  // namespace tomo::detect
