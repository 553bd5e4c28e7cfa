// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/error.hpp"

namespace tomo::detect {

double iou(const Box& a, const Box& b) noexcept {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

bool intersects(const Box& a, const Box& b) noexcept {
    return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

Deltas encode_box(const Box& anchor, const Box& target) {
    if (!(anchor.w > 0.0 && anchor.h > 0.0)) fail(ErrorKind::DegenerateAnchor, "anchor must have positive size");
    if (!(target.w > 0.0 && target.h > 0.0)) fail(ErrorKind::DegenerateAnchor, "target must have positive size");
    return {(target.cx() - anchor.cx()) / anchor.w, (target.cy() - anchor.cy()) / anchor.h,
            std::log(target.w / anchor.w), std::log(target.h / anchor.h)};
}

Box decode_box(const Box& anchor, const Deltas& d) {
    if (!(anchor.w > 0.0 && anchor.h > 0.0)) fail(ErrorKind::DegenerateAnchor, "anchor must have positive size");
    const double cx = anchor.cx() + d[0] * anchor.w;
    const double cy = anchor.cy() + d[1] * anchor.h;
    return Box::from_center(cx, cy, anchor.w * std::exp(d[2]), anchor.h * std::exp(d[3]));
}

Box hflip(const Box& b, double frame) noexcept { return {frame - b.x - b.w, b.y, b.w, b.h}; }

Box vflip(const Box& b, double frame) noexcept { return {b.x, frame - b.y - b.h, b.w, b.h}; }

Box clip_to_frame(const Box& b, double frame) noexcept {
    const double x0 = std::clamp(b.x, 0.0, frame);
    const double y0 = std::clamp(b.y, 0.0, frame);
    const double x1 = std::clamp(b.x + b.w, 0.0, frame);
    const double y1 = std::clamp(b.y + b.h, 0.0, frame);
    return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace tomo::detect
