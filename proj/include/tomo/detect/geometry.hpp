// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "tomo/study.hpp"

namespace tomo::detect {

/// Axis-aligned box in 518-frame pixels, top-left corner plus size.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const noexcept { return x + 0.5 * w; }
    double cy() const noexcept { return y + 0.5 * h; }
    double area() const noexcept { return w * h; }

    static Box from_center(double cx, double cy, double w, double h) noexcept {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b) noexcept;

bool intersects(const Box& a, const Box& b) noexcept;

/// (dx, dy, dw, dh) relative to an anchor.
using Deltas = std::array<double, 4>;

/// Throws DegenerateAnchor when the anchor (or target) has non-positive size.
Deltas encode_box(const Box& anchor, const Box& target);
Box decode_box(const Box& anchor, const Deltas& deltas);

Box hflip(const Box& b, double frame = kFrameSize) noexcept;
Box vflip(const Box& b, double frame = kFrameSize) noexcept;

Box clip_to_frame(const Box& b, double frame = kFrameSize) noexcept;

}  // namespace tomo::detect
