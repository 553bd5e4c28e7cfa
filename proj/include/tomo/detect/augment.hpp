// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tomo/detect/geometry.hpp"
#include "tomo/image.hpp"
#include "tomo/rng.hpp"

namespace tomo::detect {

struct AugmentSpec {
    double p_hflip = 0.5;
    double p_vflip = 0.5;

    double p_zoom = 0.5;
    double zoom_min = 0.8;
    double zoom_max = 1.5;
    double box_min_w = 15.0;
    double box_max_w = 206.0;
    double box_min_h = 9.0;
    double box_max_h = 182.0;
    int zoom_attempts = 10;

    double p_dropout = 0.5;
    int dropout_min_count = 15;
    int dropout_max_count = 20;
    double dropout_min_size = 20.0;
    double dropout_max_size = 40.0;
    int dropout_attempts = 50;

    double p_gamma = 0.5;
    double gamma_min = 0.7;
    double gamma_max = 1.5;

    double p_noise = 0.5;
    double noise_sd = 0.02;
};

struct Augmented {
    Image image;
    std::vector<Box> boxes;
    bool hflipped = false;
    bool vflipped = false;
    double zoom = 1.0;
    std::vector<Box> dropout;
    double gamma = 1.0;
};

Image hflip_image(const Image& img);
Image vflip_image(const Image& img);

/// Bilinear zoom about the image centre; samples outside become 0.
Image zoom_image(const Image& img, double factor);
Box zoom_box(const Box& b, double factor, double frame = kFrameSize) noexcept;

/// Rejection-sampled rectangles that never intersect a ground-truth box.
/// A rectangle that cannot be placed within the attempt budget is skipped.
std::vector<Box> sample_dropout(Rng& rng, std::span<const Box> truth, const AugmentSpec& spec,
                                double frame = kFrameSize);

/// Applies flips, a constrained zoom, coarse dropout, gamma contrast and
/// Gaussian noise. Zoom factors that push any box outside the frame or the
/// size limits are redrawn; after the attempt budget zoom is skipped.
/// Photometric steps leave boxes unchanged. Deterministic per seed.
Augmented augment_geometry(const Image& image, std::span<const Box> boxes, const AugmentSpec& spec,
                           std::uint64_t seed);

}  // namespace tomo::detect
