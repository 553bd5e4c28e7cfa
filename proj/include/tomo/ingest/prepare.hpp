// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tomo/image.hpp"

namespace tomo::ingest {

inline constexpr int kPreparedSize = 518;

/// A 518 x 518 slice with every pixel in [0, 1].
struct PreparedSlice {
    Image image;
};

/// Bilinear resize with the half-pixel-center convention:
/// src = (dst + 0.5) * in / out - 0.5, clamped to the valid range.
Image resize_bilinear(const Image& src, int out_height, int out_width);

/// Per-image min-max normalization to [0, 1]. Constant images map to zeros.
void normalize_minmax(Image& img);

/// Resize to 518 x 518 then min-max normalize. Non-finite input pixels are
/// replaced by the finite minimum before resizing.
/// Throws EmptyImage when the input has no pixels or no finite pixel.
PreparedSlice prepare_slice(const Image& raw);

}  // namespace tomo::ingest
