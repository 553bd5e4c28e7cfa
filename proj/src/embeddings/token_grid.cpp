// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/token_grid.hpp"

#include <cmath>
#include <string>

#include "tomo/error.hpp"

namespace tomo::embeddings {

TokenGrid::TokenGrid(std::size_t dim, std::size_t grid_side)
    : dim_(dim), side_(grid_side), cls_(dim, 0.0f), patches_(dim * grid_side * grid_side, 0.0f) {
    if (dim == 0 || grid_side == 0) fail(ErrorKind::DimMismatch, "token grid needs positive dim and side");
}

TokenGrid::TokenGrid(std::vector<float> cls, std::vector<float> patches, std::size_t grid_side)
    : dim_(cls.size()), side_(grid_side), cls_(std::move(cls)), patches_(std::move(patches)) {
    if (dim_ == 0 || side_ == 0 || patches_.size() != dim_ * side_ * side_) {
        fail(ErrorKind::DimMismatch, "patch payload " + std::to_string(patches_.size()) + " does not match " +
                                         std::to_string(side_) + "^2 x " + std::to_string(dim_));
    }
    if (!all_finite()) fail(ErrorKind::EmptyInput, "token grid has non-finite entries");
}

bool TokenGrid::all_finite() const noexcept {
    for (const float v : cls_) {
        if (!std::isfinite(v)) return false;
    }
    for (const float v : patches_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace tomo::embeddings
