// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tomo::embeddings {

inline constexpr std::size_t kTokenDim = 768;
inline constexpr std::size_t kGridSide = 37;  // 518 / 14
inline constexpr std::size_t kPatchCount = kGridSide * kGridSide;

/// One slice of backbone output: a CLS vector and a row-major grid of patch
/// vectors, all of dimension dim(). The canonical shape is 1 + 1369 tokens of
/// 768 features; smaller grids are accepted for desk-scale experiments.
class TokenGrid {
public:
    explicit TokenGrid(std::size_t dim = kTokenDim, std::size_t grid_side = kGridSide);

    /// Throws DimMismatch on inconsistent sizes and EmptyInput on non-finite values.
    TokenGrid(std::vector<float> cls, std::vector<float> patches, std::size_t grid_side);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t grid_side() const noexcept { return side_; }
    std::size_t patch_count() const noexcept { return side_ * side_; }
    bool is_canonical() const noexcept { return dim_ == kTokenDim && side_ == kGridSide; }

    std::span<float> cls() noexcept { return cls_; }
    std::span<const float> cls() const noexcept { return cls_; }

    std::span<float> patch(std::size_t index) noexcept { return {patches_.data() + index * dim_, dim_}; }
    std::span<const float> patch(std::size_t index) const noexcept {
        return {patches_.data() + index * dim_, dim_};
    }
    std::span<const float> patch(std::size_t row, std::size_t col) const noexcept {
        return patch(row * side_ + col);
    }

    std::span<float> patches() noexcept { return patches_; }
    std::span<const float> patches() const noexcept { return patches_; }

    bool all_finite() const noexcept;

private:
    std::size_t dim_;
    std::size_t side_;
    std::vector<float> cls_;
    std::vector<float> patches_;
};

}  // namespace tomo::embeddings
