// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tomo/detect/geometry.hpp"
#include "tomo/embeddings/token_grid.hpp"
#include "tomo/trainer/linear.hpp"

namespace tomo::detect {

inline constexpr std::size_t kLevels = 4;
inline constexpr std::size_t kAnchorsPerLocation = 9;
inline constexpr std::array<double, 3> kAspectRatios{0.5, 1.0, 2.0};
inline constexpr std::array<double, 3> kAnchorScales{1.0, 1.26, 1.587};

struct LevelSpec {
    std::size_t side = 0;
    double stride = 0.0;
    double base_size = 0.0;
};

/// P3..P6 derived from the native token grid: 2x upsample, native, 2x2 max
/// pool, 2x2 mean reduction.
struct PyramidSpec {
    std::size_t native_side = embeddings::kGridSide;
    std::size_t channels = 256;
    std::array<double, kLevels> base_sizes{16.0, 32.0, 64.0, 128.0};

    std::array<LevelSpec, kLevels> levels() const noexcept;
    std::size_t location_count() const noexcept;
    std::size_t anchor_count() const noexcept { return location_count() * kAnchorsPerLocation; }
};

/// Per-location 1x1 projection from token dim D to C channels.
struct Projection {
    trainer::LinearHead linear;

    std::size_t in_dim() const noexcept { return linear.in_dim(); }
    std::size_t channels() const noexcept { return linear.out_dim(); }

    static Projection identity(std::size_t dim);
    static Projection random(std::size_t in, std::size_t channels, std::uint64_t seed);
};

struct FeatureMap {
    std::size_t side = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    std::span<const double> at(std::size_t r, std::size_t c) const noexcept {
        return {data.data() + (r * side + c) * channels, channels};
    }
    std::span<double> at(std::size_t r, std::size_t c) noexcept {
        return {data.data() + (r * side + c) * channels, channels};
    }
};

struct Pyramid {
    std::array<FeatureMap, kLevels> levels;

    /// All locations (level-major, row-major) as rows of a matrix.
    trainer::Matrix flatten() const;
};

FeatureMap upsample2x_bilinear(const FeatureMap& in);
FeatureMap maxpool2x2(const FeatureMap& in);
FeatureMap meanpool2x2(const FeatureMap& in);

/// Throws BadGrid when the patch grid is not the spec's native side, and
/// DimMismatch when the projection does not fit the token dim.
Pyramid build_pyramid(const embeddings::TokenGrid& grid, const Projection& proj, const PyramidSpec& spec);

struct AnchorSet {
    std::vector<Box> boxes;
    /// First anchor index of each level.
    std::array<std::size_t, kLevels> offsets{};
    std::array<LevelSpec, kLevels> levels{};

    std::size_t size() const noexcept { return boxes.size(); }
};

/// Anchors at every location in level-major, row-major order, 9 per location
/// (ratio-major, then scale). Ratio r = h/w, area (base * scale)^2, centres at
/// (i + 0.5) * stride with stride = 518 / side.
AnchorSet generate_anchors(const PyramidSpec& spec);

}  // namespace tomo::detect
