// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "tomo/embeddings/store.hpp"
#include "tomo/embeddings/token_grid.hpp"
#include "tomo/image.hpp"
#include "tomo/study.hpp"

namespace tomo::embeddings {

/// Class-conditional Gaussian token model standing in for a frozen backbone.
///
/// Each exam gets a centre
///   density_separation * (rank - 1.5) * u_density
/// + risk_separation * ln(sum of planted hazards) * u_risk
/// + exam_noise * N(0, I)
/// where u_density and u_risk are seeded random unit directions. Every
/// token is centre + view offset + token_noise * N(0, I).
struct SignalSpec {
    std::size_t dim = 64;
    std::size_t grid_side = 4;
    /// 0 takes the slice count from each VolumeRef.
    int n_slices = 0;
    double density_separation = 1.0;
    double risk_separation = 0.0;
    double token_noise = 1.0;
    double exam_noise = 0.25;
};

/// Token grids for one volume. Deterministic per (seed, volume key).
std::vector<TokenGrid> synthesize_view(std::uint64_t seed, const Exam& exam, const VolumeRef& ref,
                                       const SignalSpec& spec);

/// Fills the store with every view of every exam in the dataset.
void synthesize_store(std::uint64_t seed, const Dataset& dataset, const SignalSpec& spec, EmbeddingStore& store);

/// Hand-crafted local image statistics in place of backbone patch tokens:
/// per 14 x 14 patch its mean, max, std, window means over 3/5/7-patch
/// neighbourhoods and the matching centre-minus-surround contrasts. With
/// dim == kPixelStats the statistics are returned as is; otherwise they are
/// mapped through a seeded random projection.
inline constexpr std::size_t kPixelStats = 9;

TokenGrid featurize_pixels(const Image& prepared, std::size_t dim = kPixelStats, std::uint64_t seed = 0);

}  // namespace tomo::embeddings
