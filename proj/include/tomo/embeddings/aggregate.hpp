// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "tomo/embeddings/token_grid.hpp"
#include "tomo/study.hpp"

namespace tomo::embeddings {

enum class AggregationMode { ClsMean, ClsMeanStd, PatchMean, PatchMeanStd };

std::string_view to_string(AggregationMode mode) noexcept;
/// Accepts "patch-mean-std", "PatchMeanStd" and the like.
AggregationMode parse_aggregation_mode(std::string_view text);

inline constexpr bool has_std(AggregationMode m) noexcept {
    return m == AggregationMode::ClsMeanStd || m == AggregationMode::PatchMeanStd;
}

/// Per-view output dimension: D for the mean modes, 2D with std.
inline constexpr std::size_t view_dim(AggregationMode m, std::size_t dim) noexcept {
    return has_std(m) ? 2 * dim : dim;
}

/// Reduces a view's slices to one vector.
///   ClsMean / ClsMeanStd     statistics of the CLS token over slices
///   PatchMean / PatchMeanStd statistics over every patch of every slice
/// Std is the population std (divide by N). Output is [mean..., std...].
/// Statistics are accumulated with a streaming merge so the result does not
/// depend on slice order beyond rounding.
/// Throws EmptyInput for no slices and DimMismatch when dims differ.
std::vector<double> aggregate_view(std::span<const TokenGrid> slices, AggregationMode mode);

/// Probe input: per-view vectors concatenated in LCC, RCC, LMLO, RMLO order.
struct StudyFeatures {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    friend bool operator==(const StudyFeatures&, const StudyFeatures&) = default;
};

/// Throws MissingView when a view is absent and DimMismatch when sizes differ.
StudyFeatures assemble_study(const std::map<ViewKind, std::vector<double>>& views);

}  // namespace tomo::embeddings
