// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tomo/detect/geometry.hpp"
#include "tomo/detect/pyramid.hpp"

namespace tomo::detect {

inline constexpr int kNegative = -1;
inline constexpr int kIgnore = -2;

struct AssignConfig {
    double pos_iou = 0.5;
    double neg_iou = 0.4;
    /// Sampled negatives per positive.
    double neg_ratio = 3.0;
};

/// labels[a] is the matched ground-truth index, kNegative or kIgnore.
struct Assignment {
    std::vector<int> labels;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// IoU >= pos_iou: positive to the best ground truth (ties to the lower
/// index). IoU < neg_iou: negative candidate. Otherwise ignored. Each ground
/// truth's best anchor is forced positive (with its own best match) when
/// their IoU is non-zero. Negatives are subsampled uniformly with the given
/// seed down to floor(neg_ratio * n_pos); no positives means no negatives.
/// Throws Usage unless neg_iou < pos_iou.
Assignment assign_anchors(std::span<const Box> anchors, std::span<const Box> truth, const AssignConfig& cfg,
                          std::uint64_t seed);

/// Same result as the generic overload, but only visits anchors whose
/// location can overlap a ground-truth box.
Assignment assign_anchors(const AnchorSet& anchors, std::span<const Box> truth, const AssignConfig& cfg,
                          std::uint64_t seed);

}  // namespace tomo::detect
