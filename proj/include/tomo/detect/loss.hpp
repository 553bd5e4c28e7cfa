// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "tomo/detect/assign.hpp"
#include "tomo/detect/geometry.hpp"

namespace tomo::detect {

struct FocalConfig {
    double alpha = 0.25;
    double gamma = 2.0;
    double smoothing = 0.0;
};

struct ScalarGrad {
    double loss = 0.0;
    double grad = 0.0;
};

/// Sigmoid focal loss on a logit. The smoothed target t = y(1 - s) + s/2
/// weights the positive and negative focal terms; alpha_t follows the hard
/// label y.
ScalarGrad focal_loss(double logit, int y, const FocalConfig& cfg);

/// Per-coordinate 0.5 x^2 / beta for |x| < beta, else |x| - 0.5 beta.
ScalarGrad smooth_l1(double x, double beta = 1.0);

struct LossConfig {
    FocalConfig focal;
    double beta = 1.0;
    /// Classification-to-box loss ratio; the box term is weighted by its
    /// inverse.
    double cls_to_box_ratio = 1.0;
};

struct DetectionLoss {
    double total = 0.0;
    double cls = 0.0;
    double box = 0.0;
    /// d total / d logit per anchor (zero for ignored anchors).
    std::vector<double> d_logits;
    /// d total / d predicted deltas per anchor (zero except positives).
    std::vector<Deltas> d_deltas;
};

/// total = mean focal loss over positive and sampled negative anchors
///       + (1 / cls_to_box_ratio) * mean smooth-L1 over positives,
/// where each positive's smooth-L1 is summed over its four deltas.
/// `targets[a]` is only read for positive anchors.
DetectionLoss detection_loss(std::span<const double> logits, std::span<const Deltas> deltas,
                             const Assignment& assignment, std::span<const Deltas> targets, const LossConfig& cfg);

}  // namespace tomo::detect
