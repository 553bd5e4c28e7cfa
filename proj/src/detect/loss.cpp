// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/loss.hpp"

#include <cmath>

#include "tomo/error.hpp"
#include "tomo/trainer/loss.hpp"

namespace tomo::detect {

ScalarGrad focal_loss(double x, int y, const FocalConfig& cfg) {
    const double p = trainer::sigmoid(x);
    const double q = 1.0 - p;
    const double log_p = -trainer::softplus(-x);
    const double log_q = -trainer::softplus(x);
    const double g = cfg.gamma;
    const double t = (y != 0 ? 1.0 : 0.0) * (1.0 - cfg.smoothing) + 0.5 * cfg.smoothing;
    const double alpha_t = y != 0 ? cfg.alpha : 1.0 - cfg.alpha;

    const double qg = std::pow(q, g);
    const double pg = std::pow(p, g);
    const double pos = qg * -log_p;
    const double neg = pg * -log_q;
    const double d_pos = g * p * qg * log_p - qg * q;
    const double d_neg = -g * pg * q * log_q + pg * p;
    return {alpha_t * (t * pos + (1.0 - t) * neg), alpha_t * (t * d_pos + (1.0 - t) * d_neg)};
}

ScalarGrad smooth_l1(double x, double beta) {
    const double a = std::abs(x);
    if (a < beta) return {0.5 * x * x / beta, x / beta};
    return {a - 0.5 * beta, x > 0 ? 1.0 : -1.0};
}

DetectionLoss detection_loss(std::span<const double> logits, std::span<const Deltas> deltas,
                             const Assignment& assignment, std::span<const Deltas> targets, const LossConfig& cfg) {
    const std::size_t n = assignment.labels.size();
    if (logits.size() != n || deltas.size() != n || targets.size() != n) {
        fail(ErrorKind::LengthMismatch, "detection loss inputs differ in length");
    }
    DetectionLoss out;
    out.d_logits.assign(n, 0.0);
    out.d_deltas.assign(n, Deltas{});
    std::size_t n_cls = 0, n_pos = 0;
    for (const int l : assignment.labels) {
        if (l != kIgnore) ++n_cls;
        if (l >= 0) ++n_pos;
    }
    if (n_cls == 0) return out;
    const double box_weight = cfg.cls_to_box_ratio > 0.0 ? 1.0 / cfg.cls_to_box_ratio : 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const int l = assignment.labels[a];
        if (l == kIgnore) continue;
        const auto f = focal_loss(logits[a], l >= 0 ? 1 : 0, cfg.focal);
        out.cls += f.loss;
        out.d_logits[a] = f.grad / static_cast<double>(n_cls);
        if (l >= 0 && box_weight > 0.0) {
            for (std::size_t k = 0; k < 4; ++k) {
                const auto s = smooth_l1(deltas[a][k] - targets[a][k], cfg.beta);
                out.box += s.loss;
                out.d_deltas[a][k] = box_weight * s.grad / static_cast<double>(n_pos);
            }
        }
    }
    out.cls /= static_cast<double>(n_cls);
    if (n_pos > 0) out.box /= static_cast<double>(n_pos);
    out.total = out.cls + box_weight * out.box;
    return out;
}

}  // namespace tomo::detect
