// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/assign.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"

namespace tomo::detect {

namespace {

struct Overlaps {
    std::vector<double> best_iou;
    std::vector<int> best_gt;
    std::vector<double> gt_best_iou;
    std::vector<std::size_t> gt_best_anchor;

    Overlaps(std::size_t n_anchors, std::size_t n_truth)
        : best_iou(n_anchors, 0.0), best_gt(n_anchors, -1), gt_best_iou(n_truth, 0.0), gt_best_anchor(n_truth, 0) {}

    // Must be called with anchors in ascending order per gt, and gts in
    // ascending order per anchor, to keep the lowest-index tie rule.
    void visit(std::size_t a, std::size_t g, double v) {
        if (v > best_iou[a]) {
            best_iou[a] = v;
            best_gt[a] = static_cast<int>(g);
        }
        if (v > gt_best_iou[g]) {
            gt_best_iou[g] = v;
            gt_best_anchor[g] = a;
        }
    }
};

void check(const AssignConfig& cfg) {
    if (!(cfg.neg_iou < cfg.pos_iou)) fail(ErrorKind::Usage, "negative IoU threshold must be below positive");
    if (!(cfg.neg_ratio >= 0.0)) fail(ErrorKind::Usage, "negative ratio must be non-negative");
}

Assignment finish(const Overlaps& ov, const AssignConfig& cfg, std::uint64_t seed) {
    const std::size_t n = ov.best_iou.size();
    Assignment out;
    out.labels.assign(n, kIgnore);
    std::vector<std::size_t> candidates;
    for (std::size_t a = 0; a < n; ++a) {
        if (ov.best_gt[a] >= 0 && ov.best_iou[a] >= cfg.pos_iou) {
            out.labels[a] = ov.best_gt[a];
        }
    }
    for (std::size_t g = 0; g < ov.gt_best_iou.size(); ++g) {
        if (ov.gt_best_iou[g] > 0.0) {
            const std::size_t a = ov.gt_best_anchor[g];
            out.labels[a] = ov.best_gt[a];
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (out.labels[a] >= 0) {
            ++out.n_pos;
        } else if (ov.best_iou[a] < cfg.neg_iou) {
            candidates.push_back(a);
        }
    }
    const auto keep = std::min<std::size_t>(
        candidates.size(), static_cast<std::size_t>(std::floor(cfg.neg_ratio * static_cast<double>(out.n_pos))));
    if (keep > 0) {
        Rng rng(seed);
        shuffle(std::span<std::size_t>(candidates), rng);
        for (std::size_t i = 0; i < keep; ++i) out.labels[candidates[i]] = kNegative;
    }
    out.n_neg = keep;
    return out;
}

}  // namespace

Assignment assign_anchors(std::span<const Box> anchors, std::span<const Box> truth, const AssignConfig& cfg,
                          std::uint64_t seed) {
    check(cfg);
    Overlaps ov(anchors.size(), truth.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        for (std::size_t g = 0; g < truth.size(); ++g) ov.visit(a, g, iou(anchors[a], truth[g]));
    }
    return finish(ov, cfg, seed);
}

Assignment assign_anchors(const AnchorSet& anchors, std::span<const Box> truth, const AssignConfig& cfg,
                          std::uint64_t seed) {
    check(cfg);
    Overlaps ov(anchors.size(), truth.size());
    const double max_scale = *std::max_element(kAnchorScales.begin(), kAnchorScales.end());
    const double min_ratio = *std::min_element(kAspectRatios.begin(), kAspectRatios.end());
    const double max_ratio = *std::max_element(kAspectRatios.begin(), kAspectRatios.end());
    // Sorted candidate anchors per gt keep visit order ascending.
    for (std::size_t g = 0; g < truth.size(); ++g) {
        const Box& t = truth[g];
        for (std::size_t l = 0; l < kLevels; ++l) {
            const auto& lv = anchors.levels[l];
            const double side = lv.base_size * max_scale;
            const double half_w = 0.5 * side / std::sqrt(min_ratio);
            const double half_h = 0.5 * side * std::sqrt(max_ratio);
            const auto range = [&](double lo, double hi, double half) {
                const long first = static_cast<long>(std::floor((lo - half) / lv.stride - 0.5)) - 1;
                const long last = static_cast<long>(std::ceil((hi + half) / lv.stride - 0.5)) + 1;
                const long n = static_cast<long>(lv.side);
                return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(std::clamp(first, 0L, n)),
                                                           static_cast<std::size_t>(std::clamp(last + 1, 0L, n)));
            };
            const auto [c0, c1] = range(t.x, t.x + t.w, half_w);
            const auto [r0, r1] = range(t.y, t.y + t.h, half_h);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = c0; c < c1; ++c) {
                    const std::size_t base = anchors.offsets[l] + (r * lv.side + c) * kAnchorsPerLocation;
                    for (std::size_t k = 0; k < kAnchorsPerLocation; ++k) {
                        const double v = iou(anchors.boxes[base + k], t);
                        if (v > 0.0) ov.visit(base + k, g, v);
                    }
                }
            }
        }
    }
    return finish(ov, cfg, seed);
}

}  // namespace tomo::detect
