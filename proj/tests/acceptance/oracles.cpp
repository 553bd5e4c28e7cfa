// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>

#include "acceptance/harness.hpp"
#include "tomo/detect/head.hpp"
#include "tomo/detect/loss.hpp"
#include "tomo/embeddings/aggregate.hpp"
#include "tomo/risk.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/grad_check.hpp"
#include "tomo/trainer/loss.hpp"

namespace tomo::acceptance {

using embeddings::AggregationMode;
using embeddings::TokenGrid;

namespace {

// Two passes in extended precision over the flattened value list.
std::vector<double> two_pass_oracle(const std::vector<TokenGrid>& slices, AggregationMode mode) {
    const std::size_t dim = slices.front().dim();
    const bool cls = mode == AggregationMode::ClsMean || mode == AggregationMode::ClsMeanStd;
    std::vector<long double> sum(dim, 0.0L), sq(dim, 0.0L);
    long double n = 0;
    const auto visit = [&](auto&& fn) {
        for (const auto& g : slices) {
            if (cls) {
                fn(g.cls());
            } else {
                for (std::size_t p = 0; p < g.patch_count(); ++p) fn(g.patch(p));
            }
        }
    };
    visit([&](std::span<const float> v) {
        for (std::size_t d = 0; d < dim; ++d) sum[d] += v[d];
        n += 1;
    });
    std::vector<long double> mean(dim);
    for (std::size_t d = 0; d < dim; ++d) mean[d] = sum[d] / n;
    visit([&](std::span<const float> v) {
        for (std::size_t d = 0; d < dim; ++d) {
            const long double e = v[d] - mean[d];
            sq[d] += e * e;
        }
    });
    std::vector<double> out(mean.begin(), mean.end());
    if (embeddings::has_std(mode)) {
        for (std::size_t d = 0; d < dim; ++d) out.push_back(static_cast<double>(std::sqrt(sq[d] / n)));
    }
    return out;
}

// Smallest distance of any positive box residual from the smooth-L1 kink.
bool near_kink(const trainer::LinearHead& head, const detect::SliceSample& sample, const detect::AnchorSet& anchors,
               const detect::DetectConfig& cfg, std::uint64_t seed) {
    const auto as = detect::assign_anchors(anchors, sample.boxes, cfg.assign, seed);
    std::vector<double> out(detect::kHeadOutputs);
    for (std::size_t a = 0; a < as.labels.size(); ++a) {
        if (as.labels[a] < 0) continue;
        const std::size_t k = a % detect::kAnchorsPerLocation;
        trainer::forward_linear(head, sample.features.row(a / detect::kAnchorsPerLocation), out);
        const auto target = detect::encode_box(anchors.boxes[a], sample.boxes[static_cast<std::size_t>(as.labels[a])]);
        for (std::size_t c = 0; c < 4; ++c) {
            const double r = out[detect::kAnchorsPerLocation + 4 * k + c] - target[c];
            if (std::abs(std::abs(r) - cfg.loss.beta) < 1e-2) return true;
        }
    }
    return false;
}

double relative_error(double got, double want) {
    const double diff = std::abs(got - want);
    return diff == 0.0 ? 0.0 : diff / std::max(std::abs(want), 1e-300);
}

}  // namespace

Outcome aggregation_criterion() {
    Checks checks;
    Stopwatch clock;
    Rng rng(20261019);
    const AggregationMode modes[] = {AggregationMode::ClsMean, AggregationMode::ClsMeanStd, AggregationMode::PatchMean,
                                     AggregationMode::PatchMeanStd};
    double worst = 0.0;
    bool shapes_ok = true;
    for (int trial = 0; trial < 500; ++trial) {
        const AggregationMode mode = modes[rng.below(4)];
        const bool cls = mode == AggregationMode::ClsMean || mode == AggregationMode::ClsMeanStd;
        const std::size_t n_slices = static_cast<std::size_t>(cls ? rng.between(1, 8) : rng.between(1, 3));
        std::vector<float> offset(embeddings::kTokenDim);
        for (auto& o : offset) o = static_cast<float>(rng.uniform(-3.0, 3.0));
        std::vector<TokenGrid> slices;
        for (std::size_t s = 0; s < n_slices; ++s) {
            TokenGrid g;
            for (std::size_t d = 0; d < g.dim(); ++d) g.cls()[d] = offset[d] + static_cast<float>(rng.uniform(-1, 1));
            if (!cls) {
                auto p = g.patches();
                for (std::size_t i = 0; i < p.size(); ++i) {
                    p[i] = offset[i % g.dim()] + static_cast<float>(rng.uniform(-1, 1));
                }
            }
            slices.push_back(std::move(g));
        }
        const auto got = embeddings::aggregate_view(slices, mode);
        const auto want = two_pass_oracle(slices, mode);
        shapes_ok &= got.size() == embeddings::view_dim(mode, embeddings::kTokenDim) && got.size() == want.size();
        for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
            worst = std::max(worst, relative_error(got[i], want[i]));
        }
    }
    checks.expect(shapes_ok, "per-view dims match the mode");
    checks.expect(worst <= 1e-6, "500 random views agree with the two-pass oracle, max rel err " + fmt(worst));

    for (const auto mode : {AggregationMode::ClsMean, AggregationMode::ClsMeanStd}) {
        std::map<ViewKind, std::vector<double>> views;
        for (const auto v : kAllViews) views[v] = std::vector<double>(embeddings::view_dim(mode, 768), 0.5);
        const auto study = embeddings::assemble_study(views);
        const std::size_t want_view = embeddings::has_std(mode) ? 1536 : 768;
        const std::size_t want_study = embeddings::has_std(mode) ? 6144 : 3072;
        checks.expect(views.begin()->second.size() == want_view && study.size() == want_study,
                      std::string(embeddings::to_string(mode)) + " gives " + std::to_string(want_view) + " per view, " +
                          std::to_string(study.size()) + " per study");
    }
    const double secs = clock.seconds();
    checks.expect(secs < 30.0, "runtime " + fmt(secs, 3) + " s under 30 s");
    return checks.outcome();
}

Outcome gradient_criterion() {
    Checks checks;
    Rng rng(7);
    constexpr double kTol = 1e-5;
    constexpr int kInstances = 100;

    const auto report = [&](const std::string& name, double worst) {
        checks.expect(worst <= kTol, name + " max rel err " + fmt(worst, 3));
    };

    {
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            const std::size_t k = static_cast<std::size_t>(rng.between(2, 8));
            const std::size_t target = rng.below(k);
            std::vector<double> z(k);
            for (auto& v : z) v = rng.normal(0.0, 2.0);
            const auto r = trainer::grad_check(
                [&](std::span<const double> p) { return trainer::softmax_ce(p, target); }, z, kTol);
            worst = std::max(worst, r.max_rel_error);
        }
        report("softmax cross-entropy", worst);
    }
    {
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            std::vector<double> z(risk::kHorizon);
            for (auto& v : z) v = rng.normal(-1.0, 2.0);
            risk::Curve y{}, m{};
            for (std::size_t k = 0; k < risk::kHorizon; ++k) {
                y[k] = rng.bernoulli(0.4) ? 1.0 : 0.0;
                m[k] = rng.bernoulli(0.7) ? 1.0 : 0.0;
            }
            m[rng.below(risk::kHorizon)] = 1.0;
            const auto r = trainer::grad_check(
                [&](std::span<const double> p) { return risk::masked_bce(p, y, m); }, z, kTol);
            worst = std::max(worst, r.max_rel_error);
        }
        report("masked BCE", worst);
    }
    {
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            detect::FocalConfig cfg{rng.uniform(0.05, 0.95), rng.uniform(0.0, 3.0), rng.uniform(0.0, 0.2)};
            const int y = rng.bernoulli(0.5) ? 1 : 0;
            const std::vector<double> x{rng.normal(0.0, 3.0)};
            const auto r = trainer::grad_check(
                [&](std::span<const double> p) {
                    const auto s = detect::focal_loss(p[0], y, cfg);
                    return trainer::LossGrad{s.loss, {s.grad}};
                },
                x, kTol);
            worst = std::max(worst, r.max_rel_error);
        }
        report("focal loss with label smoothing", worst);
    }
    {
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            const double beta = rng.uniform(0.1, 2.0);
            double x = 0;
            do {
                x = rng.normal(0.0, 2.0);
            } while (std::abs(std::abs(x) - beta) < 1e-2);
            const std::vector<double> xs{x};
            const auto r = trainer::grad_check(
                [&](std::span<const double> p) {
                    const auto s = detect::smooth_l1(p[0], beta);
                    return trainer::LossGrad{s.loss, {s.grad}};
                },
                xs, kTol);
            worst = std::max(worst, r.max_rel_error);
        }
        report("smooth-L1 away from the kink", worst);
    }
    {
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            const std::size_t n = static_cast<std::size_t>(rng.between(4, 24));
            detect::Assignment as;
            as.labels.resize(n);
            std::vector<detect::Deltas> targets(n);
            for (std::size_t a = 0; a < n; ++a) {
                const double u = rng.uniform();
                as.labels[a] = u < 0.3 ? static_cast<int>(rng.below(3)) : (u < 0.8 ? detect::kNegative : detect::kIgnore);
                for (auto& c : targets[a]) c = rng.normal(0.0, 0.5);
            }
            as.labels[0] = 0;
            for (int l : as.labels) {
                as.n_pos += l >= 0;
                as.n_neg += l == detect::kNegative;
            }
            detect::LossConfig cfg;
            cfg.focal = {rng.uniform(0.1, 0.9), rng.uniform(0.0, 3.0), rng.uniform(0.0, 0.2)};
            cfg.beta = rng.uniform(0.1, 1.0);
            cfg.cls_to_box_ratio = rng.uniform(0.5, 4.0);

            std::vector<double> params(5 * n);
            for (std::size_t a = 0; a < n; ++a) {
                params[a] = rng.normal(0.0, 2.0);
                for (std::size_t c = 0; c < 4; ++c) {
                    double d = 0;
                    do {
                        d = rng.normal(0.0, 1.0);
                    } while (std::abs(std::abs(d - targets[a][c]) - cfg.beta) < 1e-2);
                    params[n + 4 * a + c] = d;
                }
            }
            const auto objective = [&](std::span<const double> p) {
                std::vector<detect::Deltas> deltas(n);
                for (std::size_t a = 0; a < n; ++a) {
                    for (std::size_t c = 0; c < 4; ++c) deltas[a][c] = p[n + 4 * a + c];
                }
                const auto l = detect::detection_loss(p.subspan(0, n), deltas, as, targets, cfg);
                trainer::LossGrad out{l.total, std::vector<double>(5 * n)};
                for (std::size_t a = 0; a < n; ++a) {
                    out.grad[a] = l.d_logits[a];
                    for (std::size_t c = 0; c < 4; ++c) out.grad[n + 4 * a + c] = l.d_deltas[a][c];
                }
                return out;
            };
            worst = std::max(worst, trainer::grad_check(objective, params, kTol).max_rel_error);
        }
        report("detection loss over logits and deltas", worst);
    }
    {
        // End to end through the head on a reduced pyramid.
        detect::DetectConfig cfg;
        cfg.pyramid.native_side = 4;
        cfg.pyramid.channels = 3;
        const auto anchors = detect::generate_anchors(cfg.pyramid);
        const std::size_t locations = cfg.pyramid.location_count();
        double worst = 0;
        for (int t = 0; t < kInstances; ++t) {
            detect::SliceSample sample{trainer::Matrix(locations, cfg.pyramid.channels), {}};
            for (auto& v : sample.features.data) v = rng.normal();
            const auto& a = anchors.boxes[rng.below(anchors.size())];
            sample.boxes.push_back(detect::Box::from_center(a.cx() + rng.uniform(-3, 3), a.cy() + rng.uniform(-3, 3),
                                                            a.w * rng.uniform(0.8, 1.25), a.h * rng.uniform(0.8, 1.25)));
            cfg.loss.beta = 0.05;
            const auto head = detect::init_detect_head(cfg.pyramid.channels, static_cast<std::uint64_t>(t), 0.5, 0.2);
            const std::uint64_t seed = rng.next();
            if (near_kink(head, sample, anchors, cfg, seed)) {
                --t;
                continue;
            }
            const auto objective = [&](std::span<const double> p) {
                trainer::LinearHead h = head;
                std::copy(p.begin(), p.end(), h.params().begin());
                trainer::LossGrad out{0.0, std::vector<double>(p.size(), 0.0)};
                out.loss = detect::slice_loss(h, sample, anchors, cfg, seed, out.grad, 1.0).total;
                return out;
            };
            const std::vector<double> p(head.params().begin(), head.params().end());
            worst = std::max(worst, trainer::grad_check(objective, p, kTol).max_rel_error);
        }
        report("slice loss through the head", worst);
    }
    return checks.outcome();
}

Outcome risk_curve_criterion() {
    Checks checks;
    Rng rng(3);
    std::size_t monotone = 0, in_range = 0, invariant = 0;
    constexpr std::size_t kTrials = 10000;
    for (std::size_t t = 0; t < kTrials; ++t) {
        std::vector<double> z(risk::kHorizon);
        const double scale = rng.uniform(0.1, 20.0);
        for (auto& v : z) v = rng.normal(0.0, scale);
        const auto r = risk::hazards_to_risk(z);
        bool ok = true, bounded = true;
        for (std::size_t k = 0; k < risk::kHorizon; ++k) {
            bounded &= r[k] >= 0.0 && r[k] <= 1.0;
            if (k > 0) ok &= r[k] >= r[k - 1];
        }
        monotone += ok;
        in_range += bounded;

        risk::Curve y{}, m{};
        for (std::size_t k = 0; k < risk::kHorizon; ++k) {
            y[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            m[k] = rng.bernoulli(0.6) ? 1.0 : 0.0;
        }
        m[rng.below(risk::kHorizon)] = 1.0;
        risk::Curve flipped = y;
        for (std::size_t k = 0; k < risk::kHorizon; ++k) {
            if (m[k] == 0.0 && rng.bernoulli(0.7)) flipped[k] = 1.0 - flipped[k];
        }
        const auto a = risk::masked_bce(z, y, m);
        const auto b = risk::masked_bce(z, flipped, m);
        invariant += a.loss == b.loss && a.grad == b.grad;
    }
    checks.expect(monotone == kTrials, std::to_string(monotone) + "/10000 curves non-decreasing");
    checks.expect(in_range == kTrials, std::to_string(in_range) + "/10000 curves within [0, 1]");
    checks.expect(invariant == kTrials, std::to_string(invariant) + "/10000 masked flips leave loss and gradient unchanged");
    return checks.outcome();
}

}  // namespace tomo::acceptance
