// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"

namespace tomo::detect {

std::array<LevelSpec, kLevels> PyramidSpec::levels() const noexcept {
    const std::size_t p3 = 2 * native_side;
    const std::size_t p5 = native_side / 2;
    const std::size_t p6 = p5 / 2;
    const std::array<std::size_t, kLevels> sides{p3, native_side, p5, p6};
    std::array<LevelSpec, kLevels> out{};
    for (std::size_t l = 0; l < kLevels; ++l) {
        out[l] = {sides[l], kFrameSize / static_cast<double>(sides[l]), base_sizes[l]};
    }
    return out;
}

std::size_t PyramidSpec::location_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : levels()) n += l.side * l.side;
    return n;
}

Projection Projection::identity(std::size_t dim) {
    Projection p{trainer::LinearHead(dim, dim)};
    for (std::size_t i = 0; i < dim; ++i) p.linear.weight(i, i) = 1.0;
    return p;
}

Projection Projection::random(std::size_t in, std::size_t channels, std::uint64_t seed) {
    Rng rng(seed);
    return {trainer::LinearHead::random(in, channels, rng, 1.0 / std::sqrt(static_cast<double>(in)))};
}

trainer::Matrix Pyramid::flatten() const {
    std::size_t rows = 0;
    for (const auto& l : levels) rows += l.side * l.side;
    trainer::Matrix m(rows, levels[0].channels);
    auto out = m.data.begin();
    for (const auto& l : levels) out = std::copy(l.data.begin(), l.data.end(), out);
    return m;
}

FeatureMap upsample2x_bilinear(const FeatureMap& in) {
    FeatureMap out{2 * in.side, in.channels, std::vector<double>(4 * in.side * in.side * in.channels)};
    const auto n = static_cast<double>(in.side);
    const auto coord = [&](std::size_t i, std::size_t& lo, std::size_t& hi, double& t) {
        const double src = std::clamp((static_cast<double>(i) + 0.5) / 2.0 - 0.5, 0.0, n - 1.0);
        lo = static_cast<std::size_t>(std::floor(src));
        hi = std::min(lo + 1, in.side - 1);
        t = src - static_cast<double>(lo);
    };
    for (std::size_t r = 0; r < out.side; ++r) {
        std::size_t r0, r1;
        double tr;
        coord(r, r0, r1, tr);
        for (std::size_t c = 0; c < out.side; ++c) {
            std::size_t c0, c1;
            double tc;
            coord(c, c0, c1, tc);
            auto dst = out.at(r, c);
            const auto a = in.at(r0, c0), b = in.at(r0, c1), d = in.at(r1, c0), e = in.at(r1, c1);
            for (std::size_t k = 0; k < in.channels; ++k) {
                const double top = a[k] + (b[k] - a[k]) * tc;
                const double bot = d[k] + (e[k] - d[k]) * tc;
                dst[k] = top + (bot - top) * tr;
            }
        }
    }
    return out;
}

namespace {

template <typename Reduce>
FeatureMap pool2x2(const FeatureMap& in, Reduce reduce) {
    FeatureMap out{in.side / 2, in.channels, {}};
    out.data.resize(out.side * out.side * out.channels);
    for (std::size_t r = 0; r < out.side; ++r) {
        for (std::size_t c = 0; c < out.side; ++c) {
            auto dst = out.at(r, c);
            const auto a = in.at(2 * r, 2 * c), b = in.at(2 * r, 2 * c + 1);
            const auto d = in.at(2 * r + 1, 2 * c), e = in.at(2 * r + 1, 2 * c + 1);
            for (std::size_t k = 0; k < in.channels; ++k) dst[k] = reduce(a[k], b[k], d[k], e[k]);
        }
    }
    return out;
}

}  // namespace

FeatureMap maxpool2x2(const FeatureMap& in) {
    return pool2x2(in, [](double a, double b, double c, double d) { return std::max({a, b, c, d}); });
}

FeatureMap meanpool2x2(const FeatureMap& in) {
    return pool2x2(in, [](double a, double b, double c, double d) { return 0.25 * (a + b + c + d); });
}

Pyramid build_pyramid(const embeddings::TokenGrid& grid, const Projection& proj, const PyramidSpec& spec) {
    if (grid.grid_side() != spec.native_side || spec.native_side < 4) {
        fail(ErrorKind::BadGrid, "expected a " + std::to_string(spec.native_side) + "x" +
                                     std::to_string(spec.native_side) + " patch grid, got side " +
                                     std::to_string(grid.grid_side()));
    }
    if (proj.in_dim() != grid.dim()) fail(ErrorKind::DimMismatch, "projection input does not match token dim");
    const std::size_t side = spec.native_side;
    const std::size_t ch = proj.channels();
    FeatureMap p4{side, ch, std::vector<double>(side * side * ch)};
    std::vector<double> x(grid.dim());
    for (std::size_t i = 0; i < side * side; ++i) {
        const auto patch = grid.patch(i);
        std::copy(patch.begin(), patch.end(), x.begin());
        trainer::forward_linear(proj.linear, x, std::span<double>(p4.data.data() + i * ch, ch));
    }
    Pyramid p;
    p.levels[0] = upsample2x_bilinear(p4);
    p.levels[2] = maxpool2x2(p4);
    p.levels[3] = meanpool2x2(p.levels[2]);
    p.levels[1] = std::move(p4);
    return p;
}

AnchorSet generate_anchors(const PyramidSpec& spec) {
    AnchorSet set;
    set.levels = spec.levels();
    set.boxes.reserve(spec.anchor_count());
    for (std::size_t l = 0; l < kLevels; ++l) {
        const auto& lv = set.levels[l];
        set.offsets[l] = set.boxes.size();
        for (std::size_t r = 0; r < lv.side; ++r) {
            for (std::size_t c = 0; c < lv.side; ++c) {
                const double cx = (static_cast<double>(c) + 0.5) * lv.stride;
                const double cy = (static_cast<double>(r) + 0.5) * lv.stride;
                for (const double ratio : kAspectRatios) {
                    for (const double scale : kAnchorScales) {
                        const double area = (lv.base_size * scale) * (lv.base_size * scale);
                        const double w = std::sqrt(area / ratio);
                        set.boxes.push_back(Box::from_center(cx, cy, w, ratio * w));
                    }
                }
            }
        }
    }
    return set;
}

}  // namespace tomo::detect
