// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/augment.hpp"

#include <algorithm>
#include <cmath>

namespace tomo::detect {

Image hflip_image(const Image& img) {
    Image out(img.height, img.width);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = img.at(r, img.width - 1 - c);
    return out;
}

Image vflip_image(const Image& img) {
    Image out(img.height, img.width);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = img.at(img.height - 1 - r, c);
    return out;
}

Image zoom_image(const Image& img, double factor) {
    Image out(img.height, img.width);
    const double ch = 0.5 * img.height;
    const double cw = 0.5 * img.width;
    for (int r = 0; r < img.height; ++r) {
        const double sy = (r + 0.5 - ch) / factor + ch - 0.5;
        for (int c = 0; c < img.width; ++c) {
            const double sx = (c + 0.5 - cw) / factor + cw - 0.5;
            if (sy < -0.5 || sx < -0.5 || sy > img.height - 0.5 || sx > img.width - 0.5) continue;
            const double y = std::clamp(sy, 0.0, img.height - 1.0);
            const double x = std::clamp(sx, 0.0, img.width - 1.0);
            const int y0 = static_cast<int>(std::floor(y));
            const int x0 = static_cast<int>(std::floor(x));
            const int y1 = std::min(y0 + 1, img.height - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double ty = y - y0, tx = x - x0;
            const double top = img.at(y0, x0) + (img.at(y0, x1) - img.at(y0, x0)) * tx;
            const double bot = img.at(y1, x0) + (img.at(y1, x1) - img.at(y1, x0)) * tx;
            out.at(r, c) = top + (bot - top) * ty;
        }
    }
    return out;
}

Box zoom_box(const Box& b, double factor, double frame) noexcept {
    const double c = 0.5 * frame;
    return {(b.x - c) * factor + c, (b.y - c) * factor + c, b.w * factor, b.h * factor};
}

std::vector<Box> sample_dropout(Rng& rng, std::span<const Box> truth, const AugmentSpec& spec, double frame) {
    std::vector<Box> rects;
    const auto count = rng.between(spec.dropout_min_count, spec.dropout_max_count);
    for (std::int64_t i = 0; i < count; ++i) {
        for (int attempt = 0; attempt < spec.dropout_attempts; ++attempt) {
            const double w = rng.uniform(spec.dropout_min_size, spec.dropout_max_size);
            const double h = rng.uniform(spec.dropout_min_size, spec.dropout_max_size);
            const Box r{rng.uniform(0.0, frame - w), rng.uniform(0.0, frame - h), w, h};
            const bool clash =
                std::any_of(truth.begin(), truth.end(), [&](const Box& t) { return intersects(r, t); });
            if (!clash) {
                rects.push_back(r);
                break;
            }
        }
    }
    return rects;
}

Augmented augment_geometry(const Image& image, std::span<const Box> boxes, const AugmentSpec& spec,
                           std::uint64_t seed) {
    Rng rng(seed);
    Augmented out;
    out.image = image;
    out.boxes.assign(boxes.begin(), boxes.end());
    const double frame_w = image.width;
    const double frame_h = image.height;

    if (rng.bernoulli(spec.p_hflip)) {
        out.image = hflip_image(out.image);
        for (auto& b : out.boxes) b = hflip(b, frame_w);
        out.hflipped = true;
    }
    if (rng.bernoulli(spec.p_vflip)) {
        out.image = vflip_image(out.image);
        for (auto& b : out.boxes) b = vflip(b, frame_h);
        out.vflipped = true;
    }
    if (rng.bernoulli(spec.p_zoom)) {
        for (int attempt = 0; attempt < spec.zoom_attempts; ++attempt) {
            const double z = rng.uniform(spec.zoom_min, spec.zoom_max);
            std::vector<Box> zoomed;
            bool ok = true;
            for (const auto& b : out.boxes) {
                const Box zb = zoom_box(b, z, frame_w);
                ok = ok && zb.w >= spec.box_min_w && zb.w <= spec.box_max_w && zb.h >= spec.box_min_h &&
                     zb.h <= spec.box_max_h && zb.x >= 0.0 && zb.y >= 0.0 && zb.x + zb.w <= frame_w &&
                     zb.y + zb.h <= frame_h;
                zoomed.push_back(zb);
            }
            if (ok) {
                out.image = zoom_image(out.image, z);
                out.boxes = std::move(zoomed);
                out.zoom = z;
                break;
            }
        }
    }
    if (rng.bernoulli(spec.p_dropout)) {
        out.dropout = sample_dropout(rng, out.boxes, spec, std::min(frame_w, frame_h));
        for (const auto& r : out.dropout) {
            const int r0 = std::max(0, static_cast<int>(std::floor(r.y)));
            const int r1 = std::min(image.height, static_cast<int>(std::ceil(r.y + r.h)));
            const int c0 = std::max(0, static_cast<int>(std::floor(r.x)));
            const int c1 = std::min(image.width, static_cast<int>(std::ceil(r.x + r.w)));
            for (int y = r0; y < r1; ++y)
                for (int x = c0; x < c1; ++x) out.image.at(y, x) = 0.0;
        }
    }
    if (rng.bernoulli(spec.p_gamma)) {
        out.gamma = rng.uniform(spec.gamma_min, spec.gamma_max);
        for (auto& p : out.image.pixels) p = std::pow(std::max(p, 0.0), out.gamma);
    }
    if (rng.bernoulli(spec.p_noise)) {
        for (auto& p : out.image.pixels) p += rng.normal(0.0, spec.noise_sd);
    }
    return out;
}

}  // namespace tomo::detect
