// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/prepare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tomo/error.hpp"

namespace tomo::ingest {

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

// Source taps for each output coordinate along one axis.
std::vector<Tap> axis_taps(int in, int out) {
    std::vector<Tap> taps(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
        double src = (i + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const int lo = static_cast<int>(std::floor(src));
        const int hi = std::min(lo + 1, in - 1);
        taps[static_cast<std::size_t>(i)] = {lo, hi, src - lo};
    }
    return taps;
}

}  // namespace

Image resize_bilinear(const Image& src, int out_height, int out_width) {
    if (src.height < 1 || src.width < 1) fail(ErrorKind::EmptyImage, "resize of empty image");
    const auto ty = axis_taps(src.height, out_height);
    const auto tx = axis_taps(src.width, out_width);
    Image out(out_height, out_width);
    for (int r = 0; r < out_height; ++r) {
        const Tap& y = ty[static_cast<std::size_t>(r)];
        for (int c = 0; c < out_width; ++c) {
            const Tap& x = tx[static_cast<std::size_t>(c)];
            const double top = src.at(y.lo, x.lo) * (1.0 - x.frac) + src.at(y.lo, x.hi) * x.frac;
            const double bottom = src.at(y.hi, x.lo) * (1.0 - x.frac) + src.at(y.hi, x.hi) * x.frac;
            out.at(r, c) = top * (1.0 - y.frac) + bottom * y.frac;
        }
    }
    return out;
}

void normalize_minmax(Image& img) {
    if (img.pixels.empty()) return;
    const auto [mn, mx] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    const double lo = *mn;
    const double range = *mx - lo;
    if (!(range > 0.0)) {
        std::fill(img.pixels.begin(), img.pixels.end(), 0.0);
        return;
    }
    for (double& p : img.pixels) p = std::clamp((p - lo) / range, 0.0, 1.0);
}

PreparedSlice prepare_slice(const Image& raw) {
    if (raw.height < 1 || raw.width < 1 || raw.pixels.empty()) fail(ErrorKind::EmptyImage, "image has no pixels");
    double finite_min = std::numeric_limits<double>::infinity();
    bool any_nonfinite = false;
    for (const double p : raw.pixels) {
        if (std::isfinite(p)) finite_min = std::min(finite_min, p);
        else any_nonfinite = true;
    }
    if (!std::isfinite(finite_min)) fail(ErrorKind::EmptyImage, "image has no finite pixel");

    PreparedSlice out;
    if (any_nonfinite) {
        Image cleaned = raw;
        for (double& p : cleaned.pixels) {
            if (!std::isfinite(p)) p = finite_min;
        }
        out.image = resize_bilinear(cleaned, kPreparedSize, kPreparedSize);
    } else {
        out.image = resize_bilinear(raw, kPreparedSize, kPreparedSize);
    }
    normalize_minmax(out.image);
    return out;
}

}  // namespace tomo::ingest
