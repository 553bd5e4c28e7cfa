// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"

namespace tomo::embeddings {

namespace {

std::vector<double> unit_direction(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
        x = rng.normal();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

struct Directions {
    std::vector<double> density;
    std::vector<double> risk;
    std::vector<std::vector<double>> view_offset;
};

Directions directions(std::uint64_t seed, std::size_t dim) {
    Rng rng(derive_seed(seed, 0xd1));
    Directions d;
    d.density = unit_direction(rng, dim);
    d.risk = unit_direction(rng, dim);
    for (std::size_t v = 0; v < kAllViews.size(); ++v) {
        auto off = unit_direction(rng, dim);
        for (double& x : off) x *= 0.5;
        d.view_offset.push_back(std::move(off));
    }
    return d;
}

std::vector<double> exam_centre(std::uint64_t seed, const Exam& exam, const SignalSpec& spec, const Directions& dirs) {
    std::vector<double> centre(spec.dim, 0.0);
    std::optional<int> density_rank;
    if (exam.planted) density_rank = exam.planted->density_rank;
    else if (exam.density) density_rank = rank(*exam.density);
    if (density_rank) {
        const double a = spec.density_separation * (*density_rank - 1.5);
        for (std::size_t k = 0; k < spec.dim; ++k) centre[k] += a * dirs.density[k];
    }
    if (exam.planted && spec.risk_separation != 0.0) {
        const auto& h = exam.planted->hazard_profile;
        const double total = std::accumulate(h.begin(), h.end(), 0.0);
        const double a = spec.risk_separation * std::log(total + 1e-6);
        for (std::size_t k = 0; k < spec.dim; ++k) centre[k] += a * dirs.risk[k];
    }
    Rng rng(derive_seed(seed, fnv1a(exam.patient_id + "|" + exam.exam_id)));
    for (double& x : centre) x += spec.exam_noise * rng.normal();
    return centre;
}

std::vector<TokenGrid> tokens_for(std::uint64_t seed, const VolumeRef& ref, const SignalSpec& spec,
                                  const std::vector<double>& centre, const Directions& dirs) {
    const int n_slices = spec.n_slices > 0 ? spec.n_slices : ref.n_slices;
    if (n_slices < 1) fail(ErrorKind::EmptyInput, "volume " + ref.key() + " has no slices");
    const auto& offset = dirs.view_offset[static_cast<std::size_t>(ref.view)];
    Rng rng(derive_seed(seed, fnv1a(ref.key())));
    std::vector<TokenGrid> out;
    out.reserve(static_cast<std::size_t>(n_slices));
    for (int s = 0; s < n_slices; ++s) {
        TokenGrid g(spec.dim, spec.grid_side);
        const auto fill = [&](std::span<float> token) {
            for (std::size_t k = 0; k < spec.dim; ++k) {
                token[k] = static_cast<float>(centre[k] + offset[k] + spec.token_noise * rng.normal());
            }
        };
        fill(g.cls());
        for (std::size_t p = 0; p < g.patch_count(); ++p) fill(g.patch(p));
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace

std::vector<TokenGrid> synthesize_view(std::uint64_t seed, const Exam& exam, const VolumeRef& ref,
                                       const SignalSpec& spec) {
    const Directions dirs = directions(seed, spec.dim);
    return tokens_for(seed, ref, spec, exam_centre(seed, exam, spec, dirs), dirs);
}

void synthesize_store(std::uint64_t seed, const Dataset& dataset, const SignalSpec& spec, EmbeddingStore& store) {
    const Directions dirs = directions(seed, spec.dim);
    for (const auto& exam : dataset.exams) {
        const auto centre = exam_centre(seed, exam, spec, dirs);
        for (const auto& [view, ref] : exam.views) store.write_grids(ref, tokens_for(seed, ref, spec, centre, dirs));
    }
    store.flush();
}

// ---------------------------------------------------------------------------

TokenGrid featurize_pixels(const Image& prepared, std::size_t dim, std::uint64_t seed) {
    constexpr int patch = 14;
    const int side = static_cast<int>(kGridSide);
    if (prepared.height != side * patch || prepared.width != side * patch) {
        fail(ErrorKind::BadGrid, "pixel featurizer expects a 518 x 518 slice");
    }
    const auto cells = static_cast<std::size_t>(side * side);
    std::vector<double> mean(cells), mx(cells), sd(cells);
    for (int gr = 0; gr < side; ++gr) {
        for (int gc = 0; gc < side; ++gc) {
            double s = 0.0, s2 = 0.0, m = -1e300;
            for (int r = gr * patch; r < (gr + 1) * patch; ++r) {
                for (int c = gc * patch; c < (gc + 1) * patch; ++c) {
                    const double v = prepared.at(r, c);
                    s += v;
                    s2 += v * v;
                    m = std::max(m, v);
                }
            }
            const double n = patch * patch;
            const auto i = static_cast<std::size_t>(gr * side + gc);
            mean[i] = s / n;
            mx[i] = m;
            sd[i] = std::sqrt(std::max(0.0, s2 / n - mean[i] * mean[i]));
        }
    }
    // Window means of the patch means over (2r+1)^2 neighbourhoods, clipped at the border.
    const auto window = [&](int radius) {
        std::vector<double> out(cells);
        for (int gr = 0; gr < side; ++gr) {
            for (int gc = 0; gc < side; ++gc) {
                double s = 0.0;
                int n = 0;
                for (int r = std::max(0, gr - radius); r <= std::min(side - 1, gr + radius); ++r) {
                    for (int c = std::max(0, gc - radius); c <= std::min(side - 1, gc + radius); ++c) {
                        s += mean[static_cast<std::size_t>(r * side + c)];
                        ++n;
                    }
                }
                out[static_cast<std::size_t>(gr * side + gc)] = s / n;
            }
        }
        return out;
    };
    const auto w1 = window(1);
    const auto w2 = window(2);
    const auto w3 = window(3);

    std::vector<double> stats(cells * kPixelStats);
    for (std::size_t i = 0; i < cells; ++i) {
        double* f = stats.data() + i * kPixelStats;
        f[0] = mean[i];
        f[1] = mx[i];
        f[2] = sd[i];
        f[3] = w1[i];
        f[4] = w2[i];
        f[5] = w3[i];
        f[6] = std::max(0.0, mean[i] - w2[i]);
        f[7] = std::max(0.0, w1[i] - w3[i]);
        f[8] = std::max(0.0, mean[i] - w1[i]);
    }

    std::vector<double> proj;
    if (dim != kPixelStats) {
        Rng rng(derive_seed(seed, 0xfea7));
        proj.resize(dim * kPixelStats);
        for (double& p : proj) p = rng.normal() / std::sqrt(static_cast<double>(kPixelStats));
    }
    std::vector<float> patches(cells * dim);
    std::vector<double> cls(dim, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        const double* f = stats.data() + i * kPixelStats;
        for (std::size_t k = 0; k < dim; ++k) {
            double v = 0.0;
            if (proj.empty()) {
                v = f[k];
            } else {
                for (std::size_t j = 0; j < kPixelStats; ++j) v += proj[k * kPixelStats + j] * f[j];
            }
            patches[i * dim + k] = static_cast<float>(v);
            cls[k] += v / static_cast<double>(cells);
        }
    }
    std::vector<float> cls_f(cls.begin(), cls.end());
    return TokenGrid(std::move(cls_f), std::move(patches), kGridSide);
}

}  // namespace tomo::embeddings
