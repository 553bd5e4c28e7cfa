// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tomo/error.hpp"
#include "tomo/ingest/dicomweb.hpp"
#include "tomo/ingest/raw_format.hpp"
#include "tomo/rng.hpp"

namespace tomo::ingest {

namespace {

constexpr double kBackground = 0.15;
constexpr double kTextureGain = 0.25;
constexpr double kNoiseSd = 0.02;
constexpr int kTextureCell = 32;  // 518-frame pixels per texture cell

double texture_fraction(int density_rank) { return 0.1 + 0.2 * std::clamp(density_rank, 0, 3); }

// Coarse random on/off grid, bilinearly upsampled so the texture is smooth.
Image texture_field(Rng& rng, int height, int width, double fraction) {
    const int cells = static_cast<int>(std::ceil(kFrameSize / kTextureCell)) + 1;
    std::vector<double> grid(static_cast<std::size_t>(cells * cells));
    for (double& g : grid) g = rng.bernoulli(fraction) ? 1.0 : 0.0;
    Image field(height, width);
    const double cell_x = kTextureCell * width / kFrameSize;
    const double cell_y = kTextureCell * height / kFrameSize;
    for (int r = 0; r < height; ++r) {
        const double gy = (r + 0.5) / cell_y;
        const int y0 = std::min(static_cast<int>(gy), cells - 2);
        const double fy = gy - y0;
        for (int c = 0; c < width; ++c) {
            const double gx = (c + 0.5) / cell_x;
            const int x0 = std::min(static_cast<int>(gx), cells - 2);
            const double fx = gx - x0;
            const auto at = [&](int yy, int xx) { return grid[static_cast<std::size_t>(yy * cells + xx)]; };
            const double top = at(y0, x0) * (1 - fx) + at(y0, x0 + 1) * fx;
            const double bottom = at(y0 + 1, x0) * (1 - fx) + at(y0 + 1, x0 + 1) * fx;
            field.at(r, c) = top * (1 - fy) + bottom * fy;
        }
    }
    return field;
}

void render_blob(Image& img, const PlantedLesion& lesion, double amplitude) {
    const double sx = img.width / kFrameSize;
    const double sy = img.height / kFrameSize;
    const double cx = (lesion.x + lesion.w / 2.0) * sx;
    const double cy = (lesion.y + lesion.h / 2.0) * sy;
    const double sigx = lesion.w / 4.0 * sx;
    const double sigy = lesion.h / 4.0 * sy;
    const int r0 = std::max(0, static_cast<int>(cy - 4 * sigy));
    const int r1 = std::min(img.height - 1, static_cast<int>(cy + 4 * sigy) + 1);
    const int c0 = std::max(0, static_cast<int>(cx - 4 * sigx));
    const int c1 = std::min(img.width - 1, static_cast<int>(cx + 4 * sigx) + 1);
    for (int r = r0; r <= r1; ++r) {
        const double dy = (r + 0.5 - cy) / sigy;
        for (int c = c0; c <= c1; ++c) {
            const double dx = (c + 0.5 - cx) / sigx;
            img.at(r, c) += amplitude * std::exp(-0.5 * (dx * dx + dy * dy));
        }
    }
}

}  // namespace

Phantom generate_phantom(std::uint64_t seed, const PhantomSpec& spec, const VolumeRef& ref) {
    if (spec.n_slices < 1 || spec.height < 1 || spec.width < 1) fail(ErrorKind::Usage, "phantom needs a positive shape");
    Rng texture_rng(derive_seed(seed, 0));
    Rng noise_rng(derive_seed(seed, 1));
    Rng lesion_rng(derive_seed(seed, 2));

    Phantom out;
    out.density_rank = spec.density_rank;
    out.hazard_profile = spec.hazard_profile;

    const Image texture = texture_field(texture_rng, spec.height, spec.width, texture_fraction(spec.density_rank));
    out.slices.reserve(static_cast<std::size_t>(spec.n_slices));
    for (int s = 0; s < spec.n_slices; ++s) {
        Image slice(spec.height, spec.width);
        for (std::size_t i = 0; i < slice.size(); ++i) {
            slice.pixels[i] = kBackground + kTextureGain * texture.pixels[i] + noise_rng.normal(0.0, kNoiseSd);
        }
        out.slices.push_back(std::move(slice));
    }

    std::vector<PlantedLesion> lesions = spec.lesions;
    if (lesions.empty()) {
        for (int i = 0; i < spec.lesion_count; ++i) {
            PlantedLesion l;
            l.w = lesion_rng.uniform(spec.min_lesion_size, spec.max_lesion_size);
            l.h = lesion_rng.uniform(spec.min_lesion_size, spec.max_lesion_size);
            l.x = lesion_rng.uniform(8.0, kFrameSize - 8.0 - l.w);
            l.y = lesion_rng.uniform(8.0, kFrameSize - 8.0 - l.h);
            l.slice_index = spec.n_slices >= 3 ? static_cast<int>(lesion_rng.between(1, spec.n_slices - 2))
                                               : static_cast<int>(lesion_rng.below(spec.n_slices));
            lesions.push_back(l);
        }
    }

    VolumeRef vref = ref;
    vref.n_slices = spec.n_slices;
    for (const auto& l : lesions) {
        if (l.slice_index < 0 || l.slice_index >= spec.n_slices) fail(ErrorKind::Usage, "lesion slice outside volume");
        render_blob(out.slices[static_cast<std::size_t>(l.slice_index)], l, spec.lesion_amplitude);
        for (const int nb : {l.slice_index - 1, l.slice_index + 1}) {
            if (nb >= 0 && nb < spec.n_slices) {
                render_blob(out.slices[static_cast<std::size_t>(nb)], l, spec.lesion_amplitude / 2.0);
            }
        }
        BoxAnnotation box;
        box.volume = vref;
        box.slice_index = l.slice_index;
        box.x = l.x;
        box.y = l.y;
        box.w = l.w;
        box.h = l.h;
        out.lesions.push_back(box);
    }
    for (auto& slice : out.slices) {
        for (double& p : slice.pixels) p = std::max(p, 0.0);
    }
    return out;
}

Dataset generate_cohort(std::uint64_t seed, const CohortSpec& spec) {
    if (spec.n_exams < 1) fail(ErrorKind::Usage, "cohort needs at least one exam");
    Rng rng(seed);
    const auto n = static_cast<std::size_t>(spec.n_exams);

    std::vector<int> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = static_cast<int>(i % kDensityClasses);
    shuffle(std::span(ranks), rng);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    std::vector<std::string> split(n, "test");
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(n)));
    for (std::size_t k = 0; k < n; ++k) {
        if (k < n_train) split[order[k]] = "train";
        else if (k < n_train + n_val) split[order[k]] = "val";
    }

    static const std::vector<std::pair<std::string, double>> races = {
        {"White", 0.70}, {"Black", 0.10}, {"Asian", 0.08}, {"Hispanic", 0.07}, {"Other", 0.05}};

    Dataset ds;
    ds.exams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char pid[32];
        char eid[32];
        char date[16];
        std::snprintf(pid, sizeof pid, "P%05zu", i);
        std::snprintf(eid, sizeof eid, "E%05zu", i);
        std::snprintf(date, sizeof date, "%04d-%02d-%02d", static_cast<int>(rng.between(2012, 2019)),
                      static_cast<int>(rng.between(1, 12)), static_cast<int>(rng.between(1, 28)));

        Exam exam;
        exam.exam_id = eid;
        exam.patient_id = pid;
        for (const ViewKind v : kAllViews) exam.views[v] = VolumeRef{pid, eid, v, spec.n_slices, date};

        Demographics demo;
        demo.age_years = std::round(rng.uniform(40.0, 80.0) * 10.0) / 10.0;
        double u = rng.uniform();
        demo.race = races.back().first;
        for (const auto& [name, p] : races) {
            if (u < p) {
                demo.race = name;
                break;
            }
            u -= p;
        }
        exam.demographics = demo;

        PlantedTruth truth;
        truth.density_rank = ranks[i];
        const double h = rng.bernoulli(spec.high_risk_fraction) ? spec.high_hazard : spec.low_hazard;
        truth.hazard_profile.fill(h);
        exam.planted = truth;
        exam.density = density_from_rank(ranks[i]);

        Outcome outcome;
        for (int k = 1; k <= 5; ++k) {
            if (rng.uniform() < 1.0 - std::exp(-truth.hazard_profile[static_cast<std::size_t>(k - 1)])) {
                outcome.event = true;
                outcome.event_year = k;
                break;
            }
        }
        if (outcome.event) {
            outcome.followup_years = outcome.event_year - 1 + rng.uniform(0.05, 1.0);
        } else if (rng.bernoulli(spec.censored_fraction)) {
            outcome.followup_years = rng.uniform(1.0, 5.0);
        } else {
            outcome.followup_years = rng.uniform(5.0, 10.0);
        }
        outcome.followup_years = std::round(outcome.followup_years * 100.0) / 100.0;
        exam.outcome = outcome;
        exam.split = split[i];
        ds.exams.push_back(std::move(exam));
    }
    return ds;
}

std::uint64_t write_volume_archive(const std::filesystem::path& root, const VolumeRef& ref,
                                   const std::vector<Image>& slices) {
    const auto dir = root / "studies" / ref.exam_id / "series" / series_uid(ref) / "instances";
    std::vector<Instance> listing;
    std::uint64_t written = 0;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        Instance inst;
        inst.sop_instance_uid = ref.exam_id + "." + series_uid(ref) + "." + std::to_string(i + 1);
        inst.instance_number = static_cast<int>(i + 1);
        const std::string bytes = encode_raw_slice(slices[i]);
        write_file_atomic(dir / inst.sop_instance_uid, bytes);
        written += bytes.size();
        listing.push_back(std::move(inst));
    }
    write_file_atomic(dir / "index.json", make_qido_instances(listing));
    return written;
}

}  // namespace tomo::ingest
