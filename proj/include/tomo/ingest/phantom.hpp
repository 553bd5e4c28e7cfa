// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "tomo/image.hpp"
#include "tomo/study.hpp"

namespace tomo::ingest {

struct PlantedLesion {
    int slice_index = 0;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct PhantomSpec {
    int n_slices = 8;
    int height = 518;
    int width = 518;
    int lesion_count = 0;
    int density_rank = 0;
    std::array<double, 5> hazard_profile{};
    /// When non-empty, used instead of drawing `lesion_count` random lesions.
    std::vector<PlantedLesion> lesions;
    double lesion_amplitude = 0.6;
    /// Lesion size range (518-frame pixels) for randomly drawn lesions.
    double min_lesion_size = 20.0;
    double max_lesion_size = 80.0;
};

/// Synthetic volume with known ground truth. Lesion boxes are in the 518
/// frame regardless of the rendered height/width.
struct Phantom {
    std::vector<Image> slices;
    std::vector<BoxAnnotation> lesions;
    int density_rank = 0;
    std::array<double, 5> hazard_profile{};
};

/// Deterministic per seed. Background and texture are drawn before any
/// lesion, so adding lesions never changes the background. Lesions render as
/// Gaussian blobs (sigma = size / 4) at full amplitude on their slice and half
/// amplitude on the neighbouring slices. The density rank sets the fraction
/// of bright fibroglandular texture.
Phantom generate_phantom(std::uint64_t seed, const PhantomSpec& spec, const VolumeRef& ref = {});

/// Cohort layout of synthetic exams with labels, outcomes and demographics.
struct CohortSpec {
    int n_exams = 16;
    int n_slices = 3;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    /// Share of exams whose planted hazard is high.
    double high_risk_fraction = 0.3;
    double high_hazard = 0.45;
    double low_hazard = 0.004;
    /// Share of event-free exams censored before 5 years of follow-up.
    double censored_fraction = 0.15;
};

/// Deterministic synthetic cohort: complete four-view exams, balanced density
/// ranks, planted hazard profiles with simulated outcomes and train/val/test splits.
Dataset generate_cohort(std::uint64_t seed, const CohortSpec& spec);

/// Writes a volume as a file-backed DICOMweb tree under `root`:
///   studies/<exam>/series/<view>/instances/index.json   (QIDO listing)
///   studies/<exam>/series/<view>/instances/<sop uid>    (RAW1 slice)
/// Returns the bytes written.
std::uint64_t write_volume_archive(const std::filesystem::path& root, const VolumeRef& ref,
                                   const std::vector<Image>& slices);

}  // namespace tomo::ingest
