// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tomo/detect/head.hpp"

namespace tomo::detect {

struct PhantomDetectSpec {
    int n_slices = 3;
    int min_lesions = 1;
    int max_lesions = 2;
    double lesion_amplitude = 0.6;
};

struct PhantomVolume {
    VolumeSample sample;
    /// Per-lesion slice index, aligned with sample.truth.
    std::vector<int> lesion_slices;
};

/// Generates a phantom volume, prepares each slice and turns it into pyramid
/// features through the pixel-statistics featurizer.
PhantomVolume make_phantom_volume(std::uint64_t seed, const std::string& volume_id, const PhantomDetectSpec& spec,
                                  const Projection& proj, const PyramidSpec& pyramid);

/// Slices that carry at least one lesion, with their boxes.
std::vector<SliceSample> annotated_slices(const PhantomVolume& volume);

}  // namespace tomo::detect
