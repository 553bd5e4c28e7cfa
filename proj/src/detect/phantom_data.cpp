// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/phantom_data.hpp"

#include "tomo/embeddings/synthetic.hpp"
#include "tomo/ingest/phantom.hpp"
#include "tomo/ingest/prepare.hpp"
#include "tomo/rng.hpp"

namespace tomo::detect {

PhantomVolume make_phantom_volume(std::uint64_t seed, const std::string& volume_id, const PhantomDetectSpec& spec,
                                  const Projection& proj, const PyramidSpec& pyramid) {
    Rng rng(derive_seed(seed, 0x1e51));
    ingest::PhantomSpec ps;
    ps.n_slices = spec.n_slices;
    ps.lesion_count = static_cast<int>(rng.between(spec.min_lesions, spec.max_lesions));
    ps.lesion_amplitude = spec.lesion_amplitude;
    const VolumeRef ref{"P-" + volume_id, volume_id, ViewKind::LCC, spec.n_slices, ""};
    const auto ph = ingest::generate_phantom(seed, ps, ref);

    PhantomVolume out;
    out.sample.volume_id = volume_id;
    for (const auto& img : ph.slices) {
        const auto prepared = ingest::prepare_slice(img);
        out.sample.slices.push_back(slice_features(embeddings::featurize_pixels(prepared.image), proj, pyramid));
    }
    for (const auto& l : ph.lesions) {
        out.sample.truth.push_back({l.x, l.y, l.w, l.h});
        out.lesion_slices.push_back(l.slice_index);
    }
    return out;
}

std::vector<SliceSample> annotated_slices(const PhantomVolume& volume) {
    std::vector<SliceSample> out;
    for (std::size_t s = 0; s < volume.sample.slices.size(); ++s) {
        SliceSample smp;
        for (std::size_t l = 0; l < volume.sample.truth.size(); ++l) {
            if (volume.lesion_slices[l] == static_cast<int>(s)) smp.boxes.push_back(volume.sample.truth[l]);
        }
        if (smp.boxes.empty()) continue;
        smp.features = volume.sample.slices[s];
        out.push_back(std::move(smp));
    }
    return out;
}

}  // namespace tomo::detect
