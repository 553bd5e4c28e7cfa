// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "context.hpp"

namespace tomo::cli {

std::vector<const Exam*> exams_in_split(const Dataset& ds, const std::string& split) {
    std::vector<const Exam*> out;
    for (const auto& e : ds.exams) {
        if (!e.complete) continue;
        if (split == "all" || (e.split && *e.split == split)) out.push_back(&e);
    }
    return out;
}

trainer::Matrix feature_matrix(const embeddings::EmbeddingStore& store, std::span<const Exam* const> exams,
                               embeddings::AggregationMode mode) {
    trainer::Matrix m;
    for (std::size_t i = 0; i < exams.size(); ++i) {
        const auto f = embeddings::load_study_features(store, *exams[i], mode);
        if (i == 0) m = trainer::Matrix(exams.size(), f.size());
        std::copy(f.values.begin(), f.values.end(), m.row(i).begin());
    }
    return m;
}

}  // namespace tomo::cli
