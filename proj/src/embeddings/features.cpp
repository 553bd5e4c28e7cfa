// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/features.hpp"

#include "tomo/error.hpp"

namespace tomo::embeddings {

StudyFeatures load_study_features(const EmbeddingStore& store, const Exam& exam, AggregationMode mode) {
    std::map<ViewKind, std::vector<double>> views;
    for (const ViewKind v : kAllViews) {
        const auto it = exam.views.find(v);
        if (it == exam.views.end()) {
            fail(ErrorKind::MissingView, "exam " + exam.exam_id + " lacks view " + std::string(to_string(v)));
        }
        const auto grids = store.read_grids(it->second);
        views[v] = aggregate_view(grids, mode);
    }
    return assemble_study(views);
}

}  // namespace tomo::embeddings
