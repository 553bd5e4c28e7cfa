// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tomo/embeddings/aggregate.hpp"
#include "tomo/embeddings/store.hpp"
#include "tomo/study.hpp"

namespace tomo::embeddings {

/// Reads all four views of an exam from the store and assembles the study
/// vector. Throws MissingView when the exam lacks a view and MissingKey when
/// the store lacks its grids.
StudyFeatures load_study_features(const EmbeddingStore& store, const Exam& exam, AggregationMode mode);

}  // namespace tomo::embeddings
