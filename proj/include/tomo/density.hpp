// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomo/embeddings/aggregate.hpp"
#include "tomo/study.hpp"
#include "tomo/trainer/linear.hpp"
#include "tomo/trainer/train_loop.hpp"

namespace tomo::density {

inline constexpr std::size_t kClasses = 4;

struct LabeledFeatures {
    std::string exam_id;
    std::vector<double> x;
    DensityCategory label = DensityCategory::A;
};

struct DensityConfig {
    embeddings::AggregationMode mode = embeddings::AggregationMode::PatchMeanStd;
    double fraction = 1.0;
    std::uint64_t seed = 0;
    /// Seeds the training subset independently of `seed`, so different
    /// aggregation modes can share one subset.
    std::uint64_t fraction_seed = 0;
    trainer::TrainConfig train{.epochs = 75, .batch_size = 64, .lr = 1e-3, .lr_min = 0.0, .weight_decay = 1e-4};
};

struct DensityRun {
    embeddings::AggregationMode mode = embeddings::AggregationMode::PatchMeanStd;
    double fraction = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t fraction_seed = 0;
    std::size_t n_train = 0;
    /// Head at the epoch with minimum validation loss.
    trainer::LinearHead head;
    std::size_t best_epoch = 0;
    std::vector<double> train_loss;
    std::vector<double> val_loss;
};

/// Per-class subsample of round(fraction * support) indices (at least one per
/// present class), returned in ascending order.
std::vector<std::size_t> stratified_fraction(std::span<const DensityCategory> labels, double fraction,
                                             std::uint64_t seed);

/// Trains the 4-way linear probe with softmax cross-entropy. Without a
/// validation set the checkpoint falls back to minimum training loss.
/// Throws EmptyClass when the (subsampled) training set misses a class.
DensityRun train_density(std::span<const LabeledFeatures> train, std::span<const LabeledFeatures> val,
                         const DensityConfig& cfg);

/// Predicted category; ties go to the lower rank.
DensityCategory predict_density(const trainer::LinearHead& head, std::span<const double> x);

struct ConfusionMatrix {
    /// counts[reference][predicted]
    std::array<std::array<std::size_t, kClasses>, kClasses> counts{};

    std::size_t total() const noexcept;
    std::size_t trace() const noexcept;
    std::size_t support(std::size_t reference) const noexcept;
    void add(DensityCategory reference, DensityCategory predicted) noexcept;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct DensityMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::array<double, kClasses> per_class_f1{};
    /// Classes without reference support; left out of macro-F1.
    std::vector<DensityCategory> excluded;
    ConfusionMatrix confusion;
    double binary_accuracy = 0.0;
    double adjacent_error_rate = 0.0;
};

/// Throws EmptyTestSet when there are no samples.
DensityMetrics evaluate_predictions(std::span<const DensityCategory> references,
                                    std::span<const DensityCategory> predictions);
DensityMetrics evaluate_density(const trainer::LinearHead& head, std::span<const LabeledFeatures> test);
DensityMetrics metrics_from_confusion(const ConfusionMatrix& cm);

/// Accuracy after merging {A, B} and {C, D}.
double binary_collapse(const ConfusionMatrix& cm);

/// Fraction of all predictions that miss the reference by more than one rank.
double adjacent_error_rate(const ConfusionMatrix& cm);

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const DensityMetrics& m);
nlohmann::json to_json(const DensityRun& run);
DensityRun run_from_json(const nlohmann::json& j);

}  // namespace tomo::density
