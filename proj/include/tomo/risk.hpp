// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomo/stats.hpp"
#include "tomo/study.hpp"
#include "tomo/trainer/linear.hpp"
#include "tomo/trainer/loss.hpp"
#include "tomo/trainer/train_loop.hpp"

namespace tomo::risk {

inline constexpr std::size_t kHorizon = 5;

using Curve = std::array<double, kHorizon>;

struct SurvivalRecord {
    std::string exam_id;
    bool event = false;
    int event_year = 0;
    double followup_years = 0.0;
    Curve labels{};
    Curve mask{};

    double mask_sum() const noexcept;
    friend bool operator==(const SurvivalRecord&, const SurvivalRecord&) = default;
};

/// Cumulative labels (y_k = 1 from the event year on, fully observed) or
/// censored masks (m_k = 1 iff k <= floor(followup)).
/// Throws InvalidEventYear, and Unusable when nothing would be observed.
SurvivalRecord build_record(std::string exam_id, const Outcome& outcome);

/// R_k = 1 - exp(-sum_{j<=k} softplus(z_j)).
Curve hazards_to_risk(std::span<const double> z);

/// Per-sample masked binary cross-entropy on the risk curve, normalised by the
/// number of observed years, with the gradient taken with respect to the raw
/// outputs z. Probabilities are clamped to [1e-7, 1 - 1e-7].
/// Throws AllMasked.
trainer::LossGrad masked_bce(std::span<const double> z, const Curve& labels, const Curve& mask);

struct RiskConfig {
    trainer::TrainConfig train{.epochs = 100, .batch_size = 64, .lr = 1e-3, .lr_min = 0.0, .weight_decay = 1e-4};
    /// Seeds the negative subsample that balances the validation set.
    std::uint64_t val_seed = 0;
};

struct RiskRun {
    std::uint64_t seed = 0;
    trainer::LinearHead best_loss_head;
    trainer::LinearHead best_auroc_head;
    std::size_t best_loss_epoch = 0;
    std::size_t best_auroc_epoch = 0;
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_mean_auroc;
    std::size_t n_val = 0;
};

/// Balanced validation subset: all events plus an equal-size seeded sample of
/// non-events (or vice versa when non-events are scarcer).
std::vector<std::size_t> balanced_subset(std::span<const SurvivalRecord> records, std::uint64_t seed);

/// Trains the 5-output hazard head and keeps two checkpoints: minimum
/// validation loss and maximum mean validation AUROC.
/// Throws DegenerateSplit unless training has at least one event and one
/// non-event record.
RiskRun train_risk(const trainer::Matrix& x_train, std::span<const SurvivalRecord> train,
                   const trainer::Matrix& x_val, std::span<const SurvivalRecord> val, const RiskConfig& cfg);

struct YearResult {
    int year = 0;
    std::size_t n = 0;
    std::size_t n_positive = 0;
    /// nullopt when the year has a single class among observed records.
    std::optional<stats::Interval> auroc;
};

struct RiskEval {
    std::array<YearResult, kHorizon> years;
    /// Mean over the years that have an AUROC.
    std::optional<stats::Interval> macro;
};

/// Year-k AUROC on records with m_k = 1, labels y_k, scores R_k.
RiskEval eval_risk_curves(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                          const stats::BootstrapConfig& boot);
RiskEval eval_risk(const trainer::LinearHead& head, const trainer::Matrix& x, std::span<const SurvivalRecord> records,
                   const stats::BootstrapConfig& boot);

/// Mean of the available per-year point AUROCs, NaN when none.
double mean_auroc(std::span<const Curve> curves, std::span<const SurvivalRecord> records);

struct GroupResult {
    DensityCategory group = DensityCategory::A;
    std::size_t n = 0;
    std::size_t n_positive = 0;
    /// Set when the group has fewer events than the minimum.
    bool flagged = false;
    std::optional<RiskEval> eval;
};

std::vector<GroupResult> subgroup_risk(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                                       std::span<const DensityCategory> groups, std::size_t min_positives,
                                       const stats::BootstrapConfig& boot);

std::vector<Curve> predict_curves(const trainer::LinearHead& head, const trainer::Matrix& x);

nlohmann::json to_json(const SurvivalRecord& r);
SurvivalRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RiskEval& e);
nlohmann::json to_json(const GroupResult& g);
nlohmann::json to_json(const RiskRun& run);
RiskRun risk_run_from_json(const nlohmann::json& j);

}  // namespace tomo::risk
