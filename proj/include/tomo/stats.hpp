// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tomo/study.hpp"

namespace tomo::stats {

struct BootstrapConfig {
    std::size_t repetitions = 1000;
    std::uint64_t seed = 0;
    double level = 0.95;
    /// Worker threads; results do not depend on this.
    unsigned threads = 1;
};

struct Interval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Metric evaluated on a multiset of sample indices. May return NaN when the
/// resample is degenerate (e.g. a single class for AUROC); such repetitions
/// are left out of the percentile interval.
using IndexMetric = std::function<double(std::span<const std::size_t>)>;

/// Percentile bootstrap. Repetition r draws n indices with replacement from
/// Rng(derive_seed(seed, r)), so the interval is identical for any thread count.
/// Percentiles interpolate linearly between order statistics.
/// Throws EmptyInput when n == 0.
Interval bootstrap_ci(const IndexMetric& metric, std::size_t n, const BootstrapConfig& cfg);

/// Cluster bootstrap: resamples whole clusters (e.g. patients) and passes the
/// union of their member indices to the metric.
Interval bootstrap_ci_clustered(const IndexMetric& metric, std::span<const std::string> cluster_ids,
                                const BootstrapConfig& cfg);

/// Linear-interpolated percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Mann-Whitney AUROC with midranks for ties, O(n log n).
/// Throws LengthMismatch and SingleClass.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct DelongResult {
    double auc_a = 0.0;
    double auc_b = 0.0;
    double variance = 0.0;
    double z = 0.0;
    double p = 1.0;
};

/// Paired DeLong comparison of two correlated AUROCs from structural
/// components. Zero variance yields z = 0, p = 1 when the AUCs are equal.
DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels);

/// Structural components of one score vector: V10 per positive and V01 per
/// negative, in the order the samples appear.
struct StructuralComponents {
    std::vector<double> v10;
    std::vector<double> v01;
};
StructuralComponents structural_components(std::span<const double> scores, std::span<const int> labels);

struct PairedOutcomes {
    std::vector<std::string> ids;
    std::vector<bool> a_correct;
    std::vector<bool> b_correct;
};

struct McNemarResult {
    std::size_t b = 0;  // A correct, B wrong
    std::size_t c = 0;  // B correct, A wrong
    double statistic = 0.0;
    double p = 1.0;
    bool exact = true;
};

/// Exact two-sided binomial test when b + c < 25, otherwise the
/// continuity-corrected chi-square with one degree of freedom.
McNemarResult mcnemar_test(const PairedOutcomes& paired);
McNemarResult mcnemar_test(std::size_t b, std::size_t c);

struct BhResult {
    std::vector<bool> reject;
    std::vector<double> adjusted;
};

/// Step-up false-discovery-rate control. Adjusted p_(i) = min_{j >= i}
/// p_(j) m / j capped at 1, reported in input order.
BhResult benjamini_hochberg(std::span<const double> p_values, double alpha = 0.05);

/// P(|Z| >= |z|) for a standard normal.
double normal_two_sided_p(double z);
/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1dof_sf(double x);

enum class SubgroupKey { AgeBand, Race };

std::string_view to_string(SubgroupKey key) noexcept;
SubgroupKey parse_subgroup_key(std::string_view text);

/// "<50", "50-60", "60-70", "70+" by age at acquisition.
std::string age_band(double age_years);

struct SubgroupCell {
    std::string group;
    /// nullopt for the group's overall row, else the reference density rank.
    std::optional<int> reference;
    std::size_t n = 0;
    Interval accuracy;
};

struct SubgroupTable {
    SubgroupKey key = SubgroupKey::AgeBand;
    std::vector<SubgroupCell> cells;
};

/// Accuracy per demographic group, each with a bootstrap CI, plus one row per
/// (group, reference density) stratum. Samples without demographics are
/// skipped; an empty race string falls into "Other".
SubgroupTable subgroup_table(std::span<const int> predictions, std::span<const int> references,
                             std::span<const std::optional<Demographics>> demographics, SubgroupKey key,
                             const BootstrapConfig& cfg);

}  // namespace tomo::stats
