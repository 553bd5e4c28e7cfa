// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"

namespace tomo::stats {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

namespace {

Interval run_bootstrap(const IndexMetric& metric, std::size_t n_units,
                       const std::function<void(Rng&, std::vector<std::size_t>&)>& draw, double point,
                       const BootstrapConfig& cfg) {
    if (cfg.repetitions < 1) fail(ErrorKind::Usage, "bootstrap needs at least one repetition");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail(ErrorKind::Usage, "confidence level must be in (0, 1)");
    std::vector<double> values(cfg.repetitions, std::numeric_limits<double>::quiet_NaN());
    const auto work = [&](std::size_t first, std::size_t stride) {
        std::vector<std::size_t> idx;
        idx.reserve(n_units);
        for (std::size_t r = first; r < cfg.repetitions; r += stride) {
            Rng rng(derive_seed(cfg.seed, r));
            idx.clear();
            draw(rng, idx);
            values[r] = metric(idx);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.repetitions)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }
    std::vector<double> finite;
    finite.reserve(values.size());
    for (const double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
    }
    const double tail = (1.0 - cfg.level) / 2.0;
    return {point, percentile(finite, tail), percentile(finite, 1.0 - tail)};
}

}  // namespace

Interval bootstrap_ci(const IndexMetric& metric, std::size_t n, const BootstrapConfig& cfg) {
    if (n == 0) fail(ErrorKind::EmptyInput, "bootstrap over zero samples");
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const double point = metric(all);
    return run_bootstrap(
        metric, n,
        [n](Rng& rng, std::vector<std::size_t>& idx) {
            for (std::size_t k = 0; k < n; ++k) idx.push_back(static_cast<std::size_t>(rng.below(n)));
        },
        point, cfg);
}

Interval bootstrap_ci_clustered(const IndexMetric& metric, std::span<const std::string> cluster_ids,
                                const BootstrapConfig& cfg) {
    if (cluster_ids.empty()) fail(ErrorKind::EmptyInput, "bootstrap over zero samples");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cluster_ids.size(); ++i) groups[cluster_ids[i]].push_back(i);
    std::vector<std::vector<std::size_t>> members;
    for (auto& [_, m] : groups) members.push_back(std::move(m));
    std::vector<std::size_t> all(cluster_ids.size());
    std::iota(all.begin(), all.end(), 0);
    const double point = metric(all);
    const std::size_t k = members.size();
    return run_bootstrap(
        metric, cluster_ids.size(),
        [&members, k](Rng& rng, std::vector<std::size_t>& idx) {
            for (std::size_t c = 0; c < k; ++c) {
                const auto& m = members[static_cast<std::size_t>(rng.below(k))];
                idx.insert(idx.end(), m.begin(), m.end());
            }
        },
        point, cfg);
}

// ---------------------------------------------------------------------------

namespace {

// Midranks (1-based) of values, ties share the average rank.
std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

void check_labels(std::span<const double> scores, std::span<const int> labels, std::size_t& n_pos) {
    if (scores.size() != labels.size()) fail(ErrorKind::LengthMismatch, "scores and labels differ in length");
    n_pos = 0;
    for (const int l : labels) n_pos += l != 0 ? 1 : 0;
    if (n_pos == 0 || n_pos == labels.size()) fail(ErrorKind::SingleClass, "AUROC needs both classes");
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    std::size_t n_pos = 0;
    check_labels(scores, labels, n_pos);
    const auto ranks = midranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) rank_sum += ranks[i];
    }
    const double n1 = static_cast<double>(n_pos);
    const double n0 = static_cast<double>(labels.size() - n_pos);
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

StructuralComponents structural_components(std::span<const double> scores, std::span<const int> labels) {
    std::size_t n_pos = 0;
    check_labels(scores, labels, n_pos);
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] != 0 ? pos : neg).push_back(scores[i]);
    const auto all = midranks(scores);
    const auto within_pos = midranks(pos);
    const auto within_neg = midranks(neg);
    const double n1 = static_cast<double>(pos.size());
    const double n0 = static_cast<double>(neg.size());
    StructuralComponents sc;
    std::size_t ip = 0, in = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            // Negatives ranked below this positive (ties count half).
            sc.v10.push_back((all[i] - within_pos[ip++]) / n0);
        } else {
            // Positives ranked above this negative.
            sc.v01.push_back(1.0 - (all[i] - within_neg[in++]) / n1);
        }
    }
    return sc;
}

DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels) {
    if (scores_a.size() != scores_b.size() || scores_a.size() != labels.size()) {
        fail(ErrorKind::LengthMismatch, "DeLong inputs differ in length");
    }
    const auto a = structural_components(scores_a, labels);
    const auto b = structural_components(scores_b, labels);
    const auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const auto cov = [](const std::vector<double>& x, const std::vector<double>& y, double mx, double my) {
        if (x.size() < 2) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
        return s / static_cast<double>(x.size() - 1);
    };
    DelongResult r;
    r.auc_a = mean(a.v10);
    r.auc_b = mean(b.v10);
    const double ma01 = mean(a.v01), mb01 = mean(b.v01);
    const double n1 = static_cast<double>(a.v10.size());
    const double n0 = static_cast<double>(a.v01.size());
    const double s10 = cov(a.v10, a.v10, r.auc_a, r.auc_a) + cov(b.v10, b.v10, r.auc_b, r.auc_b) -
                       2.0 * cov(a.v10, b.v10, r.auc_a, r.auc_b);
    const double s01 =
        cov(a.v01, a.v01, ma01, ma01) + cov(b.v01, b.v01, mb01, mb01) - 2.0 * cov(a.v01, b.v01, ma01, mb01);
    r.variance = std::max(0.0, s10 / n1 + s01 / n0);
    const double diff = r.auc_a - r.auc_b;
    if (r.variance <= 0.0) {
        if (diff == 0.0) {
            r.z = 0.0;
            r.p = 1.0;
        } else {
            r.z = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    r.z = diff / std::sqrt(r.variance);
    r.p = normal_two_sided_p(r.z);
    return r;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double chi2_1dof_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(x / 2.0)); }

McNemarResult mcnemar_test(std::size_t b, std::size_t c) {
    McNemarResult r;
    r.b = b;
    r.c = c;
    const std::size_t n = b + c;
    if (n == 0) return r;
    if (n < 25) {
        r.exact = true;
        const std::size_t k = std::min(b, c);
        // 2 * P(X <= k), X ~ Binomial(n, 1/2), accumulated in log space.
        double tail = 0.0;
        for (std::size_t i = 0; i <= k; ++i) {
            const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                                    std::lgamma(static_cast<double>(n - i) + 1.0) - static_cast<double>(n) * std::log(2.0);
            tail += std::exp(log_term);
        }
        r.statistic = static_cast<double>(k);
        r.p = std::min(1.0, 2.0 * tail);
    } else {
        r.exact = false;
        const double d = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
        r.statistic = std::max(0.0, d) * std::max(0.0, d) / static_cast<double>(n);
        r.p = chi2_1dof_sf(r.statistic);
    }
    return r;
}

McNemarResult mcnemar_test(const PairedOutcomes& paired) {
    if (paired.a_correct.size() != paired.b_correct.size()) {
        fail(ErrorKind::LengthMismatch, "paired outcomes differ in length");
    }
    std::size_t b = 0, c = 0;
    for (std::size_t i = 0; i < paired.a_correct.size(); ++i) {
        if (paired.a_correct[i] && !paired.b_correct[i]) ++b;
        if (!paired.a_correct[i] && paired.b_correct[i]) ++c;
    }
    return mcnemar_test(b, c);
}

BhResult benjamini_hochberg(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    BhResult r;
    r.reject.assign(m, false);
    r.adjusted.assign(m, 1.0);
    if (m == 0) return r;
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Usage, "p-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const std::size_t i = order[k];
        running = std::min(running, p_values[i] * static_cast<double>(m) / static_cast<double>(k + 1));
        r.adjusted[i] = std::min(running, 1.0);
    }
    for (std::size_t i = 0; i < m; ++i) r.reject[i] = r.adjusted[i] <= alpha;
    return r;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SubgroupKey key) noexcept { return key == SubgroupKey::AgeBand ? "age_band" : "race"; }

SubgroupKey parse_subgroup_key(std::string_view text) {
    if (text == "age_band" || text == "age" || text == "age-band") return SubgroupKey::AgeBand;
    if (text == "race" || text == "ethnicity") return SubgroupKey::Race;
    fail(ErrorKind::Usage, "unknown subgroup key '" + std::string(text) + "'");
}

std::string age_band(double age_years) {
    if (age_years < 50.0) return "<50";
    if (age_years < 60.0) return "50-60";
    if (age_years < 70.0) return "60-70";
    return "70+";
}

SubgroupTable subgroup_table(std::span<const int> predictions, std::span<const int> references,
                             std::span<const std::optional<Demographics>> demographics, SubgroupKey key,
                             const BootstrapConfig& cfg) {
    if (predictions.size() != references.size() || predictions.size() != demographics.size()) {
        fail(ErrorKind::LengthMismatch, "subgroup inputs differ in length");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!demographics[i]) continue;
        std::string g;
        if (key == SubgroupKey::AgeBand) {
            g = age_band(demographics[i]->age_years);
        } else {
            g = demographics[i]->race.empty() ? "Other" : demographics[i]->race;
        }
        groups[g].push_back(i);
    }
    const auto cell = [&](const std::string& name, std::optional<int> ref, const std::vector<std::size_t>& members) {
        const IndexMetric acc = [&](std::span<const std::size_t> idx) {
            if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
            std::size_t hit = 0;
            for (const std::size_t k : idx) hit += predictions[members[k]] == references[members[k]] ? 1 : 0;
            return static_cast<double>(hit) / static_cast<double>(idx.size());
        };
        return SubgroupCell{name, ref, members.size(), bootstrap_ci(acc, members.size(), cfg)};
    };
    SubgroupTable table;
    table.key = key;
    for (const auto& [name, members] : groups) {
        table.cells.push_back(cell(name, std::nullopt, members));
        std::map<int, std::vector<std::size_t>> strata;
        for (const std::size_t i : members) strata[references[i]].push_back(i);
        for (const auto& [ref, sub] : strata) table.cells.push_back(cell(name, ref, sub));
    }
    return table;
}

}  // namespace tomo::stats
