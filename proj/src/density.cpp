// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/checkpoint.hpp"
#include "tomo/trainer/loss.hpp"

namespace tomo::density {

using trainer::LinearHead;
using trainer::Matrix;

std::vector<std::size_t> stratified_fraction(std::span<const DensityCategory> labels, double fraction,
                                             std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorKind::Usage, "fraction must be in (0, 1]");
    std::array<std::vector<std::size_t>, kClasses> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(rank(labels[i]))].push_back(i);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < kClasses; ++c) {
        auto& members = by_class[c];
        if (members.empty()) continue;
        Rng rng(derive_seed(seed, c));
        shuffle(std::span<std::size_t>(members), rng);
        const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
        const std::size_t take = std::clamp<std::size_t>(want, 1, members.size());
        out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

Matrix to_matrix(std::span<const LabeledFeatures> samples, std::span<const std::size_t> pick) {
    if (pick.empty()) return {};
    const std::size_t dim = samples[pick[0]].x.size();
    Matrix m(pick.size(), dim);
    for (std::size_t r = 0; r < pick.size(); ++r) {
        const auto& x = samples[pick[r]].x;
        if (x.size() != dim) fail(ErrorKind::DimMismatch, "feature vectors differ in length");
        std::copy(x.begin(), x.end(), m.row(r).begin());
    }
    return m;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

DensityRun train_density(std::span<const LabeledFeatures> train, std::span<const LabeledFeatures> val,
                         const DensityConfig& cfg) {
    std::vector<DensityCategory> labels;
    labels.reserve(train.size());
    for (const auto& s : train) labels.push_back(s.label);
    const auto pick = stratified_fraction(labels, cfg.fraction, cfg.fraction_seed);
    std::array<std::size_t, kClasses> seen{};
    for (const std::size_t i : pick) ++seen[static_cast<std::size_t>(rank(train[i].label))];
    for (std::size_t c = 0; c < kClasses; ++c) {
        if (seen[c] == 0) {
            fail(ErrorKind::EmptyClass, "no training samples for density " +
                                            std::string(to_string(density_from_rank(static_cast<int>(c)))));
        }
    }

    const Matrix x_train = to_matrix(train, pick);
    std::vector<std::size_t> y_train;
    for (const std::size_t i : pick) y_train.push_back(static_cast<std::size_t>(rank(train[i].label)));
    const auto val_pick = all_indices(val.size());
    const Matrix x_val = to_matrix(val, val_pick);
    if (!val.empty() && x_val.cols != x_train.cols) fail(ErrorKind::DimMismatch, "validation feature size differs");

    const trainer::SampleLoss train_loss = [&](std::span<const double> z, std::size_t i) {
        return trainer::softmax_ce(z, y_train[i]);
    };
    const trainer::SampleLoss val_loss = [&](std::span<const double> z, std::size_t i) {
        return trainer::softmax_ce(z, static_cast<std::size_t>(rank(val[i].label)));
    };

    DensityRun run;
    run.mode = cfg.mode;
    run.fraction = cfg.fraction;
    run.seed = cfg.seed;
    run.fraction_seed = cfg.fraction_seed;
    run.n_train = pick.size();
    double best = std::numeric_limits<double>::infinity();
    trainer::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const LinearHead last = trainer::train_linear(
        x_train, kClasses, train_loss, tc, [&](std::size_t epoch, const LinearHead& head, double tl) {
            const double vl = val.empty() ? tl : trainer::mean_loss(head, x_val, val_loss);
            run.train_loss.push_back(tl);
            run.val_loss.push_back(vl);
            if (vl < best) {
                best = vl;
                run.best_epoch = epoch;
                run.head = head;
            }
        });
    if (run.head.parameter_count() == 0) run.head = last;
    return run;
}

DensityCategory predict_density(const LinearHead& head, std::span<const double> x) {
    const auto z = trainer::forward_linear(head, x);
    return density_from_rank(static_cast<int>(trainer::argmax(z)));
}

std::size_t ConfusionMatrix::total() const noexcept {
    std::size_t t = 0;
    for (const auto& row : counts)
        for (const auto v : row) t += v;
    return t;
}

std::size_t ConfusionMatrix::trace() const noexcept {
    std::size_t t = 0;
    for (std::size_t i = 0; i < kClasses; ++i) t += counts[i][i];
    return t;
}

std::size_t ConfusionMatrix::support(std::size_t reference) const noexcept {
    std::size_t t = 0;
    for (const auto v : counts[reference]) t += v;
    return t;
}

void ConfusionMatrix::add(DensityCategory reference, DensityCategory predicted) noexcept {
    ++counts[static_cast<std::size_t>(rank(reference))][static_cast<std::size_t>(rank(predicted))];
}

double binary_collapse(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) return 0.0;
    std::size_t agree = 0;
    for (std::size_t r = 0; r < kClasses; ++r) {
        for (std::size_t p = 0; p < kClasses; ++p) {
            if ((r >= 2) == (p >= 2)) agree += cm.counts[r][p];
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

double adjacent_error_rate(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) return 0.0;
    std::size_t far = 0;
    for (std::size_t r = 0; r < kClasses; ++r) {
        for (std::size_t p = 0; p < kClasses; ++p) {
            if ((r > p ? r - p : p - r) > 1) far += cm.counts[r][p];
        }
    }
    return static_cast<double>(far) / static_cast<double>(total);
}

DensityMetrics metrics_from_confusion(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) fail(ErrorKind::EmptyTestSet, "density evaluation on an empty test set");
    DensityMetrics m;
    m.confusion = cm;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    double f1_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        std::size_t predicted = 0;
        for (std::size_t r = 0; r < kClasses; ++r) predicted += cm.counts[r][c];
        const std::size_t tp = cm.counts[c][c];
        const std::size_t fn = cm.support(c) - tp;
        const std::size_t fp = predicted - tp;
        if (cm.support(c) == 0) {
            m.excluded.push_back(density_from_rank(static_cast<int>(c)));
            m.per_class_f1[c] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        m.per_class_f1[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
        f1_sum += m.per_class_f1[c];
        ++counted;
    }
    m.macro_f1 = f1_sum / static_cast<double>(counted);
    m.binary_accuracy = binary_collapse(cm);
    m.adjacent_error_rate = adjacent_error_rate(cm);
    return m;
}

DensityMetrics evaluate_predictions(std::span<const DensityCategory> references,
                                    std::span<const DensityCategory> predictions) {
    if (references.size() != predictions.size()) fail(ErrorKind::LengthMismatch, "references and predictions differ");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < references.size(); ++i) cm.add(references[i], predictions[i]);
    return metrics_from_confusion(cm);
}

DensityMetrics evaluate_density(const LinearHead& head, std::span<const LabeledFeatures> test) {
    if (test.empty()) fail(ErrorKind::EmptyTestSet, "density evaluation on an empty test set");
    ConfusionMatrix cm;
    for (const auto& s : test) cm.add(s.label, predict_density(head, s.x));
    return metrics_from_confusion(cm);
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
    auto j = nlohmann::json::array();
    for (const auto& row : cm.counts) j.push_back(row);
    return j;
}

nlohmann::json to_json(const DensityMetrics& m) {
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < kClasses; ++c) {
        const std::string key(to_string(density_from_rank(static_cast<int>(c))));
        per_class[key] = std::isnan(m.per_class_f1[c]) ? nlohmann::json(nullptr) : nlohmann::json(m.per_class_f1[c]);
    }
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto d : m.excluded) excluded.push_back(std::string(to_string(d)));
    return {{"accuracy", m.accuracy},
            {"macro_F1", m.macro_f1},
            {"per_class_F1", per_class},
            {"excluded_classes", excluded},
            {"confusion", to_json(m.confusion)},
            {"binary_accuracy", m.binary_accuracy},
            {"adjacent_error_rate", m.adjacent_error_rate}};
}

nlohmann::json to_json(const DensityRun& run) {
    return {{"mode", std::string(embeddings::to_string(run.mode))},
            {"fraction", run.fraction},
            {"seed", run.seed},
            {"fraction_seed", run.fraction_seed},
            {"n_train", run.n_train},
            {"best_epoch", run.best_epoch},
            {"train_loss", run.train_loss},
            {"val_loss", run.val_loss},
            {"head", trainer::head_to_json(run.head)}};
}

DensityRun run_from_json(const nlohmann::json& j) {
    try {
        DensityRun run;
        run.mode = embeddings::parse_aggregation_mode(j.at("mode").get<std::string>());
        run.fraction = j.at("fraction").get<double>();
        run.seed = j.at("seed").get<std::uint64_t>();
        run.fraction_seed = j.at("fraction_seed").get<std::uint64_t>();
        run.n_train = j.at("n_train").get<std::size_t>();
        run.best_epoch = j.at("best_epoch").get<std::size_t>();
        run.train_loss = j.at("train_loss").get<std::vector<double>>();
        run.val_loss = j.at("val_loss").get<std::vector<double>>();
        run.head = trainer::head_from_json(j.at("head"));
        return run;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("density run: ") + e.what());
    }
}

}  // namespace tomo::density
