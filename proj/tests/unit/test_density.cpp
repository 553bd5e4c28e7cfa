// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "tomo/density.hpp"
#include "tomo/error.hpp"
#include "tomo/rng.hpp"

using namespace tomo;
using namespace tomo::density;
using D = DensityCategory;

namespace {

std::vector<LabeledFeatures> blobs(std::uint64_t seed, std::size_t n, double sep) {
    Rng rng(seed);
    std::vector<LabeledFeatures> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int r = static_cast<int>(i % 4);
        LabeledFeatures s{"e" + std::to_string(i), std::vector<double>(6), density_from_rank(r)};
        for (double& v : s.x) v = rng.normal();
        s.x[0] += sep * (r - 1.5);
        out.push_back(std::move(s));
    }
    return out;
}

ConfusionMatrix diagonal(std::size_t per_class) {
    ConfusionMatrix cm;
    for (std::size_t c = 0; c < kClasses; ++c) cm.counts[c][c] = per_class;
    return cm;
}

}  // namespace

TEST_CASE("perfect and cyclically shifted predictions") {
    const std::vector<D> refs{D::A, D::B, D::C, D::D, D::A};
    const auto perfect = evaluate_predictions(refs, refs);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    std::vector<D> shifted;
    for (auto r : refs) shifted.push_back(density_from_rank((rank(r) + 1) % 4));
    CHECK(evaluate_predictions(refs, shifted).accuracy == 0.0);
}

TEST_CASE("mixed ten-sample case matches hand enumeration") {
    const std::vector<D> refs{D::A, D::A, D::A, D::B, D::B, D::B, D::C, D::C, D::D, D::D};
    const std::vector<D> preds{D::A, D::A, D::B, D::B, D::B, D::C, D::C, D::C, D::D, D::A};
    const auto m = evaluate_predictions(refs, preds);
    CHECK(m.accuracy == doctest::Approx(0.7));
    CHECK(m.per_class_f1[0] == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class_f1[1] == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class_f1[2] == doctest::Approx(0.8));
    CHECK(m.per_class_f1[3] == doctest::Approx(2.0 / 3.0));
    CHECK(m.macro_f1 == doctest::Approx(0.7));
    CHECK(m.binary_accuracy == doctest::Approx(0.8));
    CHECK(m.adjacent_error_rate == doctest::Approx(0.1));
    CHECK(m.confusion.counts[3][0] == 1);
    CHECK(m.confusion.total() == 10);
    CHECK(m.confusion.trace() == 7);
}

TEST_CASE("class without support is excluded from macro-F1") {
    const std::vector<D> refs{D::A, D::B, D::C};
    const auto m = evaluate_predictions(refs, refs);
    REQUIRE(m.excluded.size() == 1);
    CHECK(m.excluded[0] == D::D);
    CHECK(std::isnan(m.per_class_f1[3]));
    CHECK(m.macro_f1 == 1.0);
}

TEST_CASE("binary collapse") {
    CHECK(binary_collapse(diagonal(5)) == 1.0);
    ConfusionMatrix ab;
    ab.counts[0][1] = 4;
    ab.counts[1][0] = 3;
    ab.counts[2][3] = 2;
    CHECK(binary_collapse(ab) == 1.0);
    ConfusionMatrix one;
    one.counts[0][0] = 9;
    one.counts[0][2] = 1;
    CHECK(binary_collapse(one) == doctest::Approx(0.9));
}

TEST_CASE("adjacent error rate") {
    CHECK(adjacent_error_rate(diagonal(3)) == 0.0);
    ConfusionMatrix cm;
    cm.counts[0][0] = 996;
    cm.counts[0][2] = 1;
    CHECK(adjacent_error_rate(cm) == doctest::Approx(1.0 / 997));
    cm.counts[0][0] = 994;
    cm.counts[3][1] = 1;
    cm.counts[3][0] = 1;
    CHECK(cm.total() == 997);
    CHECK(adjacent_error_rate(cm) == doctest::Approx(0.0030).epsilon(0.01));
}

TEST_CASE("empty test set is an error") {
    CHECK_THROWS_AS(metrics_from_confusion(ConfusionMatrix{}), Error);
}

TEST_CASE("stratified fraction keeps per-class counts") {
    std::vector<D> labels;
    for (int i = 0; i < 103; ++i) labels.push_back(density_from_rank(i % 4));
    for (double f : {0.05, 0.25, 0.5, 1.0}) {
        const auto pick = stratified_fraction(labels, f, 3);
        std::array<int, 4> per{};
        for (auto i : pick) ++per[static_cast<std::size_t>(rank(labels[i]))];
        const std::array<int, 4> support{26, 26, 26, 25};
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(std::abs(per[c] - f * support[c]) <= 1.0);
            CHECK(per[c] >= 1);
        }
        CHECK(std::is_sorted(pick.begin(), pick.end()));
    }
    CHECK(stratified_fraction(labels, 0.25, 3) == stratified_fraction(labels, 0.25, 3));
    CHECK_THROWS_AS(stratified_fraction(labels, 0.0, 3), Error);
}

TEST_CASE("training separates blobs and is deterministic") {
    const auto train = blobs(1, 400, 6.0);
    const auto val = blobs(2, 80, 6.0);
    const auto test = blobs(3, 200, 6.0);
    DensityConfig cfg;
    cfg.train.epochs = 40;
    cfg.train.lr = 3e-2;
    cfg.seed = 5;
    const auto run = train_density(train, val, cfg);
    CHECK(evaluate_density(run.head, test).accuracy >= 0.95);
    CHECK(run.val_loss.size() == 40);
    CHECK(run.val_loss[run.best_epoch] == doctest::Approx(*std::min_element(run.val_loss.begin(), run.val_loss.end())));
    CHECK(train_density(train, val, cfg).head == run.head);

    const auto back = run_from_json(to_json(run));
    CHECK(back.head == run.head);
    CHECK(back.best_epoch == run.best_epoch);
}

TEST_CASE("missing class in training is an error") {
    auto train = blobs(1, 40, 1.0);
    std::erase_if(train, [](const LabeledFeatures& s) { return s.label == D::C; });
    CHECK_THROWS_AS(train_density(train, {}, DensityConfig{}), Error);
}

TEST_CASE("metrics JSON uses stable keys") {
    const std::vector<D> refs{D::A, D::B};
    const auto j = to_json(evaluate_predictions(refs, refs));
    CHECK(j.contains("accuracy"));
    CHECK(j.contains("macro_F1"));
    CHECK(j.contains("confusion"));
}
