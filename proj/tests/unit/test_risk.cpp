// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tomo/error.hpp"
#include "tomo/risk.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/grad_check.hpp"

using namespace tomo;
using namespace tomo::risk;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Usage;
}

stats::BootstrapConfig quick_boot() {
    stats::BootstrapConfig b;
    b.repetitions = 50;
    b.seed = 1;
    return b;
}

SurvivalRecord event_at(int year) { return build_record("e" + std::to_string(year), Outcome{true, year, 5.0}); }
SurvivalRecord free_for(double years) { return build_record("f", Outcome{false, 0, years}); }

}  // namespace

TEST_CASE("record labels and masks") {
    const auto e3 = event_at(3);
    CHECK(e3.labels == Curve{0, 0, 1, 1, 1});
    CHECK(e3.mask == Curve{1, 1, 1, 1, 1});
    const auto f5 = free_for(5.0);
    CHECK(f5.labels == Curve{0, 0, 0, 0, 0});
    CHECK(f5.mask == Curve{1, 1, 1, 1, 1});
    CHECK(free_for(3.4).mask == Curve{1, 1, 1, 0, 0});
    CHECK(free_for(7.0).mask_sum() == 5.0);
    CHECK(kind_of([] { event_at(0); }) == ErrorKind::InvalidEventYear);
    CHECK(kind_of([] { event_at(6); }) == ErrorKind::InvalidEventYear);
    CHECK(kind_of([] { free_for(0.9); }) == ErrorKind::Unusable);
}

TEST_CASE("hazards to risk") {
    const std::vector<double> zero(5, 0.0);
    const auto r = hazards_to_risk(zero);
    CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.75).epsilon(1e-15));
    const std::vector<double> low(5, -50.0);
    for (double v : hazards_to_risk(low)) CHECK(v < 1e-20);
    CHECK_THROWS_AS(hazards_to_risk(std::vector<double>(4, 0.0)), Error);
}

TEST_CASE("masked BCE closed form") {
    const std::vector<double> zero(5, 0.0);
    const auto l = masked_bce(zero, Curve{}, Curve{1, 1, 0, 0, 0});
    CHECK(l.loss == doctest::Approx(1.5 * std::numbers::ln2).epsilon(1e-12));
    CHECK(l.grad[2] == 0.0);
    const std::vector<double> high(5, 30.0);
    CHECK(masked_bce(high, Curve{1, 1, 1, 1, 1}, Curve{1, 1, 1, 1, 1}).loss < 1e-6);
    CHECK(kind_of([&] { masked_bce(zero, Curve{}, Curve{}); }) == ErrorKind::AllMasked);
}

TEST_CASE("masked BCE gradient and mask invariance") {
    Rng rng(3);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> z(5);
        for (double& v : z) v = rng.normal(-1.0, 1.5);
        Curve y{}, m{};
        for (std::size_t k = 0; k < 5; ++k) {
            y[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            m[k] = rng.bernoulli(0.7) ? 1.0 : 0.0;
        }
        m[0] = 1.0;
        const auto res = trainer::grad_check([&](std::span<const double> p) { return masked_bce(p, y, m); }, z, 1e-5);
        CHECK(res.passed);
        Curve flipped = y;
        for (std::size_t k = 0; k < 5; ++k) {
            if (m[k] == 0.0) flipped[k] = 1.0 - flipped[k];
        }
        CHECK(masked_bce(z, flipped, m).loss == masked_bce(z, y, m).loss);
    }
}

TEST_CASE("AUROC per year: perfect, constant and hand case") {
    std::vector<SurvivalRecord> recs{event_at(1), event_at(2), free_for(5), free_for(5), event_at(4), free_for(2.5)};
    std::vector<Curve> perfect;
    for (const auto& r : recs) {
        Curve c{};
        for (std::size_t k = 0; k < 5; ++k) c[k] = r.labels[k] + 0.01 * static_cast<double>(k);
        perfect.push_back(c);
    }
    const auto ev = eval_risk_curves(perfect, recs, quick_boot());
    for (const auto& y : ev.years) {
        REQUIRE(y.auroc.has_value());
        CHECK(y.auroc->point == 1.0);
    }
    std::vector<Curve> flat(recs.size(), Curve{0.3, 0.3, 0.3, 0.3, 0.3});
    for (const auto& y : eval_risk_curves(flat, recs, quick_boot()).years) CHECK(y.auroc->point == 0.5);

    // Year 3 observed: records 0,1,2,3,4 (record 5 censored at 2.5 years).
    std::vector<Curve> hand(6, Curve{});
    const double s3[6] = {0.2, 0.9, 0.4, 0.1, 0.3, 0.99};
    for (std::size_t i = 0; i < 6; ++i) hand[i][2] = s3[i];
    const auto y3 = eval_risk_curves(hand, recs, quick_boot()).years[2];
    CHECK(y3.n == 5);
    CHECK(y3.n_positive == 2);
    // Positives {0.2, 0.9} vs negatives {0.4, 0.1, 0.3}: pairs won 1 + 3 = 4 of 6.
    CHECK(y3.auroc->point == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("single-class year has no AUROC") {
    std::vector<SurvivalRecord> recs{event_at(5), free_for(5), free_for(5)};
    std::vector<Curve> c(3, Curve{0.1, 0.2, 0.3, 0.4, 0.5});
    const auto ev = eval_risk_curves(c, recs, quick_boot());
    CHECK_FALSE(ev.years[0].auroc.has_value());
    CHECK(ev.years[4].auroc.has_value());
    REQUIRE(ev.macro.has_value());
    CHECK(ev.macro->point == doctest::Approx(0.5));
}

TEST_CASE("subgroups: flagged groups and single-group identity") {
    std::vector<SurvivalRecord> recs{event_at(1), free_for(5), event_at(2), free_for(5), free_for(4)};
    std::vector<Curve> c{{0.9, 0.9, 0.9, 0.9, 0.9}, {0.1, 0.1, 0.1, 0.1, 0.1}, {0.5, 0.6, 0.7, 0.8, 0.9},
                         {0.2, 0.3, 0.4, 0.5, 0.6}, {0.3, 0.3, 0.3, 0.3, 0.3}};
    const std::vector<DensityCategory> one(5, DensityCategory::B);
    const auto g = subgroup_risk(c, recs, one, 1, quick_boot());
    REQUIRE(g.size() == 1);
    const auto direct = eval_risk_curves(c, recs, quick_boot());
    CHECK(g[0].eval->macro->point == direct.macro->point);
    CHECK(g[0].eval->macro->lo == direct.macro->lo);

    std::vector<DensityCategory> split{DensityCategory::A, DensityCategory::A, DensityCategory::A, DensityCategory::D,
                                       DensityCategory::D};
    const auto g2 = subgroup_risk(c, recs, split, 1, quick_boot());
    REQUIRE(g2.size() == 2);
    CHECK_FALSE(g2[0].flagged);
    CHECK(g2[1].flagged);
    CHECK_FALSE(g2[1].eval.has_value());
}

TEST_CASE("balanced subset") {
    std::vector<SurvivalRecord> recs{event_at(1), free_for(5), free_for(5), free_for(5), event_at(3)};
    const auto pick = balanced_subset(recs, 2);
    CHECK(pick.size() == 4);
    std::size_t events = 0;
    for (auto i : pick) events += recs[i].event;
    CHECK(events == 2);
    CHECK(pick == balanced_subset(recs, 2));
}

TEST_CASE("training on a planted signal is deterministic and learns") {
    Rng rng(5);
    const std::size_t n = 400;
    trainer::Matrix x(n, 3);
    std::vector<SurvivalRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ev = i % 3 == 0;
        x.row(i)[0] = (ev ? 1.5 : -1.5) + rng.normal();
        x.row(i)[1] = rng.normal();
        x.row(i)[2] = rng.normal();
        recs.push_back(ev ? event_at(1 + static_cast<int>(i % 5)) : free_for(5.0));
    }
    RiskConfig cfg;
    cfg.train.epochs = 20;
    cfg.train.lr = 2e-2;
    cfg.train.seed = 3;
    const auto run = train_risk(x, recs, x, recs, cfg);
    CHECK(run.best_auroc_head == train_risk(x, recs, x, recs, cfg).best_auroc_head);
    const auto ev = eval_risk(run.best_auroc_head, x, recs, quick_boot());
    CHECK(ev.years[4].auroc->point > 0.85);
    for (const auto& c : predict_curves(run.best_loss_head, x)) {
        for (std::size_t k = 1; k < 5; ++k) CHECK(c[k] >= c[k - 1]);
    }
    const auto back = risk_run_from_json(to_json(run));
    CHECK(back.best_auroc_head == run.best_auroc_head);

    std::vector<SurvivalRecord> no_events(n, free_for(5.0));
    CHECK(kind_of([&] { train_risk(x, no_events, x, no_events, cfg); }) == ErrorKind::DegenerateSplit);
}

TEST_CASE("record JSON round-trip") {
    const auto r = free_for(3.4);
    CHECK(record_from_json(to_json(r)) == r);
}
