// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <numeric>

#include "acceptance/harness.hpp"
#include "tomo/density.hpp"
#include "tomo/embeddings/aggregate.hpp"
#include "tomo/embeddings/synthetic.hpp"
#include "tomo/ingest/phantom.hpp"
#include "tomo/risk.hpp"
#include "tomo/rng.hpp"

namespace tomo::acceptance {

using embeddings::AggregationMode;

namespace {

struct CohortFeatures {
    std::map<std::string, std::vector<const Exam*>> exams;
    std::map<std::string, std::vector<std::vector<double>>> x;
};

CohortFeatures featurize_cohort(const Dataset& ds, std::uint64_t seed, const embeddings::SignalSpec& spec) {
    CohortFeatures out;
    for (const auto& exam : ds.exams) {
        std::map<ViewKind, std::vector<double>> views;
        for (const auto& [view, ref] : exam.views) {
            const auto grids = embeddings::synthesize_view(seed, exam, ref, spec);
            views[view] = embeddings::aggregate_view(grids, AggregationMode::PatchMeanStd);
        }
        const std::string split = exam.split.value_or("train");
        out.exams[split].push_back(&exam);
        out.x[split].push_back(embeddings::assemble_study(views).values);
    }
    return out;
}

std::vector<density::LabeledFeatures> labeled(const CohortFeatures& f, const std::string& split) {
    std::vector<density::LabeledFeatures> out;
    const auto& exams = f.exams.at(split);
    for (std::size_t i = 0; i < exams.size(); ++i) out.push_back({exams[i]->exam_id, f.x.at(split)[i], *exams[i]->density});
    return out;
}

struct DensityData {
    std::vector<density::LabeledFeatures> train, val, test;
};

DensityData density_data(std::uint64_t seed, double separation) {
    ingest::CohortSpec cs;
    cs.n_exams = 1200;
    cs.n_slices = 2;
    cs.train_fraction = 800.0 / 1200.0;
    cs.val_fraction = 200.0 / 1200.0;
    const Dataset ds = ingest::generate_cohort(seed, cs);
    embeddings::SignalSpec spec;
    spec.dim = 32;
    spec.grid_side = 4;
    spec.density_separation = separation;
    const auto f = featurize_cohort(ds, seed, spec);
    return {labeled(f, "train"), labeled(f, "val"), labeled(f, "test")};
}

density::DensityConfig density_config(std::uint64_t seed, double fraction) {
    density::DensityConfig cfg;
    cfg.seed = seed;
    cfg.fraction_seed = seed;
    cfg.fraction = fraction;
    cfg.train.seed = seed;
    cfg.train.lr = 1e-2;
    return cfg;
}

trainer::Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    trainer::Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

std::vector<risk::SurvivalRecord> records(const std::vector<const Exam*>& exams) {
    std::vector<risk::SurvivalRecord> out;
    for (const auto* e : exams) out.push_back(risk::build_record(e->exam_id, *e->outcome));
    return out;
}

}  // namespace

Outcome density_probe_criterion() {
    Checks checks;
    Stopwatch clock;

    const auto data = density_data(41, 2.0);
    checks.note("split sizes " + std::to_string(data.train.size()) + "/" + std::to_string(data.val.size()) + "/" +
                std::to_string(data.test.size()));
    const auto run = density::train_density(data.train, data.val, density_config(1, 1.0));
    const double acc = density::evaluate_density(run.head, data.test).accuracy;
    checks.expect(acc >= 0.95, "separable test accuracy " + fmt(acc) + " >= 0.95");

    // Chance level, averaged over independent cohorts to keep the estimate tight.
    double chance = 0.0;
    std::string per_draw;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto null = density_data(100 + s, 0.0);
        const auto r = density::train_density(null.train, null.val, density_config(s, 1.0));
        const double a = density::evaluate_density(r.head, null.test).accuracy;
        chance += a / 5.0;
        per_draw += (s ? "," : "") + fmt(a, 3);
    }
    checks.expect(chance >= 0.20 && chance <= 0.30,
                  "separation 0 accuracy " + fmt(chance) + " in [0.20, 0.30] (draws " + per_draw + ")");

    std::vector<double> means;
    std::string curve;
    for (const double fraction : {0.05, 0.25, 1.0}) {
        double mean = 0.0;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto r = density::train_density(data.train, data.val, density_config(10 + s, fraction));
            mean += density::evaluate_density(r.head, data.test).accuracy / 5.0;
        }
        means.push_back(mean);
        curve += (curve.empty() ? "" : " -> ") + fmt(mean);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i) monotone &= means[i] >= means[i - 1] - 0.02;
    checks.expect(monotone, "accuracy over 5/25/100% of the data " + curve + " non-decreasing within 0.02");

    const double secs = clock.seconds();
    checks.expect(secs < 300.0, "runtime " + fmt(secs, 3) + " s under 300 s");
    return checks.outcome();
}

Outcome risk_probe_criterion() {
    Checks checks;
    ingest::CohortSpec cs;
    cs.n_exams = 5000;
    cs.n_slices = 2;
    const Dataset ds = ingest::generate_cohort(53, cs);
    embeddings::SignalSpec spec;
    spec.dim = 32;
    spec.grid_side = 4;
    spec.risk_separation = 1.0;
    const auto f = featurize_cohort(ds, 53, spec);

    const auto x_train = to_matrix(f.x.at("train"));
    const auto x_val = to_matrix(f.x.at("val"));
    const auto x_test = to_matrix(f.x.at("test"));
    auto r_train = records(f.exams.at("train"));
    auto r_val = records(f.exams.at("val"));
    auto r_test = records(f.exams.at("test"));

    risk::RiskConfig cfg;
    cfg.train.epochs = 50;
    cfg.train.lr = 1e-2;
    cfg.train.seed = 2;
    stats::BootstrapConfig boot;
    boot.repetitions = 200;

    const auto run = risk::train_risk(x_train, r_train, x_val, r_val, cfg);
    const auto ev = risk::eval_risk(run.best_auroc_head, x_test, r_test, boot);
    const double year5 = ev.years[4].auroc ? ev.years[4].auroc->point : 0.0;
    checks.expect(year5 >= 0.9, "planted signal year-5 AUROC " + fmt(year5) + " >= 0.9");

    Rng rng(99);
    shuffle(std::span(r_train), rng);
    shuffle(std::span(r_val), rng);
    shuffle(std::span(r_test), rng);
    const auto null_run = risk::train_risk(x_train, r_train, x_val, r_val, cfg);
    const auto null_ev = risk::eval_risk(null_run.best_auroc_head, x_test, r_test, boot);
    const double macro = null_ev.macro ? null_ev.macro->point : 0.0;
    checks.expect(macro >= 0.45 && macro <= 0.55, "permuted labels macro AUROC " + fmt(macro) + " in [0.45, 0.55]");
    return checks.outcome();
}

}  // namespace tomo::acceptance
