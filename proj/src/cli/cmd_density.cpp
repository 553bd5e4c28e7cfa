// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "context.hpp"
#include "tomo/density.hpp"
#include "tomo/error.hpp"
#include "tomo/stats.hpp"

namespace tomo::cli {

namespace {

struct TrainOptions {
    std::string store;
    std::string manifest;
    std::string mode = "patch-mean-std";
    density::DensityConfig cfg;
    std::string out;
};

struct EvalOptions {
    std::string run;
    std::string split = "test";
    std::string store;
    std::string manifest;
    std::size_t bootstrap = 1000;
    std::uint64_t boot_seed = 0;
    std::string out;
    std::string preds_out;
};

std::vector<density::LabeledFeatures> labeled(const embeddings::EmbeddingStore& store, const Dataset& ds,
                                              const std::string& split, embeddings::AggregationMode mode) {
    std::vector<density::LabeledFeatures> out;
    for (const Exam* e : exams_in_split(ds, split)) {
        if (!e->density) continue;
        out.push_back({e->exam_id, embeddings::load_study_features(store, *e, mode).values, *e->density});
    }
    return out;
}

void run_train(TrainOptions o, Context& ctx) {
    o.cfg.mode = embeddings::parse_aggregation_mode(o.mode);
    const Dataset ds = load_dataset(o.manifest);
    const embeddings::EmbeddingStore store(o.store);
    const auto train = labeled(store, ds, "train", o.cfg.mode);
    const auto val = labeled(store, ds, "val", o.cfg.mode);
    if (train.empty()) fail(ErrorKind::EmptyInput, "no labelled training exams");
    ctx.log("density: " + std::to_string(train.size()) + " train / " + std::to_string(val.size()) + " val exams");
    const auto run = density::train_density(train, val, o.cfg);
    nlohmann::json doc = ctx.stamp();
    doc["store"] = o.store;
    doc["manifest"] = o.manifest;
    doc["run"] = density::to_json(run);
    ctx.write_json(o.out, doc);
    ctx.summary = {{"best_epoch", run.best_epoch}, {"n_train", run.n_train}};
}

void run_eval(const EvalOptions& o, Context& ctx) {
    const auto run_doc = read_json_file(o.run);
    const auto run = density::run_from_json(run_doc.at("run"));
    const std::string store_dir = o.store.empty() ? run_doc.at("store").get<std::string>() : o.store;
    const std::string manifest = o.manifest.empty() ? run_doc.at("manifest").get<std::string>() : o.manifest;
    const Dataset ds = load_dataset(manifest);
    const embeddings::EmbeddingStore store(store_dir);
    const auto test = labeled(store, ds, o.split, run.mode);
    const auto metrics = density::evaluate_density(run.head, test);

    std::vector<int> hit(test.size());
    nlohmann::json preds = nlohmann::json::array();
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto p = density::predict_density(run.head, test[i].x);
        hit[i] = p == test[i].label ? 1 : 0;
        preds.push_back({{"id", test[i].exam_id},
                         {"prediction", std::string(to_string(p))},
                         {"reference", std::string(to_string(test[i].label))}});
    }
    const stats::BootstrapConfig boot{o.bootstrap, o.boot_seed, 0.95, ctx.threads};
    const auto acc_ci = stats::bootstrap_ci(
        [&](std::span<const std::size_t> idx) {
            double s = 0.0;
            for (const std::size_t i : idx) s += hit[i];
            return s / static_cast<double>(idx.size());
        },
        hit.size(), boot);

    nlohmann::json doc = ctx.stamp();
    doc["split"] = o.split;
    doc["n"] = test.size();
    doc["metrics"] = density::to_json(metrics);
    doc["metrics"]["accuracy_ci"] = {acc_ci.lo, acc_ci.hi};
    ctx.write_json(o.out, doc);
    if (!o.preds_out.empty()) ctx.write_json(o.preds_out, preds);
    ctx.summary = {{"accuracy", metrics.accuracy}, {"macro_F1", metrics.macro_f1}};
}

}  // namespace

void register_density_commands(CLI::App& app, Context& ctx) {
    auto* group = app.add_subcommand("density", "Breast-density linear probe");
    group->require_subcommand(1);
    {
        auto o = std::make_shared<TrainOptions>();
        auto* sub = group->add_subcommand("train", "Train the 4-class density head");
        sub->add_option("--store", o->store)->required();
        sub->add_option("--manifest", o->manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--mode", o->mode, "cls-mean | cls-mean-std | patch-mean | patch-mean-std")->capture_default_str();
        sub->add_option("--fraction", o->cfg.fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_option("--seed", o->cfg.seed)->capture_default_str();
        sub->add_option("--fraction-seed", o->cfg.fraction_seed)->capture_default_str();
        sub->add_option("--epochs", o->cfg.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--batch", o->cfg.train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--lr", o->cfg.train.lr)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--weight-decay", o->cfg.train.weight_decay)->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_train(*o, ctx); });
    }
    {
        auto o = std::make_shared<EvalOptions>();
        auto* sub = group->add_subcommand("eval", "Evaluate a trained density head");
        sub->add_option("--run", o->run)->required()->check(CLI::ExistingFile);
        sub->add_option("--split", o->split)->capture_default_str();
        sub->add_option("--store", o->store, "Override the store recorded in the run");
        sub->add_option("--manifest", o->manifest, "Override the manifest recorded in the run");
        sub->add_option("--bootstrap", o->bootstrap)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--boot-seed", o->boot_seed)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--preds-out", o->preds_out, "Per-exam predictions for stats commands");
        on_run(sub, ctx, [o, &ctx] { run_eval(*o, ctx); });
    }
}

}  // namespace tomo::cli
