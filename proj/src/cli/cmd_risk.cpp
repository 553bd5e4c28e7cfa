// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>

#include "context.hpp"
#include "tomo/error.hpp"
#include "tomo/risk.hpp"

namespace tomo::cli {

namespace {

using RecordMap = std::map<std::string, risk::SurvivalRecord>;

RecordMap records_from_manifest(const Dataset& ds, std::size_t* skipped = nullptr) {
    RecordMap out;
    std::size_t bad = 0;
    for (const auto& e : ds.exams) {
        if (!e.outcome) continue;
        try {
            out.emplace(e.exam_id, risk::build_record(e.exam_id, *e.outcome));
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::Unusable) throw;
            ++bad;
        }
    }
    if (skipped) *skipped = bad;
    return out;
}

RecordMap records_from_file(const std::string& path) {
    RecordMap out;
    const auto j = read_json_file(path);
    const auto& list = j.contains("records") ? j.at("records") : j;
    for (const auto& r : list) {
        auto rec = risk::record_from_json(r);
        out.emplace(rec.exam_id, std::move(rec));
    }
    return out;
}

struct Split {
    std::vector<const Exam*> exams;
    std::vector<risk::SurvivalRecord> records;
    trainer::Matrix x;
};

Split split_data(const embeddings::EmbeddingStore& store, const Dataset& ds, const RecordMap& records,
                 const std::string& split, embeddings::AggregationMode mode) {
    Split s;
    for (const Exam* e : exams_in_split(ds, split)) {
        const auto it = records.find(e->exam_id);
        if (it == records.end()) continue;
        s.exams.push_back(e);
        s.records.push_back(it->second);
    }
    s.x = feature_matrix(store, s.exams, mode);
    return s;
}

struct RecordsOptions {
    std::string manifest;
    std::string out;
};

void run_records(const RecordsOptions& o, Context& ctx) {
    std::size_t skipped = 0;
    const auto recs = records_from_manifest(load_dataset(o.manifest), &skipped);
    nlohmann::json doc = ctx.stamp();
    doc["records"] = nlohmann::json::array();
    for (const auto& [id, r] : recs) doc["records"].push_back(risk::to_json(r));
    doc["skipped_unusable"] = skipped;
    ctx.write_json(o.out, doc);
    ctx.summary = {{"records", recs.size()}, {"skipped_unusable", skipped}};
}

struct TrainOptions {
    std::string store;
    std::string manifest;
    std::string records;
    std::string mode = "patch-mean-std";
    risk::RiskConfig cfg;
    std::string out;
};

void run_train(const TrainOptions& o, Context& ctx) {
    const auto mode = embeddings::parse_aggregation_mode(o.mode);
    const Dataset ds = load_dataset(o.manifest);
    const RecordMap recs = o.records.empty() ? records_from_manifest(ds) : records_from_file(o.records);
    const embeddings::EmbeddingStore store(o.store);
    const auto train = split_data(store, ds, recs, "train", mode);
    const auto val = split_data(store, ds, recs, "val", mode);
    ctx.log("risk: " + std::to_string(train.records.size()) + " train / " + std::to_string(val.records.size()) +
            " val exams");
    const auto run = risk::train_risk(train.x, train.records, val.x, val.records, o.cfg);
    nlohmann::json doc = ctx.stamp();
    doc["store"] = o.store;
    doc["manifest"] = o.manifest;
    doc["records"] = o.records;
    doc["mode"] = o.mode;
    doc["run"] = risk::to_json(run);
    ctx.write_json(o.out, doc);
    ctx.summary = {{"best_loss_epoch", run.best_loss_epoch}, {"best_auroc_epoch", run.best_auroc_epoch}};
}

struct EvalOptions {
    std::string head;
    std::string split = "test";
    std::string checkpoint = "auroc";
    bool by_density = false;
    std::size_t min_positives = 5;
    std::size_t bootstrap = 1000;
    std::uint64_t boot_seed = 0;
    std::string out;
    std::string preds_out;
};

void run_eval(const EvalOptions& o, Context& ctx) {
    const auto head_doc = read_json_file(o.head);
    const auto run = risk::risk_run_from_json(head_doc.at("run"));
    const auto mode = embeddings::parse_aggregation_mode(head_doc.at("mode").get<std::string>());
    const Dataset ds = load_dataset(head_doc.at("manifest").get<std::string>());
    const std::string rec_path = head_doc.value("records", std::string());
    const RecordMap recs = rec_path.empty() ? records_from_manifest(ds) : records_from_file(rec_path);
    const embeddings::EmbeddingStore store(head_doc.at("store").get<std::string>());
    const auto test = split_data(store, ds, recs, o.split, mode);
    if (o.checkpoint != "auroc" && o.checkpoint != "loss") fail(ErrorKind::Usage, "--checkpoint must be auroc or loss");
    const auto& head = o.checkpoint == "auroc" ? run.best_auroc_head : run.best_loss_head;
    const auto curves = risk::predict_curves(head, test.x);
    const stats::BootstrapConfig boot{o.bootstrap, o.boot_seed, 0.95, ctx.threads};
    const auto ev = risk::eval_risk_curves(curves, test.records, boot);

    nlohmann::json doc = ctx.stamp();
    doc["split"] = o.split;
    doc["checkpoint"] = o.checkpoint;
    doc["n"] = test.records.size();
    doc["overall"] = risk::to_json(ev);
    if (o.by_density) {
        std::vector<risk::Curve> c;
        std::vector<risk::SurvivalRecord> r;
        std::vector<DensityCategory> g;
        for (std::size_t i = 0; i < test.exams.size(); ++i) {
            if (!test.exams[i]->density) continue;
            c.push_back(curves[i]);
            r.push_back(test.records[i]);
            g.push_back(*test.exams[i]->density);
        }
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& gr : risk::subgroup_risk(c, r, g, o.min_positives, boot)) groups.push_back(risk::to_json(gr));
        doc["by_density"] = groups;
    }
    ctx.write_json(o.out, doc);
    if (!o.preds_out.empty()) {
        nlohmann::json preds = nlohmann::json::array();
        for (std::size_t i = 0; i < curves.size(); ++i) {
            preds.push_back({{"id", test.records[i].exam_id}, {"risk", curves[i]}, {"event", test.records[i].event}});
        }
        ctx.write_json(o.preds_out, preds);
    }
    if (ev.macro) ctx.summary = {{"macro_auroc", ev.macro->point}};
}

}  // namespace

void register_risk_commands(CLI::App& app, Context& ctx) {
    auto* group = app.add_subcommand("risk", "Five-year discrete-time risk head");
    group->require_subcommand(1);
    {
        auto o = std::make_shared<RecordsOptions>();
        auto* sub = group->add_subcommand("records", "Derive survival labels and masks from a manifest");
        sub->add_option("--manifest", o->manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_records(*o, ctx); });
    }
    {
        auto o = std::make_shared<TrainOptions>();
        auto* sub = group->add_subcommand("train", "Train the hazard head");
        sub->add_option("--store", o->store)->required();
        sub->add_option("--manifest", o->manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--records", o->records, "Survival records (default: derived from the manifest)");
        sub->add_option("--mode", o->mode)->capture_default_str();
        sub->add_option("--seed", o->cfg.train.seed)->capture_default_str();
        sub->add_option("--val-seed", o->cfg.val_seed)->capture_default_str();
        sub->add_option("--epochs", o->cfg.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--batch", o->cfg.train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--lr", o->cfg.train.lr)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--weight-decay", o->cfg.train.weight_decay)->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_train(*o, ctx); });
    }
    {
        auto o = std::make_shared<EvalOptions>();
        auto* sub = group->add_subcommand("eval", "Year-specific AUROC with bootstrap CIs");
        sub->add_option("--head", o->head)->required()->check(CLI::ExistingFile);
        sub->add_option("--split", o->split)->capture_default_str();
        sub->add_option("--checkpoint", o->checkpoint, "auroc | loss")->capture_default_str();
        sub->add_flag("--by-density", o->by_density, "Add per-density subgroup tables");
        sub->add_option("--min-positives", o->min_positives)->capture_default_str();
        sub->add_option("--bootstrap", o->bootstrap)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--boot-seed", o->boot_seed)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--preds-out", o->preds_out);
        on_run(sub, ctx, [o, &ctx] { run_eval(*o, ctx); });
    }
}

}  // namespace tomo::cli
