// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>

#include "context.hpp"
#include "tomo/detect/phantom_data.hpp"
#include "tomo/embeddings/synthetic.hpp"
#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/checkpoint.hpp"

namespace tomo::cli {

namespace {

struct TrainOptions {
    std::uint64_t seed = 0;
    int train_volumes = 150;
    int val_volumes = 30;
    detect::PhantomDetectSpec phantom;
    std::size_t channels = 0;
    detect::DetectConfig cfg;
    std::string out;
};

detect::Projection make_projection(std::size_t channels, std::uint64_t seed) {
    if (channels == 0) return detect::Projection::identity(embeddings::kPixelStats);
    return detect::Projection::random(embeddings::kPixelStats, channels, derive_seed(seed, 0x9207));
}

nlohmann::json config_json(const TrainOptions& o) {
    const auto& c = o.cfg;
    return {{"channels", o.channels},
            {"projection_seed", o.seed},
            {"slices", o.phantom.n_slices},
            {"min_lesions", o.phantom.min_lesions},
            {"max_lesions", o.phantom.max_lesions},
            {"lesion_amplitude", o.phantom.lesion_amplitude},
            {"nms_iou", c.nms_iou},
            {"min_score", c.min_score},
            {"top_k", c.top_k},
            {"max_per_volume", c.max_per_volume}};
}

void run_train(TrainOptions o, Context& ctx) {
    o.cfg.train.seed = o.seed;
    o.cfg.pyramid.channels = o.channels == 0 ? embeddings::kPixelStats : o.channels;
    const auto proj = make_projection(o.channels, o.seed);
    std::vector<detect::SliceSample> train;
    std::vector<detect::VolumeSample> val;
    for (int v = 0; v < o.train_volumes + o.val_volumes; ++v) {
        const std::string id = "V" + std::to_string(v);
        auto vol = detect::make_phantom_volume(derive_seed(o.seed, 100 + static_cast<std::uint64_t>(v)), id, o.phantom,
                                               proj, o.cfg.pyramid);
        if (v < o.train_volumes) {
            for (auto& s : detect::annotated_slices(vol)) train.push_back(std::move(s));
        } else {
            val.push_back(std::move(vol.sample));
        }
    }
    ctx.log("detect: " + std::to_string(train.size()) + " annotated slices, " + std::to_string(val.size()) +
            " validation volumes");
    const auto run = detect::train_detect_head(train, val, o.cfg);
    nlohmann::json doc = ctx.stamp();
    doc["detector"] = config_json(o);
    doc["run"] = detect::to_json(run);
    ctx.write_json(o.out, doc);
    ctx.summary = {{"best_epoch", run.best_epoch},
                   {"val_sensitivity", run.val_sensitivity.empty() ? 0.0 : run.val_sensitivity[run.best_epoch]}};
}

struct PredictOptions {
    std::string run;
    std::uint64_t seed = 1;
    int volumes = 20;
    std::string out;
    std::string gt_out;
};

void run_predict(const PredictOptions& o, Context& ctx) {
    const auto doc = read_json_file(o.run);
    const auto run = detect::detect_run_from_json(doc.at("run"));
    const auto& d = doc.at("detector");
    detect::DetectConfig cfg;
    cfg.nms_iou = d.at("nms_iou").get<double>();
    cfg.min_score = d.at("min_score").get<double>();
    cfg.top_k = d.at("top_k").get<std::size_t>();
    cfg.max_per_volume = d.at("max_per_volume").get<std::size_t>();
    const auto channels = d.at("channels").get<std::size_t>();
    cfg.pyramid.channels = channels == 0 ? embeddings::kPixelStats : channels;
    const auto proj = make_projection(channels, d.at("projection_seed").get<std::uint64_t>());
    detect::PhantomDetectSpec ps;
    ps.n_slices = d.at("slices").get<int>();
    ps.min_lesions = d.at("min_lesions").get<int>();
    ps.max_lesions = d.at("max_lesions").get<int>();
    ps.lesion_amplitude = d.at("lesion_amplitude").get<double>();
    const auto anchors = detect::generate_anchors(cfg.pyramid);

    nlohmann::json preds = nlohmann::json::array();
    nlohmann::json gt = nlohmann::json::array();
    nlohmann::json volumes = nlohmann::json::array();
    for (int v = 0; v < o.volumes; ++v) {
        const std::string id = "T" + std::to_string(v);
        const auto vol = detect::make_phantom_volume(derive_seed(o.seed, 0x7e57 + static_cast<std::uint64_t>(v)), id,
                                                     ps, proj, cfg.pyramid);
        volumes.push_back(id);
        for (const auto& det : detect::predict_volume(run.head, vol.sample, anchors, cfg)) {
            auto j = detect::to_json(det);
            j["volume_id"] = id;
            preds.push_back(j);
        }
        for (std::size_t l = 0; l < vol.sample.truth.size(); ++l) {
            const auto& b = vol.sample.truth[l];
            gt.push_back({{"volume_id", id}, {"slice_index", vol.lesion_slices[l]}, {"x", b.x}, {"y", b.y}, {"w", b.w},
                          {"h", b.h}, {"malignancy", "cancer"}});
        }
    }
    ctx.write_json(o.out, {{"volumes", volumes}, {"predictions", preds}});
    if (!o.gt_out.empty()) ctx.write_json(o.gt_out, {{"volumes", volumes}, {"annotations", gt}});
    ctx.summary = {{"volumes", o.volumes}, {"predictions", preds.size()}};
}

struct EvalOptions {
    std::string preds;
    std::string gt;
    std::string fp = "1,2,3,4";
    std::string out;
    std::string csv;
};

const nlohmann::json& list_of(const nlohmann::json& doc, const char* key) {
    return doc.is_array() ? doc : doc.at(key);
}

void run_eval(const EvalOptions& o, Context& ctx) {
    const auto pdoc = read_json_file(o.preds);
    const auto gdoc = read_json_file(o.gt);
    std::set<std::string> ids;
    for (const auto* doc : {&pdoc, &gdoc}) {
        if (doc->is_object() && doc->contains("volumes")) {
            for (const auto& v : doc->at("volumes")) ids.insert(v.get<std::string>());
        }
    }
    std::map<std::string, std::vector<detect::Box>> truth_map;
    for (const auto& a : list_of(gdoc, "annotations")) {
        const auto id = a.at("volume_id").get<std::string>();
        ids.insert(id);
        truth_map[id].push_back({a.at("x").get<double>(), a.at("y").get<double>(), a.at("w").get<double>(),
                                 a.at("h").get<double>()});
    }
    std::vector<detect::ScoredBox> preds;
    for (const auto& p : list_of(pdoc, "predictions")) {
        const auto det = detect::detection_from_json(p);
        const auto id = p.at("volume_id").get<std::string>();
        ids.insert(id);
        preds.push_back({id, det.box, det.score, det.slice_index});
    }
    std::vector<detect::VolumeTruth> truth;
    for (const auto& id : ids) truth.push_back({id, truth_map[id]});
    const auto fp = parse_double_list(o.fp);
    const auto r = detect::froc(truth, preds, fp);
    nlohmann::json doc = ctx.stamp();
    doc["froc"] = detect::to_json(r);
    ctx.write_json(o.out, doc);
    if (!o.csv.empty()) ctx.write_text(o.csv, detect::froc_curve_csv(r));
    ctx.summary = {{"average_sensitivity", r.average}};
}

}  // namespace

void register_detect_commands(CLI::App& app, Context& ctx) {
    auto* group = app.add_subcommand("detect", "Anchor-based lesion detection on phantom volumes");
    group->require_subcommand(1);
    {
        auto o = std::make_shared<TrainOptions>();
        o->cfg.train.epochs = 60;
        o->cfg.train.lr = 3e-2;
        auto* sub = group->add_subcommand("train", "Train the per-location detection head on phantoms");
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--train-volumes", o->train_volumes)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--val-volumes", o->val_volumes)->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--slices", o->phantom.n_slices)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--channels", o->channels, "Pyramid channels (0 keeps the raw pixel statistics)")->capture_default_str();
        sub->add_option("--epochs", o->cfg.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--batch", o->cfg.train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--lr", o->cfg.train.lr)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--patience", o->cfg.patience)->capture_default_str();
        sub->add_option("--pos-iou", o->cfg.assign.pos_iou)->check(CLI::Range(0.4, 0.6))->capture_default_str();
        sub->add_option("--neg-iou", o->cfg.assign.neg_iou)->check(CLI::Range(0.2, 0.5))->capture_default_str();
        sub->add_option("--neg-ratio", o->cfg.assign.neg_ratio)->check(CLI::Range(1.0, 5.0))->capture_default_str();
        sub->add_option("--alpha", o->cfg.loss.focal.alpha)->check(CLI::Range(0.25, 0.95))->capture_default_str();
        sub->add_option("--gamma", o->cfg.loss.focal.gamma)->check(CLI::Range(0.5, 2.0))->capture_default_str();
        sub->add_option("--smoothing", o->cfg.loss.focal.smoothing)->check(CLI::Range(0.0, 0.1))->capture_default_str();
        sub->add_option("--cls-box-ratio", o->cfg.loss.cls_to_box_ratio)->check(CLI::Range(0.1, 10.0))->capture_default_str();
        sub->add_option("--nms-iou", o->cfg.nms_iou)->check(CLI::Range(0.03, 0.3))->capture_default_str();
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_train(*o, ctx); });
    }
    {
        auto o = std::make_shared<PredictOptions>();
        auto* sub = group->add_subcommand("predict", "Run a trained head on fresh phantom volumes");
        sub->add_option("--run", o->run)->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--volumes", o->volumes)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--gt-out", o->gt_out, "Also write the planted lesions");
        on_run(sub, ctx, [o, &ctx] { run_predict(*o, ctx); });
    }
    {
        auto o = std::make_shared<EvalOptions>();
        auto* sub = group->add_subcommand("eval", "FROC evaluation of volume-level predictions");
        sub->add_option("--preds", o->preds)->required()->check(CLI::ExistingFile);
        sub->add_option("--gt", o->gt)->required()->check(CLI::ExistingFile);
        sub->add_option("--fp", o->fp, "Comma-separated false positives per volume")->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--csv", o->csv, "FROC curve points");
        on_run(sub, ctx, [o, &ctx] { run_eval(*o, ctx); });
    }
}

}  // namespace tomo::cli
