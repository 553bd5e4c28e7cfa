// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include "context.hpp"
#include "tomo/embeddings/synthetic.hpp"
#include "tomo/error.hpp"
#include "tomo/ingest/cache.hpp"
#include "tomo/ingest/dicomweb.hpp"
#include "tomo/ingest/phantom.hpp"
#include "tomo/ingest/prefetch.hpp"
#include "tomo/ingest/report.hpp"
#include "tomo/rng.hpp"

namespace tomo::cli {

namespace fs = std::filesystem;

namespace {

struct PhantomOptions {
    std::uint64_t seed = 0;
    std::string out;
    ingest::CohortSpec cohort;
    bool with_volumes = false;
    int lesions = 1;
};

void run_phantom(const PhantomOptions& o, Context& ctx) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    Dataset ds = ingest::generate_cohort(o.seed, o.cohort);
    if (o.with_volumes) {
        const fs::path archive = dir / "archive";
        for (const auto& exam : ds.exams) {
            for (const auto& [view, ref] : exam.views) {
                ingest::PhantomSpec spec;
                spec.n_slices = ref.n_slices;
                spec.lesion_count = o.lesions;
                if (exam.planted) {
                    spec.density_rank = exam.planted->density_rank;
                    spec.hazard_profile = exam.planted->hazard_profile;
                }
                const auto ph = ingest::generate_phantom(derive_seed(o.seed, fnv1a(ref.key())), spec, ref);
                ingest::write_volume_archive(archive, ref, ph.slices);
                ds.annotations.insert(ds.annotations.end(), ph.lesions.begin(), ph.lesions.end());
            }
        }
        ctx.record(archive);
    }
    ctx.write_json(dir / "manifest.json", nlohmann::json(ds));
    ctx.summary = {{"exams", ds.exams.size()}, {"annotations", ds.annotations.size()}};
}

struct FetchOptions {
    std::string source;
    std::string token;
    std::string manifest;
    std::string cache;
    std::uint64_t capacity = std::uint64_t{1} << 30;
    int prefetch = 4;
    std::vector<std::string> allow;
    std::string out;
};

void run_fetch(const FetchOptions& o, Context& ctx) {
    const Dataset ds = load_dataset(o.manifest);
    ingest::RemoteSource src{o.source, o.token, std::nullopt};
    if (!o.allow.empty()) src.allowed_study_ids = std::set<std::string>(o.allow.begin(), o.allow.end());
    ingest::DicomWebClient client(src, std::shared_ptr<ingest::Transport>(ingest::make_transport(o.source)));
    std::string cache_dir = o.cache;
    if (cache_dir.empty()) {
        const char* env = std::getenv("TOMO_CACHE_DIR");
        cache_dir = env != nullptr && *env != '\0' ? env : "tomo-cache";
    }
    ingest::VolumeCache cache({o.capacity, cache_dir, o.prefetch});
    std::vector<VolumeRef> refs;
    for (const auto& e : ds.exams) {
        for (const auto& [view, ref] : e.views) refs.push_back(ref);
    }
    const int depth = std::min<int>(o.prefetch, static_cast<int>(ctx.threads));
    ingest::Prefetcher pf(refs, [&](const VolumeRef& r) { return cache.get_or_fetch(client, r); }, depth);
    nlohmann::json fetched = nlohmann::json::array();
    while (auto item = pf.next()) {
        fetched.push_back({{"volume", item->ref.key()}, {"path", item->path.generic_string()},
                           {"bytes", fs::file_size(item->path)}});
        if (ctx.verbose) ctx.log("fetched " + item->ref.key());
    }
    nlohmann::json doc = ctx.stamp();
    doc["volumes"] = fetched;
    doc["cache_bytes"] = cache.total_bytes();
    ctx.write_json(o.out, doc);
    ctx.summary = {{"volumes", fetched.size()}};
}

struct ReportOptions {
    std::string text;
    std::string file;
    std::string out;
};

void run_report(const ReportOptions& o, Context& ctx) {
    std::string text = o.text;
    if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) fail(ErrorKind::Io, "cannot read " + o.file);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (text.empty()) fail(ErrorKind::Usage, "give --text or --file");
    const DensityCategory d = ingest::parse_density_report(text);
    ctx.summary = {{"density", std::string(to_string(d))}};
    if (!o.out.empty()) {
        nlohmann::json doc = ctx.stamp();
        doc["density"] = std::string(to_string(d));
        ctx.write_json(o.out, doc);
    }
}

void run_validate(const std::string& manifest, const std::string& out, Context& ctx) {
    const Dataset ds = load_dataset(manifest);
    const auto violations = validate_dataset(ds);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& v : violations) list.push_back({{"kind", std::string(to_string(v.kind))}, {"detail", v.detail}});
    ctx.summary = {{"exams", ds.exams.size()}, {"violations", violations.size()}};
    if (!out.empty()) {
        nlohmann::json doc = ctx.stamp();
        doc["violations"] = list;
        ctx.write_json(out, doc);
    }
}

struct EmbedOptions {
    std::string manifest;
    std::string store;
    std::string source = "synthetic";
    std::uint64_t seed = 0;
    embeddings::SignalSpec signal;
};

void run_embed(const EmbedOptions& o, Context& ctx) {
    if (o.source != "synthetic") {
        fail(ErrorKind::Usage, "only --source synthetic is built in; import backbone tokens into the store directly");
    }
    const Dataset ds = load_dataset(o.manifest);
    embeddings::EmbeddingStore store(o.store);
    embeddings::synthesize_store(o.seed, ds, o.signal, store);
    store.flush();
    ctx.record(fs::path(o.store) / "index.json");
    nlohmann::json doc = ctx.stamp();
    doc["keys"] = store.keys().size();
    ctx.write_json(fs::path(o.store) / "embed.json", doc);
    ctx.summary = {{"keys", store.keys().size()}};
}

}  // namespace

void register_data_commands(CLI::App& app, Context& ctx) {
    {
        auto o = std::make_shared<PhantomOptions>();
        auto* sub = app.add_subcommand("phantom", "Generate a synthetic cohort manifest (and optional image archive)");
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--out", o->out, "Output directory")->required();
        sub->add_option("--exams", o->cohort.n_exams)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--slices", o->cohort.n_slices)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--train-fraction", o->cohort.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_option("--val-fraction", o->cohort.val_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_option("--high-risk-fraction", o->cohort.high_risk_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_option("--censored-fraction", o->cohort.censored_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_flag("--with-volumes", o->with_volumes, "Also write phantom slices as a DICOMweb-style archive");
        sub->add_option("--lesions", o->lesions, "Lesions per phantom volume")->check(CLI::NonNegativeNumber)->capture_default_str();
        on_run(sub, ctx, [o, &ctx] { run_phantom(*o, ctx); });
    }

    auto* ingest = app.add_subcommand("ingest", "Fetch, cache and check imaging data");
    ingest->require_subcommand(1);
    {
        auto o = std::make_shared<FetchOptions>();
        auto* sub = ingest->add_subcommand("fetch", "Fetch every volume of a manifest through the local cache");
        sub->add_option("--source", o->source, "Base URL (http://host:port/prefix or file:///dir)")->required();
        sub->add_option("--token", o->token, "Bearer token")->capture_default_str();
        sub->add_option("--manifest", o->manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--cache", o->cache, "Cache directory (default: $TOMO_CACHE_DIR or ./tomo-cache)");
        sub->add_option("--capacity", o->capacity, "Cache capacity in bytes")->capture_default_str();
        sub->add_option("--prefetch", o->prefetch)->check(CLI::Range(0, ingest::kMaxPrefetchDepth))->capture_default_str();
        sub->add_option("--allow-study", o->allow, "Allowed study id (repeatable)");
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_fetch(*o, ctx); });
    }
    {
        auto o = std::make_shared<ReportOptions>();
        auto* sub = ingest->add_subcommand("report", "Extract the BI-RADS density category from report text");
        sub->add_option("--text", o->text);
        sub->add_option("--file", o->file)->check(CLI::ExistingFile);
        sub->add_option("--out", o->out);
        on_run(sub, ctx, [o, &ctx] { run_report(*o, ctx); });
    }
    {
        auto manifest = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto* sub = ingest->add_subcommand("validate", "Check a manifest for structural problems");
        sub->add_option("--manifest", *manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--out", *out);
        on_run(sub, ctx, [manifest, out, &ctx] { run_validate(*manifest, *out, ctx); });
    }
    {
        auto o = std::make_shared<EmbedOptions>();
        auto* sub = app.add_subcommand("embed", "Populate an embedding store for a manifest");
        sub->add_option("--manifest", o->manifest)->required()->check(CLI::ExistingFile);
        sub->add_option("--store", o->store)->required();
        sub->add_option("--source", o->source)->capture_default_str();
        sub->add_option("--seed", o->seed)->capture_default_str();
        sub->add_option("--dim", o->signal.dim)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--grid", o->signal.grid_side)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--slices", o->signal.n_slices)->check(CLI::NonNegativeNumber)->capture_default_str();
        sub->add_option("--density-separation", o->signal.density_separation)->capture_default_str();
        sub->add_option("--risk-separation", o->signal.risk_separation)->capture_default_str();
        sub->add_option("--token-noise", o->signal.token_noise)->capture_default_str();
        sub->add_option("--exam-noise", o->signal.exam_noise)->capture_default_str();
        on_run(sub, ctx, [o, &ctx] { run_embed(*o, ctx); });
    }
}

}  // namespace tomo::cli
