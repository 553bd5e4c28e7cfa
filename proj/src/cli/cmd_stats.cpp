// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <sstream>

#include "context.hpp"
#include "tomo/error.hpp"
#include "tomo/stats.hpp"

namespace tomo::cli {

namespace {

std::map<std::string, nlohmann::json> by_id(const std::string& path) {
    const auto doc = read_json_file(path);
    const auto& list = doc.is_array() ? doc : doc.at("predictions");
    std::map<std::string, nlohmann::json> out;
    for (const auto& item : list) out[item.at("id").get<std::string>()] = item;
    return out;
}

int as_rank(const nlohmann::json& v) {
    if (v.is_string()) return rank(parse_density(v.get<std::string>()));
    return v.get<int>();
}

bool correct(const nlohmann::json& item) {
    if (item.contains("correct")) return item.at("correct").get<bool>();
    return as_rank(item.at("prediction")) == as_rank(item.at("reference"));
}

struct CompareOptions {
    std::string preds_a;
    std::string preds_b;
    std::string test = "mcnemar";
    std::string out;
};

void run_compare(const CompareOptions& o, Context& ctx) {
    const auto a = by_id(o.preds_a);
    const auto b = by_id(o.preds_b);
    if (a.size() != b.size()) fail(ErrorKind::LengthMismatch, "prediction files cover different samples");
    for (const auto& [id, _] : a) {
        if (!b.contains(id)) fail(ErrorKind::LengthMismatch, "sample " + id + " missing from --preds-b");
    }
    nlohmann::json doc = ctx.stamp();
    doc["test"] = o.test;
    doc["n"] = a.size();
    if (o.test == "mcnemar") {
        stats::PairedOutcomes paired;
        for (const auto& [id, item] : a) {
            paired.ids.push_back(id);
            paired.a_correct.push_back(correct(item));
            paired.b_correct.push_back(correct(b.at(id)));
        }
        const auto r = stats::mcnemar_test(paired);
        doc["result"] = {{"b", r.b}, {"c", r.c}, {"statistic", r.statistic}, {"p", r.p}, {"exact", r.exact}};
        ctx.summary = {{"p", r.p}};
    } else if (o.test == "delong") {
        std::vector<double> sa, sb;
        std::vector<int> labels;
        for (const auto& [id, item] : a) {
            const auto& other = b.at(id);
            const int la = item.at("label").get<int>();
            if (other.at("label").get<int>() != la) fail(ErrorKind::Parse, "labels disagree for sample " + id);
            sa.push_back(item.at("score").get<double>());
            sb.push_back(other.at("score").get<double>());
            labels.push_back(la);
        }
        const auto r = stats::delong_test(sa, sb, labels);
        doc["result"] = {{"auc_a", r.auc_a}, {"auc_b", r.auc_b}, {"variance", r.variance}, {"z", r.z}, {"p", r.p}};
        ctx.summary = {{"p", r.p}};
    } else {
        fail(ErrorKind::Usage, "--test must be mcnemar or delong");
    }
    ctx.write_json(o.out, doc);
}

struct SubgroupOptions {
    std::string preds;
    std::string demo;
    std::string key = "age_band";
    std::size_t bootstrap = 1000;
    std::uint64_t boot_seed = 0;
    std::string out;
    std::string csv;
};

std::map<std::string, Demographics> load_demographics(const std::string& path) {
    const auto doc = read_json_file(path);
    std::map<std::string, Demographics> out;
    if (doc.is_object() && doc.contains("exams")) {
        const Dataset ds = doc.get<Dataset>();
        for (const auto& e : ds.exams) {
            if (e.demographics) out[e.exam_id] = *e.demographics;
        }
        return out;
    }
    for (const auto& [id, d] : doc.items()) out[id] = d.get<Demographics>();
    return out;
}

void run_subgroup(const SubgroupOptions& o, Context& ctx) {
    const auto key = stats::parse_subgroup_key(o.key);
    const auto preds = by_id(o.preds);
    const auto demo = load_demographics(o.demo);
    std::vector<int> p, r;
    std::vector<std::optional<Demographics>> d;
    for (const auto& [id, item] : preds) {
        p.push_back(as_rank(item.at("prediction")));
        r.push_back(as_rank(item.at("reference")));
        const auto it = demo.find(id);
        d.push_back(it == demo.end() ? std::nullopt : std::optional<Demographics>(it->second));
    }
    const stats::BootstrapConfig boot{o.bootstrap, o.boot_seed, 0.95, ctx.threads};
    const auto table = stats::subgroup_table(p, r, d, key, boot);
    nlohmann::json cells = nlohmann::json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "group,reference,n,accuracy,ci_lo,ci_hi\n";
    for (const auto& c : table.cells) {
        const std::string ref = c.reference ? std::string(to_string(density_from_rank(*c.reference))) : "all";
        cells.push_back({{"group", c.group}, {"reference", ref}, {"n", c.n}, {"accuracy", c.accuracy.point},
                         {"ci_lo", c.accuracy.lo}, {"ci_hi", c.accuracy.hi}});
        csv << c.group << ',' << ref << ',' << c.n << ',' << c.accuracy.point << ',' << c.accuracy.lo << ','
            << c.accuracy.hi << '\n';
    }
    nlohmann::json doc = ctx.stamp();
    doc["key"] = std::string(stats::to_string(key));
    doc["cells"] = cells;
    ctx.write_json(o.out, doc);
    if (!o.csv.empty()) ctx.write_text(o.csv, csv.str());
    ctx.summary = {{"cells", cells.size()}};
}

struct BhOptions {
    std::string p;
    double alpha = 0.05;
    std::string out;
};

void run_bh(const BhOptions& o, Context& ctx) {
    const auto p = parse_double_list(o.p);
    const auto r = stats::benjamini_hochberg(p, o.alpha);
    ctx.summary = {{"adjusted", r.adjusted}, {"reject", r.reject}};
    if (!o.out.empty()) {
        nlohmann::json doc = ctx.stamp();
        doc["adjusted"] = r.adjusted;
        doc["reject"] = r.reject;
        ctx.write_json(o.out, doc);
    }
}

}  // namespace

void register_stats_commands(CLI::App& app, Context& ctx) {
    auto* group = app.add_subcommand("stats", "Paired model comparison and subgroup tables");
    group->require_subcommand(1);
    {
        auto o = std::make_shared<CompareOptions>();
        auto* sub = group->add_subcommand("compare", "McNemar or DeLong test between two prediction files");
        sub->add_option("--preds-a", o->preds_a)->required()->check(CLI::ExistingFile);
        sub->add_option("--preds-b", o->preds_b)->required()->check(CLI::ExistingFile);
        sub->add_option("--test", o->test)->check(CLI::IsMember({"mcnemar", "delong"}))->capture_default_str();
        sub->add_option("--out", o->out)->required();
        on_run(sub, ctx, [o, &ctx] { run_compare(*o, ctx); });
    }
    {
        auto o = std::make_shared<SubgroupOptions>();
        auto* sub = group->add_subcommand("subgroup", "Accuracy by age band or race with bootstrap CIs");
        sub->add_option("--preds", o->preds)->required()->check(CLI::ExistingFile);
        sub->add_option("--demo", o->demo, "Manifest or {id: {age_years, race}} map")->required()->check(CLI::ExistingFile);
        sub->add_option("--key", o->key)->check(CLI::IsMember({"age_band", "race"}))->capture_default_str();
        sub->add_option("--bootstrap", o->bootstrap)->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--boot-seed", o->boot_seed)->capture_default_str();
        sub->add_option("--out", o->out)->required();
        sub->add_option("--csv", o->csv);
        on_run(sub, ctx, [o, &ctx] { run_subgroup(*o, ctx); });
    }
    {
        auto o = std::make_shared<BhOptions>();
        auto* sub = group->add_subcommand("bh", "Benjamini-Hochberg adjustment of p-values");
        sub->add_option("--p", o->p, "Comma-separated p-values")->required();
        sub->add_option("--alpha", o->alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
        sub->add_option("--out", o->out);
        on_run(sub, ctx, [o, &ctx] { run_bh(*o, ctx); });
    }
}

}  // namespace tomo::cli
