// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/checkpoint.hpp"

namespace tomo::risk {

using trainer::LinearHead;
using trainer::Matrix;

namespace {
constexpr double kEps = 1e-7;
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double SurvivalRecord::mask_sum() const noexcept {
    double s = 0.0;
    for (const double v : mask) s += v;
    return s;
}

SurvivalRecord build_record(std::string exam_id, const Outcome& outcome) {
    SurvivalRecord r;
    r.exam_id = std::move(exam_id);
    r.event = outcome.event;
    r.event_year = outcome.event_year;
    r.followup_years = outcome.followup_years;
    if (outcome.event) {
        if (outcome.event_year < 1 || outcome.event_year > static_cast<int>(kHorizon)) {
            fail(ErrorKind::InvalidEventYear,
                 "event year " + std::to_string(outcome.event_year) + " outside 1.." + std::to_string(kHorizon));
        }
        for (std::size_t k = 0; k < kHorizon; ++k) {
            r.labels[k] = static_cast<int>(k) + 1 >= outcome.event_year ? 1.0 : 0.0;
            r.mask[k] = 1.0;
        }
        return r;
    }
    if (!(outcome.followup_years >= 0.0)) fail(ErrorKind::Unusable, "negative follow-up for " + r.exam_id);
    const double observed = std::floor(outcome.followup_years);
    for (std::size_t k = 0; k < kHorizon; ++k) r.mask[k] = static_cast<double>(k) + 1.0 <= observed ? 1.0 : 0.0;
    if (r.mask_sum() == 0.0) fail(ErrorKind::Unusable, "less than one year of follow-up for " + r.exam_id);
    return r;
}

Curve hazards_to_risk(std::span<const double> z) {
    if (z.size() != kHorizon) fail(ErrorKind::DimMismatch, "risk head must have 5 outputs");
    Curve r{};
    double s = 0.0;
    for (std::size_t k = 0; k < kHorizon; ++k) {
        s += trainer::softplus(z[k]);
        r[k] = -std::expm1(-s);
    }
    return r;
}

trainer::LossGrad masked_bce(std::span<const double> z, const Curve& labels, const Curve& mask) {
    if (z.size() != kHorizon) fail(ErrorKind::DimMismatch, "risk head must have 5 outputs");
    double m_sum = 0.0;
    for (const double m : mask) m_sum += m;
    if (m_sum <= 0.0) fail(ErrorKind::AllMasked, "every year is masked");

    Curve cum{};
    double s = 0.0;
    for (std::size_t k = 0; k < kHorizon; ++k) {
        s += trainer::softplus(z[k]);
        cum[k] = s;
    }
    trainer::LossGrad out;
    out.grad.assign(kHorizon, 0.0);
    Curve d_cum{};
    for (std::size_t k = 0; k < kHorizon; ++k) {
        if (mask[k] == 0.0) continue;
        const double survival = std::exp(-cum[k]);
        const double r = -std::expm1(-cum[k]);
        const double rc = std::clamp(r, kEps, 1.0 - kEps);
        const double y = labels[k];
        out.loss += mask[k] * (-y * std::log(rc) - (1.0 - y) * std::log1p(-rc));
        if (r > kEps && r < 1.0 - kEps) {
            // dR/dS = exp(-S)
            const double dl_dr = -y / r + (1.0 - y) / (1.0 - r);
            d_cum[k] = mask[k] * dl_dr * survival / m_sum;
        }
    }
    out.loss /= m_sum;
    double tail = 0.0;
    for (std::size_t j = kHorizon; j-- > 0;) {
        tail += d_cum[j];
        out.grad[j] = tail * trainer::sigmoid(z[j]);
    }
    return out;
}

std::vector<std::size_t> balanced_subset(std::span<const SurvivalRecord> records, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < records.size(); ++i) (records[i].event ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) {
        std::vector<std::size_t> all(records.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    auto& larger = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    Rng rng(seed);
    shuffle(std::span<std::size_t>(larger), rng);
    larger.resize(keep);
    std::vector<std::size_t> out(pos);
    out.insert(out.end(), neg.begin(), neg.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Curve> predict_curves(const LinearHead& head, const Matrix& x) {
    std::vector<Curve> out(x.rows);
    std::vector<double> z(head.out_dim());
    for (std::size_t i = 0; i < x.rows; ++i) {
        trainer::forward_linear(head, x.row(i), z);
        out[i] = hazards_to_risk(z);
    }
    return out;
}

namespace {

// AUROC for year k over the given record indices, NaN if single-class.
double year_auroc(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                  std::span<const std::size_t> idx, std::size_t k, std::size_t* n_out = nullptr,
                  std::size_t* pos_out = nullptr) {
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t n_pos = 0;
    for (const std::size_t i : idx) {
        if (records[i].mask[k] == 0.0) continue;
        scores.push_back(curves[i][k]);
        const int y = records[i].labels[k] != 0.0 ? 1 : 0;
        labels.push_back(y);
        n_pos += static_cast<std::size_t>(y);
    }
    if (n_out) *n_out = labels.size();
    if (pos_out) *pos_out = n_pos;
    if (n_pos == 0 || n_pos == labels.size()) return kNaN;
    return stats::auroc(scores, labels);
}

double macro_of(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                std::span<const std::size_t> idx) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < kHorizon; ++k) {
        const double a = year_auroc(curves, records, idx, k);
        if (std::isfinite(a)) {
            sum += a;
            ++n;
        }
    }
    return n == 0 ? kNaN : sum / static_cast<double>(n);
}

std::vector<std::size_t> iota_n(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

double mean_auroc(std::span<const Curve> curves, std::span<const SurvivalRecord> records) {
    if (curves.size() != records.size()) fail(ErrorKind::LengthMismatch, "curves and records differ in length");
    return macro_of(curves, records, iota_n(records.size()));
}

RiskEval eval_risk_curves(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                          const stats::BootstrapConfig& boot) {
    if (curves.size() != records.size()) fail(ErrorKind::LengthMismatch, "curves and records differ in length");
    if (records.empty()) fail(ErrorKind::EmptyTestSet, "risk evaluation on an empty set");
    RiskEval ev;
    const auto all = iota_n(records.size());
    for (std::size_t k = 0; k < kHorizon; ++k) {
        auto& yr = ev.years[k];
        yr.year = static_cast<int>(k) + 1;
        const double point = year_auroc(curves, records, all, k, &yr.n, &yr.n_positive);
        if (!std::isfinite(point)) continue;
        yr.auroc = stats::bootstrap_ci(
            [&, k](std::span<const std::size_t> idx) { return year_auroc(curves, records, idx, k); }, records.size(),
            boot);
    }
    if (std::isfinite(macro_of(curves, records, all))) {
        ev.macro = stats::bootstrap_ci(
            [&](std::span<const std::size_t> idx) { return macro_of(curves, records, idx); }, records.size(), boot);
    }
    return ev;
}

RiskEval eval_risk(const LinearHead& head, const Matrix& x, std::span<const SurvivalRecord> records,
                   const stats::BootstrapConfig& boot) {
    const auto curves = predict_curves(head, x);
    return eval_risk_curves(curves, records, boot);
}

std::vector<GroupResult> subgroup_risk(std::span<const Curve> curves, std::span<const SurvivalRecord> records,
                                       std::span<const DensityCategory> groups, std::size_t min_positives,
                                       const stats::BootstrapConfig& boot) {
    if (curves.size() != records.size() || groups.size() != records.size()) {
        fail(ErrorKind::LengthMismatch, "subgroup inputs differ in length");
    }
    std::vector<GroupResult> out;
    for (int g = 0; g < 4; ++g) {
        const DensityCategory cat = density_from_rank(g);
        std::vector<Curve> sub_curves;
        std::vector<SurvivalRecord> sub_records;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (groups[i] != cat) continue;
            sub_curves.push_back(curves[i]);
            sub_records.push_back(records[i]);
        }
        if (sub_records.empty()) continue;
        GroupResult gr;
        gr.group = cat;
        gr.n = sub_records.size();
        for (const auto& r : sub_records) gr.n_positive += r.event ? 1 : 0;
        gr.flagged = gr.n_positive < std::max<std::size_t>(min_positives, 1);
        if (!gr.flagged) gr.eval = eval_risk_curves(sub_curves, sub_records, boot);
        out.push_back(std::move(gr));
    }
    return out;
}

RiskRun train_risk(const Matrix& x_train, std::span<const SurvivalRecord> train, const Matrix& x_val,
                   std::span<const SurvivalRecord> val, const RiskConfig& cfg) {
    if (x_train.rows != train.size() || x_val.rows != val.size()) {
        fail(ErrorKind::LengthMismatch, "feature rows and records differ in count");
    }
    std::size_t events = 0;
    for (const auto& r : train) events += r.event ? 1 : 0;
    if (events == 0 || events == train.size()) {
        fail(ErrorKind::DegenerateSplit, "risk training needs both event and event-free records");
    }
    if (!val.empty() && x_val.cols != x_train.cols) fail(ErrorKind::DimMismatch, "validation feature size differs");

    const auto val_pick = balanced_subset(val, cfg.val_seed);
    Matrix xv(val_pick.size(), x_val.cols);
    std::vector<SurvivalRecord> rv;
    for (std::size_t r = 0; r < val_pick.size(); ++r) {
        const auto src = x_val.row(val_pick[r]);
        std::copy(src.begin(), src.end(), xv.row(r).begin());
        rv.push_back(val[val_pick[r]]);
    }

    const trainer::SampleLoss train_loss = [&](std::span<const double> z, std::size_t i) {
        return masked_bce(z, train[i].labels, train[i].mask);
    };
    const trainer::SampleLoss val_loss = [&](std::span<const double> z, std::size_t i) {
        return masked_bce(z, rv[i].labels, rv[i].mask);
    };

    RiskRun run;
    run.seed = cfg.train.seed;
    run.n_val = rv.size();
    double best_loss = std::numeric_limits<double>::infinity();
    double best_auc = -std::numeric_limits<double>::infinity();
    const LinearHead last = trainer::train_linear(
        x_train, kHorizon, train_loss, cfg.train, [&](std::size_t epoch, const LinearHead& head, double tl) {
            double vl = tl;
            double va = kNaN;
            if (!rv.empty()) {
                vl = trainer::mean_loss(head, xv, val_loss);
                const auto curves = predict_curves(head, xv);
                va = mean_auroc(curves, rv);
            }
            run.train_loss.push_back(tl);
            run.val_loss.push_back(vl);
            run.val_mean_auroc.push_back(va);
            if (vl < best_loss) {
                best_loss = vl;
                run.best_loss_epoch = epoch;
                run.best_loss_head = head;
            }
            if (std::isfinite(va) && va > best_auc) {
                best_auc = va;
                run.best_auroc_epoch = epoch;
                run.best_auroc_head = head;
            }
        });
    if (run.best_loss_head.parameter_count() == 0) run.best_loss_head = last;
    if (run.best_auroc_head.parameter_count() == 0) {
        run.best_auroc_head = run.best_loss_head;
        run.best_auroc_epoch = run.best_loss_epoch;
    }
    return run;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json opt_interval(const std::optional<stats::Interval>& iv) {
    if (!iv) return nullptr;
    return {{"auroc", iv->point}, {"ci_lo", iv->lo}, {"ci_hi", iv->hi}};
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::vector<nlohmann::json> finite_list(const std::vector<double>& v) {
    std::vector<nlohmann::json> out;
    for (const double x : v) out.push_back(finite_or_null(x));
    return out;
}

}  // namespace

nlohmann::json to_json(const SurvivalRecord& r) {
    return {{"exam_id", r.exam_id}, {"event", r.event},   {"event_year", r.event_year},
            {"followup_years", r.followup_years}, {"labels", r.labels}, {"mask", r.mask}};
}

SurvivalRecord record_from_json(const nlohmann::json& j) {
    try {
        SurvivalRecord r;
        r.exam_id = j.at("exam_id").get<std::string>();
        r.event = j.at("event").get<bool>();
        r.event_year = j.at("event_year").get<int>();
        r.followup_years = j.at("followup_years").get<double>();
        r.labels = j.at("labels").get<Curve>();
        r.mask = j.at("mask").get<Curve>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("survival record: ") + e.what());
    }
}

nlohmann::json to_json(const RiskEval& e) {
    nlohmann::json years = nlohmann::json::array();
    for (const auto& y : e.years) {
        years.push_back({{"year", y.year}, {"n", y.n}, {"n_positive", y.n_positive}, {"result", opt_interval(y.auroc)}});
    }
    return {{"years", years}, {"macro", opt_interval(e.macro)}};
}

nlohmann::json to_json(const GroupResult& g) {
    return {{"density", std::string(to_string(g.group))},
            {"n", g.n},
            {"n_positive", g.n_positive},
            {"flagged", g.flagged},
            {"eval", g.eval ? to_json(*g.eval) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const RiskRun& run) {
    return {{"seed", run.seed},
            {"n_val", run.n_val},
            {"best_loss_epoch", run.best_loss_epoch},
            {"best_auroc_epoch", run.best_auroc_epoch},
            {"train_loss", run.train_loss},
            {"val_loss", run.val_loss},
            {"val_mean_auroc", finite_list(run.val_mean_auroc)},
            {"best_loss_head", trainer::head_to_json(run.best_loss_head)},
            {"best_auroc_head", trainer::head_to_json(run.best_auroc_head)}};
}

RiskRun risk_run_from_json(const nlohmann::json& j) {
    try {
        RiskRun run;
        run.seed = j.at("seed").get<std::uint64_t>();
        run.n_val = j.at("n_val").get<std::size_t>();
        run.best_loss_epoch = j.at("best_loss_epoch").get<std::size_t>();
        run.best_auroc_epoch = j.at("best_auroc_epoch").get<std::size_t>();
        run.train_loss = j.at("train_loss").get<std::vector<double>>();
        run.val_loss = j.at("val_loss").get<std::vector<double>>();
        for (const auto& v : j.at("val_mean_auroc")) run.val_mean_auroc.push_back(v.is_null() ? kNaN : v.get<double>());
        run.best_loss_head = trainer::head_from_json(j.at("best_loss_head"));
        run.best_auroc_head = trainer::head_from_json(j.at("best_auroc_head"));
        return run;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("risk run: ") + e.what());
    }
}

}  // namespace tomo::risk
