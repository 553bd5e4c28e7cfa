// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/detect/froc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "tomo/error.hpp"

namespace tomo::detect {

double hit_radius(const Box& truth) noexcept {
    return std::max(0.5 * std::hypot(truth.w, truth.h), 20.0);
}

bool center_hit(const Box& truth, const Box& prediction) noexcept {
    return std::hypot(prediction.cx() - truth.cx(), prediction.cy() - truth.cy()) <= hit_radius(truth);
}

FrocResult froc(std::span<const VolumeTruth> truth, std::span<const ScoredBox> predictions,
                std::span<const double> fp_points) {
    if (truth.empty()) fail(ErrorKind::NoVolumes, "FROC needs at least one volume");
    std::map<std::string, std::size_t> volume_index;
    FrocResult r;
    r.n_volumes = truth.size();
    for (std::size_t v = 0; v < truth.size(); ++v) {
        volume_index.emplace(truth[v].volume_id, v);
        r.n_lesions += truth[v].boxes.size();
    }
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> pred_volume(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto it = volume_index.find(predictions[i].volume_id);
        if (it == volume_index.end()) fail(ErrorKind::MissingKey, "prediction for unknown volume " + predictions[i].volume_id);
        pred_volume[i] = it->second;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& p = predictions[a];
        const auto& q = predictions[b];
        return std::make_tuple(-p.score, p.box.x, p.box.y, p.box.w, p.box.h) <
               std::make_tuple(-q.score, q.box.x, q.box.y, q.box.w, q.box.h);
    });

    std::vector<std::vector<bool>> matched(truth.size());
    for (std::size_t v = 0; v < truth.size(); ++v) matched[v].assign(truth[v].boxes.size(), false);
    const double nv = static_cast<double>(r.n_volumes);
    const double nl = static_cast<double>(r.n_lesions);
    std::size_t tp = 0, fp = 0;
    r.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& p = predictions[order[k]];
        const std::size_t v = pred_volume[order[k]];
        const auto& boxes = truth[v].boxes;
        int best = -1;
        double best_d = 0.0;
        for (std::size_t g = 0; g < boxes.size(); ++g) {
            if (matched[v][g] || !center_hit(boxes[g], p.box)) continue;
            const double d = std::hypot(p.box.cx() - boxes[g].cx(), p.box.cy() - boxes[g].cy());
            if (best < 0 || d < best_d) {
                best = static_cast<int>(g);
                best_d = d;
            }
        }
        if (best >= 0) {
            matched[v][static_cast<std::size_t>(best)] = true;
            ++tp;
        } else {
            ++fp;
        }
        const bool boundary = k + 1 == order.size() || predictions[order[k + 1]].score != p.score;
        if (boundary) {
            r.curve.push_back({p.score, static_cast<double>(fp) / nv, nl > 0 ? static_cast<double>(tp) / nl : 0.0});
        }
    }
    r.fp_points.assign(fp_points.begin(), fp_points.end());
    for (const double f : fp_points) {
        double s = 0.0;
        for (const auto& pt : r.curve) {
            if (pt.fp_per_volume <= f) s = std::max(s, pt.sensitivity);
        }
        r.sensitivities.push_back(s);
    }
    if (!r.sensitivities.empty()) {
        r.average = std::accumulate(r.sensitivities.begin(), r.sensitivities.end(), 0.0) /
                    static_cast<double>(r.sensitivities.size());
    }
    return r;
}

nlohmann::json to_json(const FrocResult& r) {
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t i = 0; i < r.fp_points.size(); ++i) {
        table.push_back({{"fp_per_volume", r.fp_points[i]}, {"sensitivity", r.sensitivities[i]}});
    }
    return {{"n_volumes", r.n_volumes}, {"n_lesions", r.n_lesions}, {"sensitivity", table},
            {"average_sensitivity", r.average}};
}

std::string froc_curve_csv(const FrocResult& r) {
    std::ostringstream out;
    out.precision(17);
    out << "fp_per_volume,sensitivity,threshold\n";
    for (const auto& p : r.curve) {
        out << p.fp_per_volume << ',' << p.sensitivity << ',';
        if (std::isinf(p.threshold)) {
            out << "inf";
        } else {
            out << p.threshold;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace tomo::detect
