// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/aggregate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "tomo/error.hpp"

namespace tomo::embeddings {

std::string_view to_string(AggregationMode mode) noexcept {
    switch (mode) {
        case AggregationMode::ClsMean: return "cls-mean";
        case AggregationMode::ClsMeanStd: return "cls-mean-std";
        case AggregationMode::PatchMean: return "patch-mean";
        case AggregationMode::PatchMeanStd: return "patch-mean-std";
    }
    return "?";
}

AggregationMode parse_aggregation_mode(std::string_view text) {
    std::string norm;
    for (const char c : text) {
        if (c != '-' && c != '_') norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (norm == "clsmean") return AggregationMode::ClsMean;
    if (norm == "clsmeanstd") return AggregationMode::ClsMeanStd;
    if (norm == "patchmean") return AggregationMode::PatchMean;
    if (norm == "patchmeanstd") return AggregationMode::PatchMeanStd;
    fail(ErrorKind::Usage, "unknown aggregation mode '" + std::string(text) + "'");
}

namespace {

// Welford accumulator over vectors of a fixed dimension.
class RunningMoments {
public:
    explicit RunningMoments(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

    void add(std::span<const float> x) {
        ++n_;
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < mean_.size(); ++k) {
            const double v = x[k];
            const double delta = v - mean_[k];
            mean_[k] += delta * inv;
            m2_[k] += delta * (v - mean_[k]);
        }
    }

    std::vector<double> result(bool with_std) const {
        std::vector<double> out = mean_;
        if (with_std) {
            out.reserve(2 * mean_.size());
            for (const double m2 : m2_) out.push_back(std::sqrt(std::max(m2, 0.0) / static_cast<double>(n_)));
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

}  // namespace

std::vector<double> aggregate_view(std::span<const TokenGrid> slices, AggregationMode mode) {
    if (slices.empty()) fail(ErrorKind::EmptyInput, "aggregate_view needs at least one slice");
    const std::size_t dim = slices.front().dim();
    for (const auto& s : slices) {
        if (s.dim() != dim) fail(ErrorKind::DimMismatch, "slices disagree on token dimension");
    }
    RunningMoments acc(dim);
    const bool patches = mode == AggregationMode::PatchMean || mode == AggregationMode::PatchMeanStd;
    for (const auto& s : slices) {
        if (patches) {
            for (std::size_t p = 0; p < s.patch_count(); ++p) acc.add(s.patch(p));
        } else {
            acc.add(s.cls());
        }
    }
    return acc.result(has_std(mode));
}

StudyFeatures assemble_study(const std::map<ViewKind, std::vector<double>>& views) {
    StudyFeatures out;
    std::size_t dim = 0;
    for (const ViewKind v : kAllViews) {
        auto it = views.find(v);
        if (it == views.end()) fail(ErrorKind::MissingView, "view " + std::string(to_string(v)) + " is missing");
        if (dim == 0) dim = it->second.size();
        if (it->second.size() != dim || dim == 0) fail(ErrorKind::DimMismatch, "views disagree on feature size");
    }
    out.values.reserve(4 * dim);
    for (const ViewKind v : kAllViews) {
        const auto& vec = views.at(v);
        out.values.insert(out.values.end(), vec.begin(), vec.end());
    }
    return out;
}

}  // namespace tomo::embeddings
