// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/loss.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/error.hpp"

namespace tomo::trainer {

double softplus(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

LossGrad softmax_ce(std::span<const double> logits, std::size_t target) {
    if (target >= logits.size()) fail(ErrorKind::DimMismatch, "target class outside logits");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double v : logits) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    LossGrad out;
    out.loss = log_z - logits[target];
    out.grad.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) out.grad[k] = std::exp(logits[k] - log_z);
    out.grad[target] -= 1.0;
    return out;
}

std::size_t argmax(std::span<const double> values) noexcept {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[best]) best = k;
    }
    return best;
}

}  // namespace tomo::trainer
