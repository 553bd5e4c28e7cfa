// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/linear.hpp"

#include <cmath>
#include <string>

#include "tomo/error.hpp"

namespace tomo::trainer {

LinearHead::LinearHead(std::size_t in, std::size_t out) : in_(in), out_(out), params_(in * out + out, 0.0) {}

LinearHead LinearHead::random(std::size_t in, std::size_t out, Rng& rng, double scale) {
    LinearHead head(in, out);
    for (std::size_t k = 0; k < in * out; ++k) head.params_[k] = scale * rng.normal();
    return head;
}

bool LinearHead::all_finite() const noexcept {
    for (const double p : params_) {
        if (!std::isfinite(p)) return false;
    }
    return true;
}

void forward_linear(const LinearHead& head, std::span<const double> x, std::span<double> logits) {
    if (x.size() != head.in_dim()) {
        fail(ErrorKind::DimMismatch,
             "input has " + std::to_string(x.size()) + " features, head expects " + std::to_string(head.in_dim()));
    }
    if (logits.size() != head.out_dim()) fail(ErrorKind::DimMismatch, "logit buffer size mismatch");
    const auto w = head.weights();
    const std::size_t in = head.in_dim();
    for (std::size_t o = 0; o < head.out_dim(); ++o) {
        double acc = head.bias(o);
        const double* row = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
        logits[o] = acc;
    }
}

std::vector<double> forward_linear(const LinearHead& head, std::span<const double> x) {
    std::vector<double> logits(head.out_dim());
    forward_linear(head, x, logits);
    return logits;
}

void accumulate_linear_grad(const LinearHead& head, std::span<const double> x, std::span<const double> grad_logits,
                            std::span<double> grad_params, double scale) {
    const std::size_t in = head.in_dim();
    const std::size_t out = head.out_dim();
    if (x.size() != in || grad_logits.size() != out || grad_params.size() != head.parameter_count()) {
        fail(ErrorKind::ShapeMismatch, "gradient buffers do not match the head");
    }
    for (std::size_t o = 0; o < out; ++o) {
        const double g = scale * grad_logits[o];
        if (g == 0.0) continue;
        double* row = grad_params.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += g * x[i];
        grad_params[out * in + o] += g;
    }
}

}  // namespace tomo::trainer
