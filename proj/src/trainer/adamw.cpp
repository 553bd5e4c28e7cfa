// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/adamw.hpp"

#include <cmath>

#include "tomo/error.hpp"

namespace tomo::trainer {

void adamw_step(std::span<double> params, std::span<const double> grads, OptimState& state, double lr) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        fail(ErrorKind::ShapeMismatch, "parameter, gradient and moment sizes differ");
    }
    const auto& c = state.config;
    ++state.t;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        state.m[k] = c.beta1 * state.m[k] + (1.0 - c.beta1) * g;
        state.v[k] = c.beta2 * state.v[k] + (1.0 - c.beta2) * g * g;
        const double m_hat = state.m[k] / bc1;
        const double v_hat = state.v[k] / bc2;
        const double theta = params[k];
        params[k] = theta - lr * m_hat / (std::sqrt(v_hat) + c.eps) - lr * c.weight_decay * theta;
    }
}

}  // namespace tomo::trainer
