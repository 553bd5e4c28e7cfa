// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tomo::trainer {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

struct OptimState {
    AdamWConfig config;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    OptimState() = default;
    OptimState(std::size_t n, AdamWConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

/// One decoupled-weight-decay Adam step:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,  t <- t+1
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
/// with m_hat, v_hat bias corrected. Throws ShapeMismatch.
void adamw_step(std::span<double> params, std::span<const double> grads, OptimState& state, double lr);

}  // namespace tomo::trainer
