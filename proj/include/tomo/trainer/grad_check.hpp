// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tomo/trainer/loss.hpp"

namespace tomo::trainer {

using Objective = std::function<LossGrad(std::span<const double>)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    bool passed = true;
};

/// Compares the analytic gradient at `params` with central differences
/// (f(x+h) - f(x-h)) / 2h per coordinate. The per-coordinate error is
/// |analytic - numeric| / max(|analytic|, |numeric|, floor); `floor` keeps
/// near-zero components from dominating.
GradCheckResult grad_check(const Objective& objective, std::span<const double> params, double tol,
                           double h = 1e-4, double floor = 1e-3);

}  // namespace tomo::trainer
