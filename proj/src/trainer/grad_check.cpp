// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "tomo/error.hpp"

namespace tomo::trainer {

GradCheckResult grad_check(const Objective& objective, std::span<const double> params, double tol, double h,
                           double floor) {
    const LossGrad at = objective(params);
    if (at.grad.size() != params.size()) fail(ErrorKind::ShapeMismatch, "gradient size differs from parameters");
    std::vector<double> x(params.begin(), params.end());
    GradCheckResult out;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double orig = x[k];
        x[k] = orig + h;
        const double fp = objective(x).loss;
        x[k] = orig - h;
        const double fm = objective(x).loss;
        x[k] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double analytic = at.grad[k];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        const double err = std::abs(analytic - numeric) / denom;
        if (err > out.max_rel_error || !std::isfinite(err)) {
            out.max_rel_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
            out.worst_index = k;
        }
    }
    out.passed = out.max_rel_error < tol;
    return out;
}

}  // namespace tomo::trainer
