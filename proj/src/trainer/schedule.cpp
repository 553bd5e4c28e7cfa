// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tomo/error.hpp"

namespace tomo::trainer {

double cosine_lr(const ScheduleConfig& cfg, std::uint64_t step) {
    if (cfg.total_steps < 1 || cfg.lr_min < 0.0 || cfg.lr_min > cfg.lr_max) {
        fail(ErrorKind::Usage, "cosine schedule needs T >= 1 and 0 <= lr_min <= lr_max");
    }
    const double t = static_cast<double>(std::min(step, cfg.total_steps));
    const double progress = t / static_cast<double>(cfg.total_steps);
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace tomo::trainer
