// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace tomo::trainer {

struct ScheduleConfig {
    double lr_max = 1e-3;
    double lr_min = 0.0;
    std::uint64_t total_steps = 1;
};

/// lr_min + (lr_max - lr_min) (1 + cos(pi t / T)) / 2, with t clamped to [0, T].
double cosine_lr(const ScheduleConfig& cfg, std::uint64_t step);

}  // namespace tomo::trainer
