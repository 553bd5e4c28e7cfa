// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tomo/trainer/adamw.hpp"
#include "tomo/trainer/linear.hpp"
#include "tomo/trainer/loss.hpp"

namespace tomo::trainer {

struct TrainConfig {
    std::size_t epochs = 75;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    double lr_min = 0.0;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    double init_scale = 0.01;
};

/// Loss and d(loss)/d(logits) of sample `index` given its logits.
using SampleLoss = std::function<LossGrad(std::span<const double> logits, std::size_t index)>;

/// Called after every epoch with the current head and mean training loss.
using EpochCallback = std::function<void(std::size_t epoch, const LinearHead& head, double train_loss)>;

/// Minibatch AdamW with a per-step cosine schedule over epochs x batches.
/// Each epoch visits the rows in a Fisher-Yates order drawn from
/// Rng(seed); batch gradients are summed in visit order and averaged.
/// Bit-deterministic for a fixed config.
LinearHead train_linear(const Matrix& x, std::size_t out_dim, const SampleLoss& loss, const TrainConfig& cfg,
                        const EpochCallback& on_epoch = {});

/// Mean loss of the head over all rows.
double mean_loss(const LinearHead& head, const Matrix& x, const SampleLoss& loss);

struct LrTrial {
    double lr = 0.0;
    double objective = 0.0;
};

struct LrSearchResult {
    double best_lr = 0.0;
    double best_objective = 0.0;
    std::vector<LrTrial> trials;
};

/// Log-uniform random search over [lo, hi]; lower objective wins.
LrSearchResult tune_learning_rate(const std::function<double(double)>& objective, double lo, double hi, int trials,
                                  std::uint64_t seed);

}  // namespace tomo::trainer
