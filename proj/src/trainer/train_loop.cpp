// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/train_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/schedule.hpp"

namespace tomo::trainer {

LinearHead train_linear(const Matrix& x, std::size_t out_dim, const SampleLoss& loss, const TrainConfig& cfg,
                        const EpochCallback& on_epoch) {
    if (x.rows == 0) fail(ErrorKind::EmptyInput, "no training rows");
    if (cfg.batch_size == 0 || cfg.epochs == 0) fail(ErrorKind::Usage, "epochs and batch size must be positive");
    Rng rng(cfg.seed);
    LinearHead head = LinearHead::random(x.cols, out_dim, rng, cfg.init_scale);
    OptimState state(head.parameter_count(), AdamWConfig{.weight_decay = cfg.weight_decay});

    const std::size_t batches = (x.rows + cfg.batch_size - 1) / cfg.batch_size;
    const ScheduleConfig schedule{cfg.lr, cfg.lr_min, cfg.epochs * batches};

    std::vector<std::size_t> order(x.rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(head.parameter_count());
    std::vector<double> logits(out_dim);
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span(order), rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * cfg.batch_size;
            const std::size_t end = std::min(x.rows, begin + cfg.batch_size);
            const double scale = 1.0 / static_cast<double>(end - begin);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = order[k];
                forward_linear(head, x.row(i), logits);
                const LossGrad lg = loss(logits, i);
                epoch_loss += lg.loss;
                accumulate_linear_grad(head, x.row(i), lg.grad, grad, scale);
            }
            adamw_step(head.params(), grad, state, cosine_lr(schedule, step));
            ++step;
        }
        if (on_epoch) on_epoch(epoch, head, epoch_loss / static_cast<double>(x.rows));
    }
    return head;
}

double mean_loss(const LinearHead& head, const Matrix& x, const SampleLoss& loss) {
    if (x.rows == 0) return 0.0;
    std::vector<double> logits(head.out_dim());
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        forward_linear(head, x.row(i), logits);
        total += loss(logits, i).loss;
    }
    return total / static_cast<double>(x.rows);
}

LrSearchResult tune_learning_rate(const std::function<double(double)>& objective, double lo, double hi, int trials,
                                  std::uint64_t seed) {
    if (!(lo > 0.0) || !(hi >= lo) || trials < 1) fail(ErrorKind::Usage, "learning-rate search needs 0 < lo <= hi");
    Rng rng(seed);
    LrSearchResult out;
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (int t = 0; t < trials; ++t) {
        const double lr = std::exp(rng.uniform(log_lo, log_hi));
        const double value = objective(lr);
        out.trials.push_back({lr, value});
        if (t == 0 || value < out.best_objective) {
            out.best_lr = lr;
            out.best_objective = value;
        }
    }
    return out;
}

}  // namespace tomo::trainer
