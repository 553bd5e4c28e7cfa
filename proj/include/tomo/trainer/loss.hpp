// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tomo::trainer {

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// loss = -log softmax(logits)[target], grad = softmax - onehot(target).
LossGrad softmax_ce(std::span<const double> logits, std::size_t target);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values) noexcept;

/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace tomo::trainer
