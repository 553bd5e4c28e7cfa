// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tomo/rng.hpp"

namespace tomo::trainer {

/// Dense row-major matrix of doubles, one sample per row.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data.data() + i * cols, cols}; }
};

/// y = W x + b. Parameters live in one flat vector, W (out x in, row-major)
/// followed by b, so optimizers can treat the head as a single buffer.
class LinearHead {
public:
    LinearHead() = default;
    LinearHead(std::size_t in, std::size_t out);

    /// Weights ~ N(0, scale^2), bias zero.
    static LinearHead random(std::size_t in, std::size_t out, Rng& rng, double scale);

    std::size_t in_dim() const noexcept { return in_; }
    std::size_t out_dim() const noexcept { return out_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    double& weight(std::size_t o, std::size_t i) noexcept { return params_[o * in_ + i]; }
    double weight(std::size_t o, std::size_t i) const noexcept { return params_[o * in_ + i]; }
    double& bias(std::size_t o) noexcept { return params_[out_ * in_ + o]; }
    double bias(std::size_t o) const noexcept { return params_[out_ * in_ + o]; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::span<const double> weights() const noexcept { return {params_.data(), out_ * in_}; }
    std::span<const double> biases() const noexcept { return {params_.data() + out_ * in_, out_}; }

    bool all_finite() const noexcept;

    friend bool operator==(const LinearHead&, const LinearHead&) = default;

private:
    std::size_t in_ = 0;
    std::size_t out_ = 0;
    std::vector<double> params_;
};

/// Throws DimMismatch when x does not match the head's input size.
std::vector<double> forward_linear(const LinearHead& head, std::span<const double> x);
void forward_linear(const LinearHead& head, std::span<const double> x, std::span<double> logits);

/// grad_params += d(loss)/d(params) given d(loss)/d(logits) for input x, scaled by `scale`.
void accumulate_linear_grad(const LinearHead& head, std::span<const double> x, std::span<const double> grad_logits,
                            std::span<double> grad_params, double scale = 1.0);

}  // namespace tomo::trainer
