// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <json.hpp>

#include "tomo/trainer/adamw.hpp"
#include "tomo/trainer/linear.hpp"

namespace tomo::trainer {

struct Checkpoint {
    LinearHead head;
    OptimState state;
    nlohmann::json hyperparams = nlohmann::json::object();
};

// File layout: "TCK1" | u32 header length | JSON header (dims, step,
// hyperparams) | EMB1 f64 blocks for W, b, m, v.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json head_to_json(const LinearHead& head);
LinearHead head_from_json(const nlohmann::json& j);

}  // namespace tomo::trainer
