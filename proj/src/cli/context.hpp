// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace tomo::cli {

struct Context {
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    bool deterministic = false;
    unsigned threads = 1;
    bool verbose = false;

    std::string command;
    const CLI::App* active = nullptr;
    std::function<void()> action;
    std::vector<std::string> produced;
    nlohmann::json summary = nlohmann::json::object();

    void log(const std::string& message) const;

    /// Metadata block every artifact starts with: tool, version, command and
    /// the fully resolved options (plus a timestamp unless deterministic).
    nlohmann::json stamp() const;

    void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
    void write_text(const std::filesystem::path& path, const std::string& text);
    void record(const std::filesystem::path& path);
};

/// Registers `fn` as the action of `sub`, run after parsing succeeds.
void on_run(CLI::App* sub, Context& ctx, std::function<void()> fn);

void register_data_commands(CLI::App& app, Context& ctx);
void register_density_commands(CLI::App& app, Context& ctx);
void register_risk_commands(CLI::App& app, Context& ctx);
void register_detect_commands(CLI::App& app, Context& ctx);
void register_stats_commands(CLI::App& app, Context& ctx);

std::vector<double> parse_double_list(const std::string& text);

}  // namespace tomo::cli

#include "tomo/embeddings/features.hpp"
#include "tomo/trainer/linear.hpp"

namespace tomo::cli {

/// Complete exams of a split ("train", "val", "test"; "all" for every split).
std::vector<const Exam*> exams_in_split(const Dataset& ds, const std::string& split);

trainer::Matrix feature_matrix(const embeddings::EmbeddingStore& store, std::span<const Exam* const> exams,
                               embeddings::AggregationMode mode);

}  // namespace tomo::cli
