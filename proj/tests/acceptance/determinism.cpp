// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include "acceptance/harness.hpp"
#include "tomo/cli.hpp"

namespace fs = std::filesystem;

namespace tomo::acceptance {

namespace {

const char* const kOutputs[] = {"data/manifest.json", "density_run.json", "density_eval.json", "risk_run.json",
                                "risk_eval.json"};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs the pipeline with relative paths inside `root`; returns the failing step or "".
std::string pipeline(const fs::path& root) {
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path home = fs::current_path();
    fs::current_path(root);
    const std::vector<std::vector<std::string>> steps{
        {"phantom", "--seed", "9", "--out", "data", "--exams", "240", "--slices", "2"},
        {"embed", "--manifest", "data/manifest.json", "--store", "store", "--seed", "9", "--dim", "16", "--grid", "2",
         "--density-separation", "2", "--risk-separation", "1"},
        {"density", "train", "--store", "store", "--manifest", "data/manifest.json", "--epochs", "20", "--lr", "1e-2",
         "--out", "density_run.json"},
        {"density", "eval", "--run", "density_run.json", "--split", "test", "--bootstrap", "200", "--out",
         "density_eval.json"},
        {"risk", "train", "--store", "store", "--manifest", "data/manifest.json", "--epochs", "20", "--lr", "1e-2",
         "--out", "risk_run.json"},
        {"risk", "eval", "--head", "risk_run.json", "--split", "test", "--bootstrap", "200", "--out",
         "risk_eval.json"},
    };
    std::string failed;
    for (const auto& step : steps) {
        std::vector<std::string> args{"--deterministic"};
        args.insert(args.end(), step.begin(), step.end());
        std::ostringstream out, err;
        if (cli::run(args, out, err) != cli::kExitOk) {
            failed = step[0] + (step.size() > 1 && step[1][0] != '-' ? " " + step[1] : "") + ": " + err.str();
            break;
        }
    }
    fs::current_path(home);
    return failed;
}

}  // namespace

Outcome determinism_criterion() {
    Checks checks;
    const fs::path base = fs::temp_directory_path() / "tomo_acceptance_determinism";
    const auto a = pipeline(base / "first");
    const auto b = pipeline(base / "second");
    checks.expect(a.empty() && b.empty(), a.empty() && b.empty() ? "both pipeline runs succeeded" : a + b);
    if (!a.empty() || !b.empty()) return checks.outcome();
    for (const char* name : kOutputs) {
        const auto x = slurp(base / "first" / name);
        const auto y = slurp(base / "second" / name);
        checks.expect(!x.empty() && x == y, std::string(name) + " byte-identical (" + std::to_string(x.size()) + " B)");
    }
    fs::remove_all(base);
    return checks.outcome();
}

}  // namespace tomo::acceptance
