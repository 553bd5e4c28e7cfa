// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace tomo::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Accumulates named sub-checks; the criterion passes when all of them do.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
        notes_.push_back((ok ? "ok " : "FAILED ") + what);
    }
    void note(const std::string& what) { notes_.push_back(what); }

    Outcome outcome() const {
        std::string detail;
        for (const auto& n : notes_) {
            if (!detail.empty()) detail += "; ";
            detail += n;
        }
        return {failures_.empty(), detail};
    }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

inline std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Outcome aggregation_criterion();
Outcome gradient_criterion();
Outcome risk_curve_criterion();
Outcome density_probe_criterion();
Outcome risk_probe_criterion();
Outcome detection_criterion();
Outcome statistics_criterion();
Outcome ingest_criterion();
Outcome determinism_criterion();

}  // namespace tomo::acceptance
