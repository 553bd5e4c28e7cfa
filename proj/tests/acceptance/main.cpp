// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <exception>
#include <iostream>
#include <set>

#include "acceptance/harness.hpp"

using namespace tomo::acceptance;

namespace {

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "view aggregation", aggregation_criterion},
    {2, "loss gradients", gradient_criterion},
    {3, "risk curves and masking", risk_curve_criterion},
    {4, "density probe", density_probe_criterion},
    {5, "risk probe", risk_probe_criterion},
    {6, "lesion detection", detection_criterion},
    {7, "statistics", statistics_criterion},
    {8, "ingest", ingest_criterion},
    {9, "determinism", determinism_criterion},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        Stopwatch clock;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", "
                  << fmt(clock.seconds(), 3) << " s): " << o.detail << std::endl;
    }
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
