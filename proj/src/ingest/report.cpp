// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/report.hpp"

#include <regex>
#include <set>
#include <string>

#include "tomo/error.hpp"

namespace tomo::ingest {

namespace {

struct Pattern {
    std::regex re;
    // -1: the category is the letter in capture group 1.
    int rank;
};

const std::vector<Pattern>& patterns() {
    static const auto flags = std::regex::ECMAScript | std::regex::icase;
    static const std::vector<Pattern> list = {
        {std::regex(R"(\b(?:almost\s+)?entirely\s+fatty\b)", flags), 0},
        {std::regex(R"(\bscattered\s+(?:areas\s+of\s+)?fibroglandular\s+(?:density|tissue)\b)", flags), 1},
        {std::regex(R"(\bheterogeneously\s+dense\b)", flags), 2},
        {std::regex(R"(\bextremely\s+dense\b)", flags), 3},
        // Letter forms: "density: C", "BI-RADS density B", "density category (D)".
        {std::regex(R"(\bdensity(?:\s+category)?\s*(?:[:=]|\bis\b)?\s*\(?([a-d])\)?(?![a-z0-9]))", flags), -1},
        {std::regex(R"(\bbi-?rads\s+(?:breast\s+)?(?:density|composition)\s*(?:category\s*)?[:=]?\s*\(?([a-d])\)?(?![a-z0-9]))", flags), -1},
        {std::regex(R"(\b(?:breast\s+)?composition\s*(?:category\s*)?[:=]\s*\(?([a-d])\)?(?![a-z0-9]))", flags), -1},
    };
    return list;
}

}  // namespace

DensityCategory parse_density_report(std::string_view report_text) {
    const std::string text(report_text);
    std::set<int> found;
    for (const auto& p : patterns()) {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), p.re); it != std::sregex_iterator(); ++it) {
            if (p.rank >= 0) {
                found.insert(p.rank);
            } else {
                const char c = static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0])));
                found.insert(c - 'A');
            }
        }
    }
    if (found.empty()) fail(ErrorKind::NoMatch, "no BI-RADS density phrase in report");
    if (found.size() > 1) {
        std::string cats;
        for (const int r : found) cats += to_string(density_from_rank(r));
        fail(ErrorKind::Ambiguous, "conflicting density phrases: " + cats);
    }
    return density_from_rank(*found.begin());
}

}  // namespace tomo::ingest
