// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "tomo/study.hpp"

namespace tomo::ingest {

/// Extracts the BI-RADS density category from free report text.
///
/// Recognizes the 5th-edition composition wording ("almost entirely fatty",
/// "scattered areas of fibroglandular density", "heterogeneously dense",
/// "extremely dense") and letter forms such as "density: C" or
/// "BI-RADS density category B". Matching is case-insensitive.
/// Throws NoMatch when nothing matches and Ambiguous when two different
/// categories are found.
DensityCategory parse_density_report(std::string_view report_text);

}  // namespace tomo::ingest
