// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tomo/image.hpp"

namespace tomo::ingest {

// Minimal single-frame pixel container used in place of full DICOM parsing:
//   "RAW1" | u32 rows | u32 cols | rows*cols little-endian u16 samples

std::string encode_raw_slice(const Image& img, double scale = 4095.0);

/// Pixel values are returned as stored (no rescale). Throws CorruptHeader.
Image decode_raw_slice(std::span<const std::uint8_t> bytes);
Image decode_raw_slice(const std::string& bytes);

}  // namespace tomo::ingest
