// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/raw_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tomo/error.hpp"

namespace tomo::ingest {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

}  // namespace

std::string encode_raw_slice(const Image& img, double scale) {
    std::string out = "RAW1";
    put_u32(out, static_cast<std::uint32_t>(img.height));
    put_u32(out, static_cast<std::uint32_t>(img.width));
    out.reserve(out.size() + img.size() * 2);
    for (const double p : img.pixels) {
        const double v = std::clamp(std::round(p * scale), 0.0, 65535.0);
        const auto u = static_cast<std::uint16_t>(v);
        out.push_back(static_cast<char>(u & 0xff));
        out.push_back(static_cast<char>(u >> 8));
    }
    return out;
}

Image decode_raw_slice(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RAW1", 4) != 0) {
        fail(ErrorKind::CorruptHeader, "not a RAW1 slice");
    }
    const std::uint32_t rows = get_u32(bytes, 4);
    const std::uint32_t cols = get_u32(bytes, 8);
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    if (rows == 0 || cols == 0 || bytes.size() != 12 + 2 * n) {
        fail(ErrorKind::CorruptHeader, "RAW1 payload does not match its dimensions");
    }
    Image img(static_cast<int>(rows), static_cast<int>(cols));
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::size_t off = 12 + 2 * static_cast<std::size_t>(i);
        img.pixels[static_cast<std::size_t>(i)] = static_cast<double>(bytes[off] | (bytes[off + 1] << 8));
    }
    return img;
}

Image decode_raw_slice(const std::string& bytes) {
    return decode_raw_slice(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace tomo::ingest
