// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tomo::embeddings {

// Binary tensor block:
//   "EMB1" | u16 version | u16 rank | rank x u32 dims | little-endian payload
// version 1 carries f32 values, version 2 carries f64 values.

template <typename T>
struct BasicTensor {
    std::vector<std::uint32_t> dims;
    std::vector<T> data;

    std::size_t element_count() const noexcept {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;
};

using Tensor = BasicTensor<float>;
using TensorF64 = BasicTensor<double>;

inline constexpr std::uint16_t kTensorVersionF32 = 1;
inline constexpr std::uint16_t kTensorVersionF64 = 2;

std::string encode_tensor(const Tensor& t);
std::string encode_tensor(const TensorF64& t);

/// Decodes one block from the front of `bytes`; `consumed` (if given)
/// receives the block length so blocks can be concatenated.
/// Throws CorruptHeader on bad magic, version, rank or payload length.
Tensor decode_tensor(std::string_view bytes, std::size_t* consumed = nullptr);
TensorF64 decode_tensor_f64(std::string_view bytes, std::size_t* consumed = nullptr);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace tomo::embeddings
