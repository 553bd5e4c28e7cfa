// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tomo/error.hpp"
#include "tomo/study.hpp"

namespace tomo::embeddings {

static_assert(std::endian::native == std::endian::little, "tensor IO assumes a little-endian host");

namespace {

template <typename T>
std::string encode(const BasicTensor<T>& t, std::uint16_t version) {
    if (t.dims.size() > 0xffff) fail(ErrorKind::DimMismatch, "tensor rank too large");
    if (t.element_count() != t.data.size()) fail(ErrorKind::DimMismatch, "tensor dims do not match payload");
    std::string out = "EMB1";
    const auto rank = static_cast<std::uint16_t>(t.dims.size());
    out.append(reinterpret_cast<const char*>(&version), 2);
    out.append(reinterpret_cast<const char*>(&rank), 2);
    out.append(reinterpret_cast<const char*>(t.dims.data()), t.dims.size() * 4);
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(T));
    return out;
}

template <typename T>
BasicTensor<T> decode(std::string_view bytes, std::uint16_t want_version, std::size_t* consumed) {
    if (bytes.size() < 8 || bytes.substr(0, 4) != "EMB1") fail(ErrorKind::CorruptHeader, "bad tensor magic");
    std::uint16_t version = 0;
    std::uint16_t rank = 0;
    std::memcpy(&version, bytes.data() + 4, 2);
    std::memcpy(&rank, bytes.data() + 6, 2);
    if (version != want_version) fail(ErrorKind::CorruptHeader, "unexpected tensor version " + std::to_string(version));
    const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
    if (bytes.size() < header) fail(ErrorKind::CorruptHeader, "truncated tensor header");
    BasicTensor<T> t;
    t.dims.resize(rank);
    std::memcpy(t.dims.data(), bytes.data() + 8, 4 * static_cast<std::size_t>(rank));
    const std::size_t n = t.element_count();
    const std::size_t total = header + n * sizeof(T);
    if (bytes.size() < total || (consumed == nullptr && bytes.size() != total)) {
        fail(ErrorKind::CorruptHeader, "tensor payload length does not match its dims");
    }
    t.data.resize(n);
    std::memcpy(t.data.data(), bytes.data() + header, n * sizeof(T));
    if (consumed != nullptr) *consumed = total;
    return t;
}

}  // namespace

std::string encode_tensor(const Tensor& t) { return encode(t, kTensorVersionF32); }
std::string encode_tensor(const TensorF64& t) { return encode(t, kTensorVersionF64); }

Tensor decode_tensor(std::string_view bytes, std::size_t* consumed) {
    return decode<float>(bytes, kTensorVersionF32, consumed);
}

TensorF64 decode_tensor_f64(std::string_view bytes, std::size_t* consumed) {
    return decode<double>(bytes, kTensorVersionF64, consumed);
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_file_atomic(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingKey, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_tensor(ss.str());
}

}  // namespace tomo::embeddings
