// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/embeddings/store.hpp"

#include <cmath>

#include <json.hpp>

#include "tomo/error.hpp"
#include "tomo/ingest/sha256.hpp"

namespace tomo::embeddings {

namespace fs = std::filesystem;

EmbeddingStore::EmbeddingStore(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    const auto index = dir_ / "index.json";
    if (fs::exists(index)) index_ = read_json_file(index).get<std::map<std::string, std::string>>();
}

EmbeddingStore::~EmbeddingStore() {
    try {
        flush();
    } catch (...) {
    }
}

std::string EmbeddingStore::file_for(const std::string& key) { return sha256_hex(key).substr(0, 32) + ".emb"; }

void EmbeddingStore::write(const std::string& key, const Tensor& tensor) {
    if (tensor.element_count() != tensor.data.size()) fail(ErrorKind::DimMismatch, "tensor dims do not match payload");
    for (const float v : tensor.data) {
        if (!std::isfinite(v)) fail(ErrorKind::EmptyInput, "refusing to store non-finite tensor for " + key);
    }
    const std::string file = file_for(key);
    write_tensor(dir_ / file, tensor);
    std::lock_guard lock(mu_);
    index_[key] = file;
}

Tensor EmbeddingStore::read(const std::string& key) const {
    std::string file;
    {
        std::lock_guard lock(mu_);
        auto it = index_.find(key);
        file = it != index_.end() ? it->second : file_for(key);
    }
    if (!fs::exists(dir_ / file)) fail(ErrorKind::MissingKey, "no embedding for " + key);
    return read_tensor(dir_ / file);
}

bool EmbeddingStore::contains(const std::string& key) const {
    {
        std::lock_guard lock(mu_);
        if (index_.contains(key)) return true;
    }
    return fs::exists(dir_ / file_for(key));
}

std::vector<std::string> EmbeddingStore::keys() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [k, _] : index_) out.push_back(k);
    return out;
}

void EmbeddingStore::write_grids(const VolumeRef& ref, std::span<const TokenGrid> grids) {
    if (grids.empty()) fail(ErrorKind::EmptyInput, "no slices for " + ref.key());
    const std::size_t dim = grids.front().dim();
    const std::size_t patches = grids.front().patch_count();
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(grids.size()), static_cast<std::uint32_t>(patches + 1),
              static_cast<std::uint32_t>(dim)};
    t.data.reserve(grids.size() * (patches + 1) * dim);
    for (const auto& g : grids) {
        if (g.dim() != dim || g.patch_count() != patches) fail(ErrorKind::DimMismatch, "slices disagree on shape");
        t.data.insert(t.data.end(), g.cls().begin(), g.cls().end());
        t.data.insert(t.data.end(), g.patches().begin(), g.patches().end());
    }
    write(ref.key(), t);
}

std::vector<TokenGrid> EmbeddingStore::read_grids(const VolumeRef& ref) const {
    const Tensor t = read(ref.key());
    if (t.dims.size() != 3) fail(ErrorKind::CorruptHeader, ref.key() + " is not a rank-3 token tensor");
    const std::size_t slices = t.dims[0];
    const std::size_t tokens = t.dims[1];
    const std::size_t dim = t.dims[2];
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(tokens - 1))));
    if (tokens < 2 || side * side != tokens - 1) fail(ErrorKind::CorruptHeader, ref.key() + " has no square patch grid");
    std::vector<TokenGrid> out;
    out.reserve(slices);
    for (std::size_t s = 0; s < slices; ++s) {
        const float* base = t.data.data() + s * tokens * dim;
        std::vector<float> cls(base, base + dim);
        std::vector<float> patches(base + dim, base + tokens * dim);
        out.emplace_back(std::move(cls), std::move(patches), side);
    }
    return out;
}

void EmbeddingStore::flush() const {
    nlohmann::json doc;
    {
        std::lock_guard lock(mu_);
        doc = index_;
    }
    write_json_file(dir_ / "index.json", doc);
}

}  // namespace tomo::embeddings
