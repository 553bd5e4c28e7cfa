// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tomo/embeddings/tensor_io.hpp"
#include "tomo/embeddings/token_grid.hpp"
#include "tomo/study.hpp"

namespace tomo::embeddings {

/// Directory of EMB1 tensors keyed by "patient|exam|VIEW", with a sidecar
/// index.json mapping key -> file name. File names derive from the key hash,
/// so a key resolves even before the index is flushed. Writes go through a
/// temporary file and rename; readers never observe partial tensors.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::filesystem::path dir);
    ~EmbeddingStore();

    EmbeddingStore(const EmbeddingStore&) = delete;
    EmbeddingStore& operator=(const EmbeddingStore&) = delete;

    /// Throws EmptyInput for non-finite values and DimMismatch when dims and
    /// payload length disagree.
    void write(const std::string& key, const Tensor& tensor);

    /// Throws MissingKey or CorruptHeader.
    Tensor read(const std::string& key) const;

    bool contains(const std::string& key) const;
    std::vector<std::string> keys() const;

    /// Stores a view as a rank-3 tensor [slices, 1 + patches, dim] with the
    /// CLS token in row 0 of each slice.
    void write_grids(const VolumeRef& ref, std::span<const TokenGrid> grids);
    std::vector<TokenGrid> read_grids(const VolumeRef& ref) const;

    /// Writes index.json. Also runs on destruction.
    void flush() const;

    const std::filesystem::path& dir() const noexcept { return dir_; }

    static std::string file_for(const std::string& key);

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> index_;
};

}  // namespace tomo::embeddings
