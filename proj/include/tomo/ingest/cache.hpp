// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "tomo/ingest/dicomweb.hpp"

namespace tomo::ingest {

inline constexpr int kMaxPrefetchDepth = 64;

struct CacheConfig {
    std::uint64_t capacity_bytes = 0;
    std::filesystem::path root_dir;
    int prefetch_depth = 0;
};

/// Bounded, rotating on-disk cache of fetched volumes with least-recently-used
/// eviction.
///
/// Layout: root_dir/<sha256(key)>.bin per entry plus root_dir/index.json
/// recording sizes and last-access counters; an existing index is adopted on
/// construction. Thread-safe: concurrent requests for the same key fetch once
/// and the rest wait. A returned path stays valid until the entry is evicted.
class VolumeCache {
public:
    using Fetcher = std::function<std::string()>;

    explicit VolumeCache(CacheConfig config);

    /// Returns the local path of `key`, fetching it on a miss. After the call
    /// the resident total never exceeds capacity_bytes.
    /// Throws CapacityError when the fetched item alone exceeds capacity.
    std::filesystem::path get_or_fetch(const std::string& key, const Fetcher& fetch);

    /// Keyed by "study|series" of the volume.
    std::filesystem::path get_or_fetch(DicomWebClient& client, const VolumeRef& ref);

    bool contains(const std::string& key) const;

    /// Resident keys from least to most recently used.
    std::vector<std::string> resident_keys() const;
    std::uint64_t total_bytes() const;
    const CacheConfig& config() const noexcept { return config_; }

    static std::string volume_key(const VolumeRef& ref);
    static std::string file_name(const std::string& key);

private:
    struct Entry {
        std::string file;
        std::uint64_t size = 0;
        std::uint64_t last_access = 0;
    };

    void load_index();
    void persist_index_locked() const;

    CacheConfig config_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> in_flight_;
    std::uint64_t total_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace tomo::ingest
