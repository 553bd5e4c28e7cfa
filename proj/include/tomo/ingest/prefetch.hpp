// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "tomo/ingest/cache.hpp"

namespace tomo::ingest {

/// Streams volumes through a VolumeCache with up to `depth` fetches in flight.
/// Results are delivered in input order; next() blocks until the following
/// volume is ready. Workers never run more than `depth` items ahead of the
/// consumer, so the window is bounded. depth == 0 fetches synchronously.
class Prefetcher {
public:
    using Fetch = std::function<std::filesystem::path(const VolumeRef&)>;

    Prefetcher(std::vector<VolumeRef> refs, Fetch fetch, int depth);
    ~Prefetcher();

    Prefetcher(const Prefetcher&) = delete;
    Prefetcher& operator=(const Prefetcher&) = delete;

    struct Item {
        VolumeRef ref;
        std::filesystem::path path;
    };

    /// nullopt once every ref was delivered. Rethrows the fetch error of the
    /// item being delivered.
    std::optional<Item> next();

    /// Highest number of fetches observed running at once.
    int peak_in_flight() const;

private:
    void worker();

    std::vector<VolumeRef> refs_;
    Fetch fetch_;
    int depth_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::size_t next_claim_ = 0;
    std::size_t delivered_ = 0;
    int in_flight_ = 0;
    int peak_ = 0;
    bool stopping_ = false;
    std::vector<std::optional<std::filesystem::path>> ready_;
    std::vector<std::exception_ptr> errors_;
    std::vector<std::thread> workers_;
};

}  // namespace tomo::ingest
