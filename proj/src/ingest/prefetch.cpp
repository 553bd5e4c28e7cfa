// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/prefetch.hpp"

#include <algorithm>

#include "tomo/error.hpp"

namespace tomo::ingest {

Prefetcher::Prefetcher(std::vector<VolumeRef> refs, Fetch fetch, int depth)
    : refs_(std::move(refs)), fetch_(std::move(fetch)), depth_(depth) {
    if (depth_ < 0 || depth_ > kMaxPrefetchDepth) fail(ErrorKind::Usage, "prefetch depth must be within [0, 64]");
    ready_.resize(refs_.size());
    errors_.resize(refs_.size());
    const int n_workers = std::min<int>(depth_, static_cast<int>(refs_.size()));
    for (int i = 0; i < n_workers; ++i) workers_.emplace_back([this] { worker(); });
}

Prefetcher::~Prefetcher() {
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void Prefetcher::worker() {
    for (;;) {
        std::size_t index = 0;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [this] {
                return stopping_ || next_claim_ >= refs_.size() ||
                       next_claim_ < delivered_ + static_cast<std::size_t>(depth_);
            });
            if (stopping_ || next_claim_ >= refs_.size()) return;
            index = next_claim_++;
            ++in_flight_;
            peak_ = std::max(peak_, in_flight_);
        }
        std::optional<std::filesystem::path> path;
        std::exception_ptr error;
        try {
            path = fetch_(refs_[index]);
        } catch (...) {
            error = std::current_exception();
        }
        {
            std::lock_guard lock(mu_);
            --in_flight_;
            ready_[index] = std::move(path);
            errors_[index] = error;
        }
        cv_.notify_all();
    }
}

std::optional<Prefetcher::Item> Prefetcher::next() {
    std::unique_lock lock(mu_);
    if (delivered_ >= refs_.size()) return std::nullopt;
    const std::size_t index = delivered_;
    if (depth_ == 0) {
        ++delivered_;
        lock.unlock();
        return Item{refs_[index], fetch_(refs_[index])};
    }
    cv_.wait(lock, [&] { return ready_[index].has_value() || errors_[index] != nullptr; });
    ++delivered_;
    auto error = errors_[index];
    auto path = std::move(ready_[index]);
    lock.unlock();
    cv_.notify_all();
    if (error) std::rethrow_exception(error);
    return Item{refs_[index], std::move(*path)};
}

int Prefetcher::peak_in_flight() const {
    std::lock_guard lock(mu_);
    return peak_;
}

}  // namespace tomo::ingest
