// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/cache.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tomo/error.hpp"
#include "tomo/ingest/sha256.hpp"

namespace tomo::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

VolumeCache::VolumeCache(CacheConfig config) : config_(std::move(config)) {
    if (config_.capacity_bytes == 0) fail(ErrorKind::Usage, "cache capacity must be positive");
    if (config_.prefetch_depth < 0 || config_.prefetch_depth > kMaxPrefetchDepth) {
        fail(ErrorKind::Usage, "prefetch depth must be within [0, 64]");
    }
    fs::create_directories(config_.root_dir);
    load_index();
}

std::string VolumeCache::volume_key(const VolumeRef& ref) { return ref.exam_id + "|" + series_uid(ref); }

std::string VolumeCache::file_name(const std::string& key) { return sha256_hex(key) + ".bin"; }

void VolumeCache::load_index() {
    const fs::path index = config_.root_dir / "index.json";
    if (!fs::exists(index)) return;
    const json doc = read_json_file(index);
    counter_ = doc.value("counter", std::uint64_t{0});
    for (const auto& e : doc.value("entries", json::array())) {
        Entry entry{e.at("file").get<std::string>(), e.at("size").get<std::uint64_t>(),
                    e.at("last_access").get<std::uint64_t>()};
        // Entries whose file disappeared are dropped.
        if (!fs::exists(config_.root_dir / entry.file)) continue;
        total_ += entry.size;
        entries_.emplace(e.at("key").get<std::string>(), std::move(entry));
    }
    // A smaller capacity than the previous run trims the oldest entries.
    while (total_ > config_.capacity_bytes && !entries_.empty()) {
        auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
            return a.second.last_access < b.second.last_access;
        });
        fs::remove(config_.root_dir / victim->second.file);
        total_ -= victim->second.size;
        entries_.erase(victim);
    }
}

void VolumeCache::persist_index_locked() const {
    json entries = json::array();
    for (const auto& [key, e] : entries_) {
        entries.push_back({{"key", key}, {"file", e.file}, {"size", e.size}, {"last_access", e.last_access}});
    }
    const json doc{{"capacity_bytes", config_.capacity_bytes}, {"counter", counter_}, {"entries", entries}};
    write_file_atomic(config_.root_dir / "index.json", doc.dump());
}

fs::path VolumeCache::get_or_fetch(const std::string& key, const Fetcher& fetch) {
    std::unique_lock lock(mu_);
    for (;;) {
        if (auto it = entries_.find(key); it != entries_.end()) {
            it->second.last_access = ++counter_;
            persist_index_locked();
            return config_.root_dir / it->second.file;
        }
        if (!in_flight_.contains(key)) break;
        cv_.wait(lock);
    }
    in_flight_.insert(key);
    lock.unlock();

    const std::string file = file_name(key);
    std::uint64_t size = 0;
    try {
        const std::string bytes = fetch();
        size = bytes.size();
        if (size > config_.capacity_bytes) {
            fail(ErrorKind::CapacityError, key + " needs " + std::to_string(size) + " bytes, capacity is " +
                                               std::to_string(config_.capacity_bytes));
        }
        write_file_atomic(config_.root_dir / file, bytes);
    } catch (...) {
        lock.lock();
        in_flight_.erase(key);
        cv_.notify_all();
        throw;
    }

    lock.lock();
    in_flight_.erase(key);
    while (total_ + size > config_.capacity_bytes && !entries_.empty()) {
        auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
            return a.second.last_access < b.second.last_access;
        });
        std::error_code ec;
        fs::remove(config_.root_dir / victim->second.file, ec);
        total_ -= victim->second.size;
        entries_.erase(victim);
    }
    entries_[key] = Entry{file, size, ++counter_};
    total_ += size;
    persist_index_locked();
    cv_.notify_all();
    return config_.root_dir / file;
}

fs::path VolumeCache::get_or_fetch(DicomWebClient& client, const VolumeRef& ref) {
    // Policy is enforced before the cache is consulted, so a disallowed study
    // is refused even when a copy happens to be resident.
    if (!client.source().allows(ref.exam_id)) {
        fail(ErrorKind::PolicyError, "study " + ref.exam_id + " is outside the allow-list");
    }
    return get_or_fetch(volume_key(ref), [&] { return fetch_volume(client, ref); });
}

bool VolumeCache::contains(const std::string& key) const {
    std::lock_guard lock(mu_);
    return entries_.contains(key);
}

std::vector<std::string> VolumeCache::resident_keys() const {
    std::lock_guard lock(mu_);
    std::vector<std::pair<std::uint64_t, std::string>> order;
    for (const auto& [key, e] : entries_) order.emplace_back(e.last_access, key);
    std::sort(order.begin(), order.end());
    std::vector<std::string> out;
    for (auto& [_, key] : order) out.push_back(std::move(key));
    return out;
}

std::uint64_t VolumeCache::total_bytes() const {
    std::lock_guard lock(mu_);
    return total_;
}

}  // namespace tomo::ingest
