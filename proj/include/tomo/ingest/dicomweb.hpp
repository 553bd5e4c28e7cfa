// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tomo/study.hpp"

namespace tomo::ingest {

/// Remote archive reached through the authenticating proxy.
/// When `allowed_study_ids` is present, requests for any other study are
/// refused locally and never leave the process.
struct RemoteSource {
    std::string base_url;
    std::string auth_token;
    std::optional<std::set<std::string>> allowed_study_ids;

    bool allows(const std::string& study_id) const {
        return !allowed_study_ids || allowed_study_ids->contains(study_id);
    }
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Headers = std::multimap<std::string, std::string>;

/// Blocking GET. Connection-level failures throw TransportError; HTTP
/// statuses are returned to the caller as data.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& path, const Headers& headers) = 0;
};

/// cpp-httplib backed transport for http:// base URLs.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(const std::string& base_url,
                           std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~HttpTransport() override;
    HttpResponse get(const std::string& path, const Headers& headers) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Serves responses stubbed on disk. A request path maps to root/path; when
/// that is a directory, root/path/index.json is served instead. Missing
/// files answer 404.
class FileTransport final : public Transport {
public:
    explicit FileTransport(std::filesystem::path root) : root_(std::move(root)) {}
    HttpResponse get(const std::string& path, const Headers& headers) override;

private:
    std::filesystem::path root_;
};

/// Picks FileTransport for file:// URLs and HttpTransport for http://.
std::unique_ptr<Transport> make_transport(const std::string& base_url);

class Clock {
public:
    virtual ~Clock() = default;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
public:
    void sleep_for(std::chrono::milliseconds d) override;
};

/// Records requested sleeps without blocking.
class FakeClock final : public Clock {
public:
    void sleep_for(std::chrono::milliseconds d) override {
        std::lock_guard lock(mu_);
        sleeps_.push_back(d);
    }
    std::vector<std::chrono::milliseconds> sleeps() const {
        std::lock_guard lock(mu_);
        return sleeps_;
    }

private:
    mutable std::mutex mu_;
    std::vector<std::chrono::milliseconds> sleeps_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    double multiplier = 2.0;
};

struct Instance {
    std::string sop_instance_uid;
    int instance_number = 0;
    std::string bytes;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// The series addressed for a volume. Volumes carry no series UID of their
/// own, so the view code names the series within its study.
std::string series_uid(const VolumeRef& ref);

/// QIDO-RS / WADO-RS subset:
///   GET {base}/studies/{study}/series/{series}/instances         -> DICOM JSON
///   GET {base}/studies/{study}/series/{series}/instances/{sop}   -> bytes
/// with "Authorization: Bearer <token>". Statuses >= 500 and connection
/// failures are retried with exponential backoff; 401/403 raise AuthError.
class DicomWebClient {
public:
    DicomWebClient(RemoteSource source, std::shared_ptr<Transport> transport,
                   std::shared_ptr<Clock> clock = std::make_shared<SystemClock>(), RetryPolicy retry = {});

    /// Instance UIDs in instance-number order.
    std::vector<Instance> query_instances(const VolumeRef& ref);
    std::string retrieve_instance(const VolumeRef& ref, const std::string& sop_instance_uid);

    /// All instances of the volume's series with their bytes. Idempotent.
    /// Throws PolicyError before any request when the study is not allowed.
    std::vector<Instance> fetch_volume(const VolumeRef& ref);

    const RemoteSource& source() const noexcept { return source_; }

private:
    HttpResponse get_with_retry(const std::string& path);
    void check_policy(const VolumeRef& ref) const;

    RemoteSource source_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
    RetryPolicy retry_;
};

/// Free-function form of DicomWebClient::fetch_volume, returning the packed bytes.
std::string fetch_volume(DicomWebClient& client, const VolumeRef& ref);

// Packed volume blob stored by the cache:
//   "VOL1" | u32 count | per instance: u32 uid_len, uid, i32 number, u64 size, bytes
std::string pack_instances(const std::vector<Instance>& instances);
std::vector<Instance> unpack_instances(const std::string& blob);

/// Parses a QIDO-RS instance listing (array of DICOM JSON objects).
std::vector<Instance> parse_qido_instances(const std::string& body);
std::string make_qido_instances(const std::vector<Instance>& instances);

}  // namespace tomo::ingest
