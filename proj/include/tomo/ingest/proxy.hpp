// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <set>
#include <string>
#include <thread>

#include "tomo/ingest/dicomweb.hpp"

namespace tomo::ingest {

struct ProxyPolicy {
    std::set<std::string> accepted_tokens;
    std::set<std::string> allowed_study_ids;
    std::string upstream_token;
};

/// Outcome of checking a request against the proxy policy.
enum class ProxyDecision { Forward, Unauthorized, Forbidden, BadRequest };

/// Decides what the proxy does with GET `path` carrying `authorization`.
ProxyDecision authorize_request(const ProxyPolicy& policy, const std::string& path,
                                const std::string& authorization);

/// Extracts the study id from ".../studies/{id}/..." paths.
std::optional<std::string> study_from_path(const std::string& path);

/// Authenticating reverse proxy: bearer-token check plus study allow-list,
/// then forwards the GET to `upstream` with the proxy's own credentials.
class ReverseProxy {
public:
    ReverseProxy(ProxyPolicy policy, std::shared_ptr<Transport> upstream);
    ~ReverseProxy();

    ReverseProxy(const ReverseProxy&) = delete;
    ReverseProxy& operator=(const ReverseProxy&) = delete;

    /// Binds to 127.0.0.1 on an ephemeral port and serves on a background thread.
    int start();
    void stop();

    std::size_t forwarded() const noexcept { return forwarded_.load(); }
    std::size_t rejected() const noexcept { return rejected_.load(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::atomic<std::size_t> forwarded_{0};
    std::atomic<std::size_t> rejected_{0};
};

}  // namespace tomo::ingest
