// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/proxy.hpp"

#include <httplib.h>

#include "tomo/error.hpp"

namespace tomo::ingest {

std::optional<std::string> study_from_path(const std::string& path) {
    static constexpr std::string_view marker = "/studies/";
    const auto pos = path.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    const auto start = pos + marker.size();
    const auto end = path.find('/', start);
    std::string id = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (id.empty()) return std::nullopt;
    return id;
}

ProxyDecision authorize_request(const ProxyPolicy& policy, const std::string& path,
                                const std::string& authorization) {
    static constexpr std::string_view bearer = "Bearer ";
    if (authorization.rfind(bearer, 0) != 0 ||
        !policy.accepted_tokens.contains(authorization.substr(bearer.size()))) {
        return ProxyDecision::Unauthorized;
    }
    const auto study = study_from_path(path);
    if (!study) return ProxyDecision::BadRequest;
    if (!policy.allowed_study_ids.contains(*study)) return ProxyDecision::Forbidden;
    return ProxyDecision::Forward;
}

struct ReverseProxy::Impl {
    ProxyPolicy policy;
    std::shared_ptr<Transport> upstream;
    httplib::Server server;
    std::thread thread;
};

ReverseProxy::ReverseProxy(ProxyPolicy policy, std::shared_ptr<Transport> upstream)
    : impl_(std::make_unique<Impl>()) {
    impl_->policy = std::move(policy);
    impl_->upstream = std::move(upstream);
    impl_->server.Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto decision = authorize_request(impl_->policy, req.path, req.get_header_value("Authorization"));
        switch (decision) {
            case ProxyDecision::Unauthorized: res.status = 401; ++rejected_; return;
            case ProxyDecision::Forbidden: res.status = 403; ++rejected_; return;
            case ProxyDecision::BadRequest: res.status = 400; ++rejected_; return;
            case ProxyDecision::Forward: break;
        }
        try {
            const Headers headers{{"Authorization", "Bearer " + impl_->policy.upstream_token}};
            auto up = impl_->upstream->get(req.path, headers);
            ++forwarded_;
            res.status = up.status;
            res.set_content(up.body, "application/octet-stream");
        } catch (const Error&) {
            res.status = 502;
        }
    });
}

ReverseProxy::~ReverseProxy() { stop(); }

int ReverseProxy::start() {
    const int port = impl_->server.bind_to_any_port("127.0.0.1");
    if (port < 0) fail(ErrorKind::Io, "proxy could not bind");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void ReverseProxy::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tomo::ingest
