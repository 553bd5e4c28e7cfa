// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "tomo/ingest/dicomweb.hpp"

namespace tomo::testing {

/// Minimal DICOMweb origin on 127.0.0.1 serving in-memory series. Every
/// request is logged; `script` statuses are answered first, in order.
class StubServer {
public:
    StubServer() {
        server_.Get(R"(/studies/([^/]+)/series/([^/]+)/instances)", [this](const auto& req, auto& res) {
            handle(req, res, [&] {
                const auto it = series_.find(req.matches[1].str() + "|" + req.matches[2].str());
                if (it == series_.end()) return reply(res, 404, "");
                reply(res, 200, ingest::make_qido_instances(it->second), "application/dicom+json");
            });
        });
        server_.Get(R"(/studies/([^/]+)/series/([^/]+)/instances/([^/]+))", [this](const auto& req, auto& res) {
            handle(req, res, [&] {
                const auto it = series_.find(req.matches[1].str() + "|" + req.matches[2].str());
                if (it == series_.end()) return reply(res, 404, "");
                for (const auto& inst : it->second) {
                    if (inst.sop_instance_uid == req.matches[3].str()) return reply(res, 200, inst.bytes);
                }
                reply(res, 404, "");
            });
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    void add_series(const std::string& study, const std::string& series, std::vector<ingest::Instance> instances) {
        std::lock_guard lock(mu_);
        series_[study + "|" + series] = std::move(instances);
    }

    void script(std::vector<int> statuses) {
        std::lock_guard lock(mu_);
        script_.assign(statuses.begin(), statuses.end());
    }

    std::vector<std::string> requests() const {
        std::lock_guard lock(mu_);
        return log_;
    }

    std::vector<std::string> authorizations() const {
        std::lock_guard lock(mu_);
        return auth_;
    }

private:
    template <typename Body>
    void handle(const httplib::Request& req, httplib::Response& res, Body&& body) {
        std::lock_guard lock(mu_);
        log_.push_back(req.path);
        auth_.push_back(req.get_header_value("Authorization"));
        if (!script_.empty()) {
            const int status = script_.front();
            script_.pop_front();
            if (status != 200) return reply(res, status, "scripted");
        }
        body();
    }

    static void reply(httplib::Response& res, int status, const std::string& body,
                      const char* type = "application/octet-stream") {
        res.status = status;
        res.set_content(body, type);
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mu_;
    std::map<std::string, std::vector<ingest::Instance>> series_;
    std::deque<int> script_;
    std::vector<std::string> log_;
    std::vector<std::string> auth_;
};

}  // namespace tomo::testing
