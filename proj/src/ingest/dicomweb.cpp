// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/ingest/dicomweb.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tomo/error.hpp"

namespace tomo::ingest {

using nlohmann::json;

namespace {

// Splits "http://host:port/prefix" into scheme-host-port and path prefix.
std::pair<std::string, std::string> split_base(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    const auto path_start =
        scheme_end == std::string::npos ? base_url.find('/') : base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& s, std::size_t& off, int bytes) {
    if (off + static_cast<std::size_t>(bytes) > s.size()) fail(ErrorKind::CorruptHeader, "truncated volume blob");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + static_cast<std::size_t>(i)])) << (8 * i);
    }
    off += static_cast<std::size_t>(bytes);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transports

struct HttpTransport::Impl {
    httplib::Client client;
    std::string prefix;
    std::mutex mu;

    Impl(const std::string& host, std::string p) : client(host), prefix(std::move(p)) {}
};

HttpTransport::HttpTransport(const std::string& base_url, std::chrono::milliseconds timeout) {
    auto [host, prefix] = split_base(base_url);
    impl_ = std::make_unique<Impl>(host, prefix);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    impl_->client.set_connection_timeout(secs.count(), usecs.count());
    impl_->client.set_read_timeout(secs.count(), usecs.count());
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::get(const std::string& path, const Headers& headers) {
    httplib::Headers h(headers.begin(), headers.end());
    std::lock_guard lock(impl_->mu);
    auto res = impl_->client.Get(impl_->prefix + path, h);
    if (!res) fail(ErrorKind::TransportError, "GET " + path + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

HttpResponse FileTransport::get(const std::string& path, const Headers&) {
    namespace fs = std::filesystem;
    if (path.find("..") != std::string::npos) return {400, "bad path"};
    fs::path p = root_ / fs::path(path).relative_path();
    if (fs::is_directory(p)) p /= "index.json";
    std::ifstream in(p, std::ios::binary);
    if (!in) return {404, "not found"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return {200, ss.str()};
}

std::unique_ptr<Transport> make_transport(const std::string& base_url) {
    constexpr std::string_view file_scheme = "file://";
    if (base_url.rfind(file_scheme, 0) == 0) {
        return std::make_unique<FileTransport>(base_url.substr(file_scheme.size()));
    }
    if (base_url.rfind("http://", 0) == 0) return std::make_unique<HttpTransport>(base_url);
    fail(ErrorKind::Usage, "unsupported base url '" + base_url + "'");
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

// ---------------------------------------------------------------------------
// Client

std::string series_uid(const VolumeRef& ref) { return std::string(to_string(ref.view)); }

DicomWebClient::DicomWebClient(RemoteSource source, std::shared_ptr<Transport> transport,
                               std::shared_ptr<Clock> clock, RetryPolicy retry)
    : source_(std::move(source)), transport_(std::move(transport)), clock_(std::move(clock)), retry_(retry) {
    if (!transport_) fail(ErrorKind::Usage, "DicomWebClient needs a transport");
    if (retry_.attempts < 1) retry_.attempts = 1;
}

void DicomWebClient::check_policy(const VolumeRef& ref) const {
    if (!source_.allows(ref.exam_id)) {
        fail(ErrorKind::PolicyError, "study " + ref.exam_id + " is outside the allow-list");
    }
}

HttpResponse DicomWebClient::get_with_retry(const std::string& path) {
    const Headers headers{{"Authorization", "Bearer " + source_.auth_token}};
    auto backoff = retry_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
        try {
            HttpResponse res = transport_->get(path, headers);
            if (res.status == 401 || res.status == 403) {
                fail(ErrorKind::AuthError, "GET " + path + " answered " + std::to_string(res.status));
            }
            if (res.status >= 500) {
                last_error = "GET " + path + " answered " + std::to_string(res.status);
            } else if (res.status >= 200 && res.status < 300) {
                return res;
            } else {
                fail(ErrorKind::Io, "GET " + path + " answered " + std::to_string(res.status));
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TransportError) throw;
            last_error = e.what();
        }
        if (attempt < retry_.attempts) {
            clock_->sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<std::int64_t>(static_cast<double>(backoff.count()) * retry_.multiplier));
        }
    }
    fail(ErrorKind::TransportError, last_error + " (after " + std::to_string(retry_.attempts) + " attempts)");
}

std::vector<Instance> DicomWebClient::query_instances(const VolumeRef& ref) {
    check_policy(ref);
    const auto res = get_with_retry("/studies/" + ref.exam_id + "/series/" + series_uid(ref) + "/instances");
    return parse_qido_instances(res.body);
}

std::string DicomWebClient::retrieve_instance(const VolumeRef& ref, const std::string& sop_instance_uid) {
    check_policy(ref);
    return get_with_retry("/studies/" + ref.exam_id + "/series/" + series_uid(ref) + "/instances/" +
                          sop_instance_uid)
        .body;
}

std::vector<Instance> DicomWebClient::fetch_volume(const VolumeRef& ref) {
    check_policy(ref);
    auto instances = query_instances(ref);
    for (auto& inst : instances) inst.bytes = retrieve_instance(ref, inst.sop_instance_uid);
    return instances;
}

std::string fetch_volume(DicomWebClient& client, const VolumeRef& ref) {
    return pack_instances(client.fetch_volume(ref));
}

// ---------------------------------------------------------------------------
// Wire formats

std::vector<Instance> parse_qido_instances(const std::string& body) {
    std::vector<Instance> out;
    try {
        const json doc = json::parse(body);
        if (!doc.is_array()) fail(ErrorKind::Parse, "QIDO response is not an array");
        for (const auto& item : doc) {
            Instance inst;
            inst.sop_instance_uid = item.at("00080018").at("Value").at(0).get<std::string>();
            if (item.contains("00200013")) {
                const auto& v = item["00200013"].at("Value").at(0);
                inst.instance_number = v.is_string() ? std::stoi(v.get<std::string>()) : v.get<int>();
            }
            out.push_back(std::move(inst));
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("QIDO response: ") + e.what());
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Instance& a, const Instance& b) { return a.instance_number < b.instance_number; });
    return out;
}

std::string make_qido_instances(const std::vector<Instance>& instances) {
    json doc = json::array();
    for (const auto& inst : instances) {
        doc.push_back({{"00080018", {{"vr", "UI"}, {"Value", {inst.sop_instance_uid}}}},
                       {"00200013", {{"vr", "IS"}, {"Value", {inst.instance_number}}}}});
    }
    return doc.dump();
}

std::string pack_instances(const std::vector<Instance>& instances) {
    std::string out = "VOL1";
    put_u32(out, static_cast<std::uint32_t>(instances.size()));
    for (const auto& inst : instances) {
        put_u32(out, static_cast<std::uint32_t>(inst.sop_instance_uid.size()));
        out += inst.sop_instance_uid;
        put_u32(out, static_cast<std::uint32_t>(inst.instance_number));
        put_u64(out, inst.bytes.size());
        out += inst.bytes;
    }
    return out;
}

std::vector<Instance> unpack_instances(const std::string& blob) {
    if (blob.size() < 8 || blob.compare(0, 4, "VOL1") != 0) fail(ErrorKind::CorruptHeader, "not a VOL1 blob");
    std::size_t off = 4;
    const auto count = get_le(blob, off, 4);
    std::vector<Instance> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        Instance inst;
        const auto uid_len = get_le(blob, off, 4);
        if (off + uid_len > blob.size()) fail(ErrorKind::CorruptHeader, "truncated volume blob");
        inst.sop_instance_uid = blob.substr(off, uid_len);
        off += uid_len;
        inst.instance_number = static_cast<int>(static_cast<std::int32_t>(get_le(blob, off, 4)));
        const auto size = get_le(blob, off, 8);
        if (off + size > blob.size()) fail(ErrorKind::CorruptHeader, "truncated volume blob");
        inst.bytes = blob.substr(off, size);
        off += size;
        out.push_back(std::move(inst));
    }
    if (off != blob.size()) fail(ErrorKind::CorruptHeader, "trailing bytes in volume blob");
    return out;
}

}  // namespace tomo::ingest
