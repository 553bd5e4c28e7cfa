// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/trainer/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "tomo/embeddings/tensor_io.hpp"
#include "tomo/error.hpp"
#include "tomo/study.hpp"

namespace tomo::trainer {

using nlohmann::json;
using embeddings::TensorF64;

namespace {

TensorF64 block(std::span<const double> values, std::vector<std::uint32_t> dims) {
    return TensorF64{std::move(dims), std::vector<double>(values.begin(), values.end())};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto& h = ckpt.head;
    const auto in = static_cast<std::uint32_t>(h.in_dim());
    const auto out = static_cast<std::uint32_t>(h.out_dim());
    const json header{{"in", h.in_dim()},
                      {"out", h.out_dim()},
                      {"step", ckpt.state.t},
                      {"beta1", ckpt.state.config.beta1},
                      {"beta2", ckpt.state.config.beta2},
                      {"eps", ckpt.state.config.eps},
                      {"weight_decay", ckpt.state.config.weight_decay},
                      {"hyperparams", ckpt.hyperparams}};
    const std::string head_text = header.dump();
    std::string bytes = "TCK1";
    const auto len = static_cast<std::uint32_t>(head_text.size());
    bytes.append(reinterpret_cast<const char*>(&len), 4);
    bytes += head_text;

    const std::size_t nw = h.in_dim() * h.out_dim();
    const auto split = [&](std::span<const double> all) {
        bytes += embeddings::encode_tensor(block(all.subspan(0, nw), {out, in}));
        bytes += embeddings::encode_tensor(block(all.subspan(nw), {out}));
    };
    split(h.params());
    const bool has_moments = ckpt.state.m.size() == h.parameter_count();
    if (has_moments) {
        split(ckpt.state.m);
        split(ckpt.state.v);
    }
    write_file_atomic(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingKey, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    if (bytes.size() < 8 || bytes.compare(0, 4, "TCK1") != 0) fail(ErrorKind::CorruptHeader, "bad checkpoint magic");
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 4, 4);
    if (8 + static_cast<std::size_t>(len) > bytes.size()) fail(ErrorKind::CorruptHeader, "truncated checkpoint header");
    json header;
    try {
        header = json::parse(bytes.substr(8, len));
    } catch (const json::exception& e) {
        fail(ErrorKind::CorruptHeader, e.what());
    }
    Checkpoint ckpt;
    const auto in_dim = header.at("in").get<std::size_t>();
    const auto out_dim = header.at("out").get<std::size_t>();
    ckpt.head = LinearHead(in_dim, out_dim);
    ckpt.hyperparams = header.value("hyperparams", json::object());
    AdamWConfig cfg{header.at("beta1").get<double>(), header.at("beta2").get<double>(),
                    header.at("eps").get<double>(), header.at("weight_decay").get<double>()};
    ckpt.state = OptimState(ckpt.head.parameter_count(), cfg);
    ckpt.state.t = header.at("step").get<std::uint64_t>();

    std::string_view rest(bytes);
    rest.remove_prefix(8 + len);
    const auto read_pair = [&](std::span<double> dst) {
        std::size_t used = 0;
        const auto w = embeddings::decode_tensor_f64(rest, &used);
        rest.remove_prefix(used);
        const auto b = embeddings::decode_tensor_f64(rest, &used);
        rest.remove_prefix(used);
        if (w.data.size() + b.data.size() != dst.size()) fail(ErrorKind::CorruptHeader, "checkpoint block sizes");
        std::copy(w.data.begin(), w.data.end(), dst.begin());
        std::copy(b.data.begin(), b.data.end(), dst.begin() + static_cast<std::ptrdiff_t>(w.data.size()));
    };
    read_pair(ckpt.head.params());
    if (!rest.empty()) {
        read_pair(ckpt.state.m);
        read_pair(ckpt.state.v);
    }
    if (!rest.empty()) fail(ErrorKind::CorruptHeader, "trailing bytes in checkpoint");
    return ckpt;
}

json head_to_json(const LinearHead& head) {
    return json{{"in", head.in_dim()},
                {"out", head.out_dim()},
                {"weights", std::vector<double>(head.weights().begin(), head.weights().end())},
                {"bias", std::vector<double>(head.biases().begin(), head.biases().end())}};
}

LinearHead head_from_json(const json& j) {
    LinearHead head(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (w.size() != head.in_dim() * head.out_dim() || b.size() != head.out_dim()) {
        fail(ErrorKind::DimMismatch, "head JSON has inconsistent sizes");
    }
    std::copy(w.begin(), w.end(), head.params().begin());
    std::copy(b.begin(), b.end(), head.params().begin() + static_cast<std::ptrdiff_t>(w.size()));
    return head;
}

}  // namespace tomo::trainer
