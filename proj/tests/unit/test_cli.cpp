// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tomo/cli.hpp"
#include "tomo/study.hpp"

namespace fs = std::filesystem;
using tomo::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tomo_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("version and help") {
    const auto v = call({"--version"});
    CHECK(v.code == tomo::cli::kExitOk);
    CHECK(v.out.find("tomo ") != std::string::npos);
    CHECK(call({"--help"}).code == tomo::cli::kExitOk);
}

TEST_CASE("usage errors exit 2") {
    CHECK(call({}).code == tomo::cli::kExitUsage);
    CHECK(call({"nonsense"}).code == tomo::cli::kExitUsage);
    const auto r = call({"stats", "bh", "--p", "0.1", "--bogus"});
    CHECK(r.code == tomo::cli::kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(call({"stats", "bh", "--p", "0.1", "--alpha", "3"}).code == tomo::cli::kExitUsage);
    CHECK(call({"stats", "bh", "--p", "0.1,abc"}).code == tomo::cli::kExitUsage);
}

TEST_CASE("data errors exit 1") {
    const auto dir = scratch("bad");
    std::ofstream(dir / "run.json") << "{\"not\": \"a run\"}";
    const auto r = call({"density", "eval", "--run", (dir / "run.json").string(), "--out", (dir / "o.json").string()});
    CHECK(r.code == tomo::cli::kExitData);
    CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("benjamini-hochberg summary") {
    const auto r = call({"stats", "bh", "--p", "0.01,0.02,0.04"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["summary"]["reject"] == nlohmann::json::array({true, true, true}));
    CHECK(j["summary"]["adjusted"][0].get<double>() == doctest::Approx(0.03));
}

TEST_CASE("flags take precedence over the config file") {
    const auto dir = scratch("config");
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"stats": {"bh": {"alpha": 0.001, "p": "0.01,0.02,0.04"}}})";
    const auto from_file = nlohmann::json::parse(call({"--config", cfg.string(), "stats", "bh"}).out);
    CHECK(from_file["summary"]["reject"] == nlohmann::json::array({false, false, false}));
    const auto overridden = call({"--config", cfg.string(), "stats", "bh", "--alpha", "0.05"});
    REQUIRE(overridden.code == 0);
    CHECK(nlohmann::json::parse(overridden.out)["summary"]["reject"] == nlohmann::json::array({true, true, true}));
}

TEST_CASE("phantom writes a valid manifest") {
    const auto dir = scratch("phantom");
    const auto r = call({"phantom", "--seed", "1", "--out", (dir / "d").string(), "--exams", "12"});
    REQUIRE(r.code == 0);
    const auto ds = tomo::load_dataset(dir / "d" / "manifest.json");
    CHECK(ds.exams.size() == 12);
    CHECK(tomo::validate_dataset(ds).empty());
}

TEST_CASE("report extraction") {
    const auto r = call({"ingest", "report", "--text", "The breasts are heterogeneously dense."});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["summary"]["density"] == "C");
    CHECK(call({"ingest", "report", "--text", "almost entirely fatty; extremely dense"}).code == tomo::cli::kExitData);
}

TEST_CASE("end-to-end density on a separable synthetic store") {
    const auto dir = scratch("e2e");
    const auto d = (dir / "d").string();
    const auto st = (dir / "st").string();
    REQUIRE(call({"phantom", "--seed", "3", "--out", d, "--exams", "400", "--slices", "2"}).code == 0);
    REQUIRE(call({"embed", "--manifest", d + "/manifest.json", "--store", st, "--seed", "3", "--dim", "16", "--grid",
                  "2", "--density-separation", "3"})
                .code == 0);
    REQUIRE(call({"--deterministic", "density", "train", "--store", st, "--manifest", d + "/manifest.json", "--epochs",
                  "60", "--lr", "1e-2", "--out", (dir / "run.json").string()})
                .code == 0);
    const auto ev = call({"--deterministic", "density", "eval", "--run", (dir / "run.json").string(), "--split", "test",
                          "--bootstrap", "100", "--out", (dir / "ev.json").string()});
    REQUIRE(ev.code == 0);
    const auto doc = tomo::read_json_file(dir / "ev.json");
    CHECK(doc["metrics"]["accuracy"].get<double>() >= 0.95);
    CHECK_FALSE(doc.contains("created_at"));
}
