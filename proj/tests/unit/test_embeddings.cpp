// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tomo/embeddings/aggregate.hpp"
#include "tomo/embeddings/features.hpp"
#include "tomo/embeddings/store.hpp"
#include "tomo/embeddings/synthetic.hpp"
#include "tomo/embeddings/tensor_io.hpp"
#include "tomo/error.hpp"
#include "tomo/ingest/phantom.hpp"
#include "tomo/rng.hpp"

using namespace tomo;
using namespace tomo::embeddings;
namespace fs = std::filesystem;

namespace {

TokenGrid random_grid(Rng& rng, std::size_t dim, std::size_t side) {
    TokenGrid g(dim, side);
    for (float& v : g.cls()) v = static_cast<float>(rng.normal());
    for (float& v : g.patches()) v = static_cast<float>(rng.normal());
    return g;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tomo_emb_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("constant tokens give constant mean and zero std") {
    std::vector<TokenGrid> slices(2, TokenGrid(8, 3));
    for (auto& s : slices) {
        std::fill(s.cls().begin(), s.cls().end(), 2.5f);
        std::fill(s.patches().begin(), s.patches().end(), 2.5f);
    }
    const auto v = aggregate_view(slices, AggregationMode::PatchMeanStd);
    REQUIRE(v.size() == 16);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(v[k] == doctest::Approx(2.5));
        CHECK(v[8 + k] == doctest::Approx(0.0));
    }
}

TEST_CASE("opposite CLS tokens cancel") {
    Rng rng(1);
    std::vector<TokenGrid> slices{random_grid(rng, 6, 2), random_grid(rng, 6, 2)};
    for (std::size_t k = 0; k < 6; ++k) slices[1].cls()[k] = -slices[0].cls()[k];
    for (double x : aggregate_view(slices, AggregationMode::ClsMean)) CHECK(x == doctest::Approx(0.0));
}

TEST_CASE("patch mean equals the flattened-token mean") {
    Rng rng(2);
    std::vector<TokenGrid> slices;
    for (int i = 0; i < 3; ++i) slices.push_back(random_grid(rng, 16, kGridSide));
    const auto v = aggregate_view(slices, AggregationMode::PatchMean);
    REQUIRE(v.size() == 16);
    for (std::size_t k = 0; k < 16; ++k) {
        double s = 0.0;
        for (const auto& g : slices) {
            for (std::size_t p = 0; p < g.patch_count(); ++p) s += g.patch(p)[k];
        }
        CHECK(std::abs(v[k] - s / (3.0 * kPatchCount)) < 1e-6);
    }
}

TEST_CASE("single CLS has zero std") {
    Rng rng(3);
    std::vector<TokenGrid> slices{random_grid(rng, 4, 2)};
    const auto v = aggregate_view(slices, AggregationMode::ClsMeanStd);
    for (std::size_t k = 4; k < 8; ++k) CHECK(v[k] == 0.0);
}

TEST_CASE("aggregation errors") {
    CHECK_THROWS_AS(aggregate_view({}, AggregationMode::ClsMean), Error);
    std::vector<TokenGrid> mixed{TokenGrid(4, 2), TokenGrid(5, 2)};
    CHECK_THROWS_AS(aggregate_view(mixed, AggregationMode::ClsMean), Error);
}

TEST_CASE("mode names parse") {
    for (auto m : {AggregationMode::ClsMean, AggregationMode::ClsMeanStd, AggregationMode::PatchMean,
                   AggregationMode::PatchMeanStd}) {
        CHECK(parse_aggregation_mode(to_string(m)) == m);
    }
    CHECK(parse_aggregation_mode("PatchMeanStd") == AggregationMode::PatchMeanStd);
    CHECK_THROWS_AS(parse_aggregation_mode("max"), Error);
}

TEST_CASE("study assembly has fixed order and canonical dimensions") {
    std::map<ViewKind, std::vector<double>> views;
    for (ViewKind v : kAllViews) views[v] = std::vector<double>(768, static_cast<double>(static_cast<int>(v)));
    const auto mean_only = assemble_study(views);
    CHECK(mean_only.size() == 3072);
    CHECK(mean_only.values[768] == 1.0);
    CHECK(mean_only.values[3 * 768] == 3.0);

    std::map<ViewKind, std::vector<double>> reversed;
    for (auto it = kAllViews.rbegin(); it != kAllViews.rend(); ++it) {
        reversed.emplace(*it, std::vector<double>(1536, static_cast<double>(static_cast<int>(*it))));
    }
    CHECK(assemble_study(reversed).size() == 6144);

    views.erase(ViewKind::LMLO);
    CHECK_THROWS_AS(assemble_study(views), Error);
}

TEST_CASE("tensor codec round-trips bit-exactly") {
    Rng rng(4);
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(kPatchCount), static_cast<std::uint32_t>(kTokenDim)};
    t.data.resize(t.element_count());
    for (float& v : t.data) v = static_cast<float>(rng.normal());
    const std::string bytes = encode_tensor(t);
    CHECK(bytes.substr(0, 4) == "EMB1");
    CHECK(decode_tensor(bytes) == t);
    CHECK_THROWS_AS(decode_tensor(std::string_view(bytes).substr(0, bytes.size() - 3)), Error);

    TensorF64 d{{2, 2}, {1.0, -2.0, 1e-300, 3.5}};
    CHECK(decode_tensor_f64(encode_tensor(d)) == d);
}

TEST_CASE("truncated tensor file is a corrupt header") {
    const auto dir = scratch("trunc");
    fs::create_directories(dir);
    Tensor t{{3}, {1.f, 2.f, 3.f}};
    write_tensor(dir / "t.bin", t);
    CHECK(read_tensor(dir / "t.bin") == t);
    fs::resize_file(dir / "t.bin", 9);
    try {
        read_tensor(dir / "t.bin");
        FAIL("expected CorruptHeader");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CorruptHeader);
    }
}

TEST_CASE("store handles interleaved keys and reopening") {
    const auto dir = scratch("store");
    Tensor a{{2}, {1.f, 2.f}}, b{{3}, {4.f, 5.f, 6.f}};
    {
        EmbeddingStore store(dir);
        store.write("a", a);
        store.write("b", b);
        store.write("a", a);
        CHECK(store.read("a") == a);
        CHECK(store.read("b") == b);
        CHECK_THROWS_AS(store.read("c"), Error);
    }
    EmbeddingStore again(dir);
    CHECK(again.keys() == std::vector<std::string>{"a", "b"});
    CHECK(again.read("b") == b);
}

TEST_CASE("store grids and study features") {
    const auto dir = scratch("grids");
    ingest::CohortSpec cs;
    cs.n_exams = 4;
    cs.n_slices = 2;
    const Dataset ds = ingest::generate_cohort(1, cs);
    SignalSpec spec;
    spec.dim = 8;
    spec.grid_side = 3;
    EmbeddingStore store(dir);
    synthesize_store(7, ds, spec, store);
    const Exam& exam = ds.exams.front();
    const auto grids = store.read_grids(exam.views.at(ViewKind::RCC));
    REQUIRE(grids.size() == 2);
    CHECK(grids[0].dim() == 8);
    CHECK(grids[0].grid_side() == 3);
    const auto f = load_study_features(store, exam, AggregationMode::ClsMeanStd);
    CHECK(f.size() == 4 * 16);
    const auto direct = synthesize_view(7, exam, exam.views.at(ViewKind::RCC), spec);
    CHECK(std::equal(direct[1].patches().begin(), direct[1].patches().end(), grids[1].patches().begin()));
}

TEST_CASE("synthetic store is byte-identical per seed") {
    ingest::CohortSpec cs;
    cs.n_exams = 3;
    const Dataset ds = ingest::generate_cohort(2, cs);
    SignalSpec spec;
    spec.dim = 4;
    spec.grid_side = 2;
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    {
        EmbeddingStore s1(d1), s2(d2);
        synthesize_store(3, ds, spec, s1);
        synthesize_store(3, ds, spec, s2);
    }
    for (const auto& entry : fs::directory_iterator(d1)) {
        std::ifstream f1(entry.path(), std::ios::binary), f2(d2 / entry.path().filename(), std::ios::binary);
        const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(s1 == s2);
    }
}

TEST_CASE("pixel featurizer emits a canonical grid of nine statistics") {
    Image img(518, 518, 0.25);
    const auto g = featurize_pixels(img);
    CHECK(g.grid_side() == kGridSide);
    CHECK(g.dim() == kPixelStats);
    CHECK(g.all_finite());
    CHECK_THROWS_AS(featurize_pixels(Image(100, 100)), Error);
}
