// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/stats.hpp"

using namespace tomo;
using namespace tomo::stats;

namespace {

double psi(double pos, double neg) { return pos > neg ? 1.0 : (pos == neg ? 0.5 : 0.0); }

double sample_cov(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("AUROC small cases") {
    CHECK(auroc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
    CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{1, 0, 0}) == 0.5);
    CHECK(auroc(std::vector<double>{0.8, 0.4, 0.6, 0.2}, std::vector<int>{1, 1, 0, 0}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
    CHECK_THROWS_AS(auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
}

TEST_CASE("DeLong identical models") {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8, 0.7, 0.2};
    const std::vector<int> y{0, 0, 1, 1, 1, 0};
    const auto r = delong_test(s, s, y);
    CHECK(r.z == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("DeLong variance matches brute-force structural components") {
    const std::vector<double> a{0.9, 0.7, 0.4, 0.6, 0.3, 0.5, 0.2, 0.65};
    const std::vector<double> b{0.8, 0.3, 0.6, 0.55, 0.5, 0.1, 0.4, 0.2};
    const std::vector<int> y{1, 1, 1, 1, 0, 0, 0, 0};
    std::vector<double> a10, b10, a01, b01;
    for (std::size_t i = 0; i < 4; ++i) {
        double sa = 0, sb = 0;
        for (std::size_t j = 4; j < 8; ++j) {
            sa += psi(a[i], a[j]);
            sb += psi(b[i], b[j]);
        }
        a10.push_back(sa / 4);
        b10.push_back(sb / 4);
    }
    for (std::size_t j = 4; j < 8; ++j) {
        double sa = 0, sb = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            sa += psi(a[i], a[j]);
            sb += psi(b[i], b[j]);
        }
        a01.push_back(sa / 4);
        b01.push_back(sb / 4);
    }
    const double var = (sample_cov(a10, a10) + sample_cov(b10, b10) - 2 * sample_cov(a10, b10)) / 4 +
                       (sample_cov(a01, a01) + sample_cov(b01, b01) - 2 * sample_cov(a01, b01)) / 4;
    const auto r = delong_test(a, b, y);
    CHECK(r.variance == doctest::Approx(var).epsilon(1e-12));
    CHECK(r.auc_a == doctest::Approx(auroc(a, y)));
    CHECK(r.z == doctest::Approx((r.auc_a - r.auc_b) / std::sqrt(var)));
    const auto sc = structural_components(a, y);
    CHECK(sc.v10 == a10);
    CHECK(sc.v01 == a01);
}

TEST_CASE("McNemar") {
    CHECK(mcnemar_test(0, 0).p == 1.0);
    const auto exact = mcnemar_test(5, 1);
    CHECK(exact.exact);
    CHECK(exact.p == doctest::Approx(0.21875).epsilon(1e-12));
    const auto chi = mcnemar_test(40, 20);
    CHECK_FALSE(chi.exact);
    CHECK(chi.statistic == doctest::Approx(361.0 / 60.0));
    CHECK(chi.p == doctest::Approx(0.0142).epsilon(0.01));

    PairedOutcomes po;
    po.ids = {"a", "b", "c", "d"};
    po.a_correct = {true, true, false, true};
    po.b_correct = {false, true, true, false};
    const auto r = mcnemar_test(po);
    CHECK(r.b == 2);
    CHECK(r.c == 1);
}

TEST_CASE("Benjamini-Hochberg") {
    const auto r = benjamini_hochberg(std::vector<double>{0.01, 0.02, 0.04}, 0.05);
    CHECK(r.reject == std::vector<bool>{true, true, true});
    CHECK(r.adjusted[0] == doctest::Approx(0.03));
    CHECK(r.adjusted[1] == doctest::Approx(0.03));
    CHECK(r.adjusted[2] == doctest::Approx(0.04));
    const auto one = benjamini_hochberg(std::vector<double>{0.2});
    CHECK(one.adjusted[0] == 0.2);
    const auto ones = benjamini_hochberg(std::vector<double>{1.0, 1.0});
    CHECK(ones.reject == std::vector<bool>{false, false});
}

TEST_CASE("tail functions") {
    CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi2_1dof_sf(3.841458820694124) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("bootstrap intervals") {
    BootstrapConfig cfg;
    cfg.repetitions = 1000;
    cfg.seed = 11;
    const auto all_right = bootstrap_ci([](std::span<const std::size_t>) { return 1.0; }, 50, cfg);
    CHECK(all_right == Interval{1.0, 1.0, 1.0});

    const auto width = [&](std::size_t n) {
        const IndexMetric m = [](std::span<const std::size_t> idx) {
            double s = 0;
            for (auto i : idx) s += static_cast<double>(i % 2);
            return s / static_cast<double>(idx.size());
        };
        const auto iv = bootstrap_ci(m, n, cfg);
        CHECK(iv.point == doctest::Approx(0.5));
        return iv.hi - iv.lo;
    };
    CHECK(width(400) < width(100));

    const IndexMetric mean_idx = [](std::span<const std::size_t> idx) {
        double s = 0;
        for (auto i : idx) s += static_cast<double>(i);
        return s;
    };
    BootstrapConfig threaded = cfg;
    threaded.threads = 4;
    CHECK(bootstrap_ci(mean_idx, 30, cfg) == bootstrap_ci(mean_idx, 30, cfg));
    CHECK(bootstrap_ci(mean_idx, 30, cfg) == bootstrap_ci(mean_idx, 30, threaded));
    CHECK_THROWS_AS(bootstrap_ci(mean_idx, 0, cfg), Error);
}

TEST_CASE("clustered bootstrap resamples whole clusters") {
    const std::vector<std::string> clusters{"p1", "p1", "p2", "p2"};
    BootstrapConfig cfg;
    cfg.repetitions = 200;
    const auto iv = bootstrap_ci_clustered(
        [](std::span<const std::size_t> idx) {
            // Size is always even when clusters of two are drawn whole.
            return static_cast<double>(idx.size() % 2);
        },
        clusters, cfg);
    CHECK(iv.hi == 0.0);
}

TEST_CASE("percentile interpolates") {
    CHECK(percentile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({5}, 0.9) == 5.0);
}

TEST_CASE("subgroup table") {
    CHECK(age_band(45) == "<50");
    CHECK(age_band(50) == "50-60");
    CHECK(age_band(69.9) == "60-70");
    CHECK(age_band(70) == "70+");
    CHECK(parse_subgroup_key("race") == SubgroupKey::Race);

    std::vector<int> preds, refs;
    std::vector<std::optional<Demographics>> demo;
    for (int i = 0; i < 20; ++i) {
        refs.push_back(i % 4);
        preds.push_back(i < 10 ? i % 4 : (i + 1) % 4);
        demo.push_back(Demographics{40.0, i < 10 ? "A" : "B"});
    }
    BootstrapConfig cfg;
    cfg.repetitions = 100;
    const auto t = subgroup_table(preds, refs, demo, SubgroupKey::Race, cfg);
    std::map<std::string, double> overall;
    for (const auto& c : t.cells) {
        if (!c.reference) overall[c.group] = c.accuracy.point;
    }
    CHECK(overall.at("A") == 1.0);
    CHECK(overall.at("B") == 0.0);

    const auto single = subgroup_table(preds, refs, demo, SubgroupKey::AgeBand, cfg);
    CHECK(single.cells.front().group == "<50");
    CHECK(single.cells.front().accuracy.point == doctest::Approx(0.5));
}
