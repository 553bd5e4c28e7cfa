// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "tomo/error.hpp"
#include "tomo/rng.hpp"
#include "tomo/trainer/adamw.hpp"
#include "tomo/trainer/checkpoint.hpp"
#include "tomo/trainer/grad_check.hpp"
#include "tomo/trainer/linear.hpp"
#include "tomo/trainer/loss.hpp"
#include "tomo/trainer/schedule.hpp"
#include "tomo/trainer/train_loop.hpp"

using namespace tomo;
using namespace tomo::trainer;

TEST_CASE("linear forward") {
    LinearHead id(3, 3);
    for (std::size_t i = 0; i < 3; ++i) id.weight(i, i) = 1.0;
    const std::vector<double> x{1.5, -2.0, 0.25};
    CHECK(forward_linear(id, x) == x);

    LinearHead bias_only(3, 2);
    bias_only.bias(0) = 4.0;
    bias_only.bias(1) = -1.0;
    CHECK(forward_linear(bias_only, x) == std::vector<double>{4.0, -1.0});

    Rng rng(1);
    const auto h = LinearHead::random(5, 4, rng, 1.0);
    std::vector<double> z(5);
    for (double& v : z) v = rng.normal();
    const auto out = forward_linear(h, z);
    for (std::size_t o = 0; o < 4; ++o) {
        double s = h.bias(o);
        for (std::size_t i = 0; i < 5; ++i) s += h.weight(o, i) * z[i];
        CHECK(std::abs(out[o] - s) < 1e-9);
    }
}

TEST_CASE("softmax cross-entropy closed forms") {
    const std::vector<double> equal{0.3, 0.3, 0.3, 0.3};
    CHECK(softmax_ce(equal, 2).loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    const std::vector<double> peaked{10, 0, 0, 0};
    const double p0 = std::exp(10.0) / (std::exp(10.0) + 3.0);
    const auto r = softmax_ce(peaked, 0);
    CHECK(r.grad[0] == doctest::Approx(p0 - 1.0).epsilon(1e-9));
    CHECK(r.grad[0] == doctest::Approx(-1.3617e-4).epsilon(1e-3));
    CHECK(std::isfinite(softmax_ce(std::vector<double>{1000, -1000}, 1).loss));
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> z(4);
        for (double& v : z) v = rng.normal(0.0, 3.0);
        const std::size_t target = rng.below(4);
        const auto res = grad_check([&](std::span<const double> p) { return softmax_ce(p, target); }, z, 1e-5);
        CHECK(res.passed);
    }
}

TEST_CASE("grad check detects a wrong gradient") {
    const auto quad = [](std::span<const double> p) {
        LossGrad g;
        for (double v : p) {
            g.loss += v * v;
            g.grad.push_back(2 * v);
        }
        return g;
    };
    const std::vector<double> x{0.7, -1.3, 2.0};
    CHECK(grad_check(quad, x, 1e-7).max_rel_error < 1e-7);
    const auto wrong = [&](std::span<const double> p) {
        auto g = quad(p);
        for (double& v : g.grad) v *= 1.1;
        return g;
    };
    const auto r = grad_check(wrong, x, 1e-5);
    CHECK_FALSE(r.passed);
    CHECK(r.max_rel_error == doctest::Approx(0.1 / 1.1).epsilon(1e-3));
}

TEST_CASE("adamw step") {
    std::vector<double> p{1.0, -2.0};
    OptimState s(2, {0.9, 0.999, 1e-8, 0.0});
    adamw_step(p, std::vector<double>{0.0, 0.0}, s, 0.1);
    CHECK(p == std::vector<double>{1.0, -2.0});

    std::vector<double> q{0.0};
    OptimState s1(1, {0.9, 0.999, 1e-8, 0.0});
    adamw_step(q, std::vector<double>{1.0}, s1, 0.1);
    CHECK(q[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));

    std::vector<double> w{3.0};
    OptimState s2(1, {0.9, 0.999, 1e-8, 0.5});
    adamw_step(w, std::vector<double>{0.0}, s2, 0.1);
    CHECK(w[0] == doctest::Approx(3.0 * (1.0 - 0.1 * 0.5)));
}

TEST_CASE("cosine schedule endpoints") {
    const ScheduleConfig c{1e-2, 1e-4, 100};
    CHECK(cosine_lr(c, 0) == doctest::Approx(1e-2));
    CHECK(cosine_lr(c, 100) == doctest::Approx(1e-4));
    CHECK(cosine_lr(c, 50) == doctest::Approx((1e-2 + 1e-4) / 2));
    CHECK(cosine_lr(c, 500) == doctest::Approx(1e-4));
}

TEST_CASE("training is deterministic and fits a separable problem") {
    Rng rng(3);
    Matrix x(200, 2);
    std::vector<std::size_t> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        y[i] = i % 2;
        x.row(i)[0] = (y[i] ? 2.0 : -2.0) + 0.3 * rng.normal();
        x.row(i)[1] = rng.normal();
    }
    const SampleLoss loss = [&](std::span<const double> z, std::size_t i) { return softmax_ce(z, y[i]); };
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.lr = 5e-2;
    cfg.seed = 9;
    std::vector<double> losses;
    const auto a = train_linear(x, 2, loss, cfg, [&](std::size_t, const LinearHead&, double l) { losses.push_back(l); });
    const auto b = train_linear(x, 2, loss, cfg);
    CHECK(a == b);
    CHECK(losses.size() == 30);
    CHECK(losses.back() < losses.front());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 200; ++i) correct += argmax(forward_linear(a, x.row(i))) == y[i];
    CHECK(correct >= 195);
}

TEST_CASE("argmax ties go to the lowest index") {
    CHECK(argmax(std::vector<double>{1.0, 3.0, 3.0}) == 1);
}

TEST_CASE("softplus and sigmoid are stable") {
    CHECK(softplus(0.0) == doctest::Approx(std::numbers::ln2));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("checkpoint round-trip") {
    Rng rng(4);
    Checkpoint c{LinearHead::random(3, 2, rng, 1.0), OptimState(8, {}), {{"lr", 0.01}}};
    c.state.t = 7;
    c.state.m[3] = 0.5;
    const auto path = std::filesystem::temp_directory_path() / "tomo_ckpt.bin";
    save_checkpoint(path, c);
    const auto back = load_checkpoint(path);
    CHECK(back.head == c.head);
    CHECK(back.state.t == 7);
    CHECK(back.state.m == c.state.m);
    CHECK(back.hyperparams == c.hyperparams);
    CHECK(head_from_json(head_to_json(c.head)) == c.head);
}

TEST_CASE("learning-rate search picks the best trial") {
    const auto r = tune_learning_rate([](double lr) { return std::abs(std::log10(lr) + 2.0); }, 1e-4, 1e-1, 12, 5);
    CHECK(r.trials.size() == 12);
    for (const auto& t : r.trials) CHECK(r.best_objective <= t.objective);
    CHECK_THROWS_AS(tune_learning_rate([](double) { return 0.0; }, 0.0, 1.0, 3, 0), Error);
}
