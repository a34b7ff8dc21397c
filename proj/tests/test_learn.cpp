#include "netaipw/error.hpp"
#include "netaipw/learn.hpp"
#include "netaipw/rng.hpp"
#include "netaipw/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace netaipw;

namespace {

struct Sample {
    Matrix x;
    std::vector<double> y;
};

Sample g1_sample(std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    Sample s{Matrix(m, 2), std::vector<double>(m)};
    for (std::size_t r = 0; r < m; ++r) {
        s.x(r, 0) = rng.uniform();
        s.x(r, 1) = rng.uniform(-1.0, 1.0);
        s.y[r] = benchmark_g1(s.x(r, 0), s.x(r, 1));
    }
    return s;
}

double holdout_mse(const Predictor& model, const Sample& holdout) {
    const auto pred = model.predict(holdout.x);
    double sse = 0.0;
    for (std::size_t r = 0; r < pred.size(); ++r) sse += (pred[r] - holdout.y[r]) * (pred[r] - holdout.y[r]);
    return sse / static_cast<double>(pred.size());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
}

}  // namespace

TEST_CASE("forest on a constant target") {
    const Sample s = g1_sample(100, 1);
    const std::vector<double> y(100, 1.25);
    const auto model = fit_random_forest({.n_trees = 20}, s.x, y);
    for (double p : model->predict(g1_sample(50, 2).x)) CHECK(p == 1.25);
}

TEST_CASE("forest recovers the benchmark step function") {
    const Sample train = g1_sample(5000, 3);
    const Sample holdout = g1_sample(1000, 4);
    const auto model = fit_random_forest({.n_trees = 100, .seed = 5}, train.x, train.y);
    CHECK(holdout_mse(*model, holdout) < 0.05);
}

TEST_CASE("forest recovers the identity") {
    Rng rng(6);
    Matrix x(1000, 1), xh(1000, 1);
    std::vector<double> y(1000), yh(1000);
    for (std::size_t r = 0; r < 1000; ++r) {
        x(r, 0) = y[r] = rng.uniform();
        xh(r, 0) = yh[r] = rng.uniform();
    }
    const auto model = fit_random_forest({.n_trees = 100, .seed = 1}, x, y);
    CHECK(holdout_mse(*model, {xh, yh}) < 0.01);
}

TEST_CASE("forest error shrinks with more data") {
    std::vector<double> small, large;
    const Sample holdout = g1_sample(1000, 99);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Sample a = g1_sample(500, 100 + seed);
        const Sample b = g1_sample(5000, 200 + seed);
        small.push_back(holdout_mse(*fit_random_forest({.n_trees = 50, .seed = seed}, a.x, a.y), holdout));
        large.push_back(holdout_mse(*fit_random_forest({.n_trees = 50, .seed = seed}, b.x, b.y), holdout));
    }
    CHECK(median(large) < median(small));
}

TEST_CASE("forest determinism and binary targets") {
    Sample s = g1_sample(400, 7);
    Rng rng(8);
    for (auto& v : s.y) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    const auto a = fit_random_forest({.n_trees = 30, .seed = 11}, s.x, s.y);
    const auto b = fit_random_forest({.n_trees = 30, .seed = 11}, s.x, s.y);
    const Sample probe = g1_sample(200, 9);
    const auto pa = a->predict(probe.x);
    CHECK(pa == b->predict(probe.x));
    for (double p : pa) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    const auto c = fit_random_forest({.n_trees = 30, .seed = 12}, s.x, s.y);
    CHECK(c->predict(probe.x) != pa);
}

TEST_CASE("forest input validation") {
    Matrix x(1, 1, 0.0);
    std::vector<double> y{1.0};
    try {
        fit_random_forest({}, x, y);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewSamples);
    }
    Matrix x2(2, 1, 0.0);
    std::vector<double> y2{1.0, std::numeric_limits<double>::quiet_NaN()};
    try {
        fit_random_forest({}, x2, y2);
        FAIL("expected NonFiniteInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteInput);
    }
    const std::vector<double> y3{1.0, 2.0};
    CHECK_THROWS_AS(fit_random_forest({.n_trees = 0}, x2, y3), Error);
    CHECK_THROWS_AS(fit_random_forest({.mtry = 2}, x2, y3), Error);
}

TEST_CASE("forest learner uses the per-fit seed") {
    const Sample s = g1_sample(300, 1);
    const LearnerPtr learner = forest_learner({.n_trees = 10});
    const auto a = learner->fit(s.x, s.y, 1)->predict(s.x);
    CHECK(a == learner->fit(s.x, s.y, 1)->predict(s.x));
    CHECK(a != learner->fit(s.x, s.y, 2)->predict(s.x));
}

TEST_CASE("mean learner") {
    const std::vector<double> y{1.0, 3.0};
    const auto m = mean_learner()->fit(Matrix(2, 0), y, 0);
    CHECK(m->predict(Matrix(3, 0)) == std::vector<double>(3, 2.0));
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    CHECK(mean_learner()->fit(Matrix(3, 1, 5.0), zeros, 0)->predict_row(std::vector<double>{1.0}) == 0.0);
}

TEST_CASE("oracle learner evaluates the supplied function") {
    const auto learner = oracle_learner([](std::span<const double> r) { return benchmark_g1(r[0], r[1]); });
    const std::vector<double> y{100.0, 200.0};
    const auto model = learner->fit(Matrix(2, 2, 0.0), y, 3);
    for (double c : {0.1, 0.6, 0.95}) CHECK(model->predict_row(std::vector<double>{c, 0.0}) == benchmark_g1(c, 0.0));
    CHECK(function_predictor([](std::span<const double> r) { return 2 * r[0]; })->predict_row(std::vector<double>{4.0}) == 8.0);
    CHECK(constant_predictor(0.3)->predict(Matrix(2, 5)) == std::vector<double>{0.3, 0.3});
}

TEST_CASE("propensity clipping") {
    const std::vector<double> p{0.001, 0.5, 0.9999};
    const auto clipped = clip_propensity(p, 0.01);
    CHECK(clipped[0] == 0.01);
    CHECK(clipped[1] == 0.5);
    CHECK(clipped[2] == 0.99);
    try {
        clip_propensity(p, 0.5);
        FAIL("expected InvalidEps");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidEps);
    }
    CHECK_THROWS_AS(clip_propensity(p, 0.0), Error);
}
