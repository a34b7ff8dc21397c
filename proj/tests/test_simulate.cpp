#include "fixtures.hpp"
#include "netaipw/error.hpp"
#include "netaipw/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace netaipw;

TEST_CASE("benchmark structural functions") {
    CHECK(benchmark_g1(0.55, 0.0) == 1.5);
    CHECK(benchmark_g1(0.2, 0.9) == 2.5);
    CHECK(benchmark_g1(0.8, -1.0) == 4.0);
    CHECK(benchmark_g0(0.5, 0.1) == -0.75);
    CHECK(benchmark_g0(0.5, 0.3) == 0.5);
    CHECK(benchmark_g0(0.3, 0.25) == 0.25);
    CHECK(benchmark_g0(0.3, 0.1) == -0.5);
    CHECK(benchmark_propensity(0.25) == 0.5);

    // Mean of g1 over a fine midpoint grid of C.
    const int grid = 1000000;
    double sum = 0.0;
    for (int k = 0; k < grid; ++k) sum += benchmark_g1((k + 0.5) / grid, 0.0);
    CHECK(sum / grid == doctest::Approx(2.75).epsilon(1e-9));
}

TEST_CASE("simulated benchmark data") {
    const Network net = erdos_renyi(400, 3.0 / 400, 1);
    const SemSpec sem = benchmark_sem();
    const Dataset data = simulate(net, sem, 42);
    CHECK(data.size() == 400);
    CHECK(data.z.cols() == 0);
    const double half = std::sqrt(0.12) / 2;
    for (Unit i = 0; i < data.size(); ++i) {
        const double c = data.c(i, 0);
        const double p = benchmark_propensity(c);
        CHECK(p >= 1.0 / (1.0 + std::exp(0.25)));
        CHECK(p <= 1.0 / (1.0 + std::exp(-0.75)));
        const double mean = data.w[i] ? benchmark_g1(c, data.x(i, 0)) : benchmark_g0(c, data.x(i, 0));
        CHECK(std::abs(data.y[i] - mean) <= half);
        if (c >= 0.7 && data.w[i]) CHECK(std::abs(data.y[i] - 4.0) <= half);
    }
    const Matrix x = compute_x_features(net, *sem.features, data.w, data.c);
    CHECK(x == data.x);
    CHECK(simulate(net, sem, 42).y == data.y);
    CHECK(simulate(net, sem, 43).y != data.y);
}

TEST_CASE("zero noise reproduces the outcome regressions") {
    SemSpec sem = benchmark_sem();
    sem.outcome_noise = nullptr;
    const Dataset data = simulate(erdos_renyi(200, 0.02, 3), sem, 5);
    for (Unit i = 0; i < data.size(); ++i) {
        const double expected = data.w[i] ? benchmark_g1(data.c(i, 0), data.x(i, 0)) : benchmark_g0(data.c(i, 0), data.x(i, 0));
        CHECK(data.y[i] == expected);
    }
}

TEST_CASE("outcome noise is centered") {
    SemSpec sem = benchmark_sem();
    Rng rng(9);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = sem.outcome_noise(rng);
        sum += e;
        sq += e * e;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean) < 4 * se);
}

TEST_CASE("binary outcome model") {
    SemSpec sem = benchmark_sem();
    sem.outcome = OutcomeModel::Binary;
    sem.g1 = [](std::span<const double> c, std::span<const double>) { return c[0]; };
    sem.g0 = [](std::span<const double> c, std::span<const double>) { return 1.0 - c[0]; };
    const Dataset data = simulate(erdos_renyi(300, 0.01, 3), sem, 8);
    for (double y : data.y) CHECK((y == 0.0 || y == 1.0));

    sem.g1 = [](std::span<const double>, std::span<const double>) { return 1.5; };
    CHECK_THROWS_AS(simulate(Network(10, {}), sem, 1), Error);
}

TEST_CASE("invalid propensity is rejected") {
    SemSpec sem = benchmark_sem();
    sem.propensity = [](std::span<const double>, std::span<const double>) { return 1.0; };
    try {
        simulate(Network(5, {}), sem, 1);
        FAIL("expected InvalidSem");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSem);
    }
}

TEST_CASE("oracle nuisances") {
    const NuisanceTriple eta = oracle_nuisances(benchmark_sem());
    const std::vector<double> row{0.25};
    CHECK(eta.h->predict_row(row) == 0.5);
    const std::vector<double> cx{0.3, 0.25};
    CHECK(eta.g0->predict_row(cx) == 0.25);
    for (double c : {0.1, 0.45, 0.6, 0.9}) {
        const std::vector<double> r{c, 0.0};
        CHECK(eta.g1->predict_row(r) == benchmark_g1(c, 0.0));
    }
}

TEST_CASE("EATE oracle") {
    const SemSpec sem = benchmark_sem();
    SUBCASE("empty network") {
        const OracleEstimate o = true_eate_oracle(Network(500, {}), sem, 400, 1);
        CHECK(std::abs(o.value - 3.40) <= 3 * o.mc_se);
    }
    SUBCASE("two independent runs agree") {
        const Network net = erdos_renyi(500, 3.0 / 500, 4);
        const OracleEstimate a = true_eate_oracle(net, sem, 400, 1);
        const OracleEstimate b = true_eate_oracle(net, sem, 400, 2);
        CHECK(std::abs(a.value - b.value) <= 4 * std::hypot(a.mc_se, b.mc_se));
    }
    SUBCASE("identical arms") {
        SemSpec same = sem;
        same.g0 = same.g1;
        const OracleEstimate o = true_eate_oracle(erdos_renyi(200, 0.02, 1), same, 100, 1);
        CHECK(std::abs(o.value) <= o.mc_se + 1e-15);
    }
    CHECK_THROWS_AS(true_eate_oracle(Network(5, {}), sem, 10, 1), Error);
}

TEST_CASE("dataset round trip") {
    const Network net = erdos_renyi(50, 0.06, 2);
    const Dataset data = simulate(net, benchmark_sem(), 3);
    std::stringstream ss;
    write_dataset(ss, data);
    const Dataset back = read_dataset(ss, net, signed_confounder_mean());
    CHECK(back.w == data.w);
    CHECK(back.c == data.c);
    CHECK(back.x == data.x);
    CHECK(back.y == data.y);
    CHECK(back.dependency == data.dependency);

    std::stringstream again;
    write_dataset(again, data);
    CHECK_THROWS_AS(read_dataset(again, erdos_renyi(50, 0.5, 9), signed_confounder_mean()), Error);

    std::stringstream garbage("unit,w,c_1,x_1,y\n1,2,0.5,0,1\n");
    CHECK_THROWS_AS(read_dataset(garbage, Network(1, {}), signed_confounder_mean()), Error);
}
