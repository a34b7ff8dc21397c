#include "fixtures.hpp"
#include "netaipw/error.hpp"
#include "netaipw/gate.hpp"
#include "netaipw/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace netaipw;

namespace {

NuisanceTriple constant_triple(double g1, double g0, double h) {
    return {constant_predictor(g1), constant_predictor(g0), constant_predictor(h), 0.0};
}

Dataset tiny_dataset(const Network& net, std::vector<std::uint8_t> w, std::vector<double> y) {
    Dataset d;
    d.network = net;
    d.features = frac_treated_neighbors();
    d.dependency = derive_dependency_graph(net, *d.features);
    d.w = std::move(w);
    d.c = Matrix(net.size(), 1, 0.5);
    d.x = compute_x_features(net, *d.features, d.w, d.c);
    d.z = Matrix(net.size(), 0);
    d.y = std::move(y);
    return d;
}

}  // namespace

TEST_CASE("alpha sets") {
    CHECK(gate_alpha(DependencyGraph(Network(4, {})), 2) == std::vector<Unit>{2});
    const DependencyGraph chain = derive_dependency_graph(testing::chain4(), *frac_treated_neighbors());
    CHECK(gate_alpha(chain, 1) == std::vector<Unit>{0, 1, 2, 3});
    std::vector<Edge> all;
    for (Unit i = 0; i < 5; ++i)
        for (Unit j = i + 1; j < 5; ++j) all.push_back({i, j});
    CHECK(gate_alpha(DependencyGraph(Network(5, all)), 3) == std::vector<Unit>{0, 1, 2, 3, 4});
}

TEST_CASE("gate score weight products") {
    const std::vector<Edge> edge{{0, 1}};
    const Network net(2, edge);
    const InterventionVector ones = InterventionVector::all_ones(2);

    // All of alpha treated, h = 0.5: first product 4, second 0.
    const Dataset treated = tiny_dataset(net, {1, 1}, {3.0, 0.0});
    const NuisanceTriple eta = constant_triple(2.0, 1.0, 0.5);
    CHECK(score_phi_gate(0, treated, eta, ones) == doctest::Approx(1.0 + 4.0 * (3.0 - 2.0)).epsilon(1e-14));

    // A control in alpha zeroes the first product; mixed arms zero both.
    const Dataset mixed = tiny_dataset(net, {1, 0}, {3.0, 0.0});
    CHECK(score_phi_gate(0, mixed, eta, ones) == 1.0);

    const Dataset controls = tiny_dataset(net, {0, 0}, {0.0, 0.0});
    CHECK(score_phi_gate(0, controls, eta, ones) == doctest::Approx(1.0 - 4.0 * (0.0 - 1.0)).epsilon(1e-14));
}

TEST_CASE("gate plug-in part flips sign when pi and the arms swap") {
    // Alternating treatments on a cycle put both arms in every alpha(i), so
    // both weight products vanish and the score is its plug-in part.
    std::vector<Edge> cycle;
    for (Unit i = 0; i < 10; ++i) cycle.push_back({i, (i + 1) % 10});
    std::vector<std::uint8_t> w(10);
    for (Unit i = 0; i < 10; ++i) w[i] = i % 2;
    const Dataset data = tiny_dataset(Network(10, cycle), w, std::vector<double>(10, 0.7));
    NuisanceTriple eta{function_predictor([](std::span<const double> r) { return 2.0 + 3.0 * r[1]; }),
                       function_predictor([](std::span<const double> r) { return -1.0 + r[1] * r[1]; }),
                       constant_predictor(0.4), 0.0};
    NuisanceTriple swapped = eta;
    std::swap(swapped.g1, swapped.g0);
    const InterventionVector ones = InterventionVector::all_ones(10);
    for (Unit i = 0; i < 10; ++i) {
        const double a = score_phi_gate(i, data, eta, ones);
        CHECK(a == 2.0 + 3.0 * 1.0 - (-1.0 + 0.0));
        CHECK(score_phi_gate(i, data, swapped, ones.flipped()) == -a);
    }
}

TEST_CASE("alpha cap") {
    std::vector<Edge> star;
    for (Unit j = 1; j < 25; ++j) star.push_back({0, j});
    const Network net(25, star);
    const Dataset data = tiny_dataset(net, std::vector<std::uint8_t>(25, 1), std::vector<double>(25, 1.0));
    try {
        score_phi_gate(0, data, constant_triple(1, 0, 0.5), InterventionVector::all_ones(25));
        FAIL("expected AlphaTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AlphaTooLarge);
    }
    CHECK_THROWS_AS(GateScore(data, InterventionVector::all_ones(25)), Error);
    CHECK_NOTHROW(GateScore(data, InterventionVector::all_ones(25), 25));
}

TEST_CASE("gate equals the EATE pipeline on the empty network") {
    const Network net(400, {});
    const Dataset data = simulate(net, benchmark_sem(), 7);
    EstimateConfig cfg;
    cfg.folds = 5;
    cfg.repetitions = 3;
    const LearnerPtr learner = forest_learner({.n_trees = 20});
    const EstimateReport eate = run_algorithm1(data, cfg, *learner, 13);
    const EstimateReport gate = estimate_gate(data, cfg, *learner, InterventionVector::all_ones(400), 13);
    CHECK(std::abs(gate.theta_hat - eate.theta_hat) <= 1e-12);
    CHECK(std::abs(gate.sigma_hat - eate.sigma_hat) <= 1e-12);
    CHECK(std::abs(gate.ci_lo - eate.ci_lo) <= 1e-12);
    CHECK(std::abs(gate.ci_hi - eate.ci_hi) <= 1e-12);
}

TEST_CASE("gate fold scores match the per-unit score") {
    const Network net = erdos_renyi(60, 0.03, 3);
    const Dataset data = simulate(net, benchmark_sem(), 5);
    const NuisanceTriple eta = oracle_nuisances(benchmark_sem());
    const InterventionVector pi = InterventionVector::all_ones(60);
    const GateScore score(data, pi, 60);
    const DesignMatrices design(data);
    std::vector<Unit> fold(60);
    for (Unit i = 0; i < 60; ++i) fold[i] = i;
    std::vector<double> phi(60);
    RunDiagnostics diag;
    score.fold_scores(data, design, fold, eta, phi, diag);
    for (Unit i = 0; i < 60; ++i) CHECK(phi[i] == score_phi_gate(i, data, eta, pi, 60));
}

TEST_CASE("gate estimate is centered when the arms coincide") {
    SemSpec sem = benchmark_sem();
    sem.g0 = sem.g1;
    sem.outcome_noise = nullptr;
    const Network net = erdos_renyi(500, 1.0 / 500, 2);
    const Dataset data = simulate(net, sem, 3);
    EstimateConfig cfg;
    cfg.folds = 5;
    cfg.repetitions = 3;
    cfg.fit.fixed = oracle_nuisances(sem);
    const EstimateReport r = estimate_gate(data, cfg, *mean_learner(), InterventionVector::all_ones(500), 1);
    CHECK(std::abs(r.theta_hat) < 1e-12);
}

TEST_CASE("intervention parsing") {
    CHECK(parse_intervention("all-ones", 3).pi == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(parse_intervention("all-zeros", 2).pi == std::vector<std::uint8_t>{0, 0});
    const std::string path = "gate_pi_test.txt";
    {
        std::ofstream out(path);
        out << "1 0\n1\n";
    }
    CHECK(parse_intervention(path, 3).pi == std::vector<std::uint8_t>{1, 0, 1});
    CHECK_THROWS_AS(parse_intervention(path, 4), Error);
    {
        std::ofstream out(path);
        out << "1 2\n";
    }
    CHECK_THROWS_AS(parse_intervention(path, 2), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(parse_intervention("missing-file", 2), Error);
}
