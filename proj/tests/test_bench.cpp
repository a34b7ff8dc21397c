#include "netaipw/bench.hpp"
#include "netaipw/error.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <sstream>

using namespace netaipw;

namespace {

bool same_real(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) || (std::isnan(a) && std::isnan(b)); }

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.sizes = {200};
    cfg.repetitions = 2;
    cfg.folds = 4;
    cfg.splits = 2;
    cfg.forest.n_trees = 10;
    cfg.min_fit_size = 10;
    cfg.oracle_min_reps = 100;
    cfg.oracle_max_reps = 400;
    return cfg;
}

ResultRow row(const std::string& est, double theta, double lo, double hi, double truth) {
    ResultRow r;
    r.network = "er";
    r.density_mode = "const";
    r.n = 100;
    r.estimator = est;
    r.theta_hat = theta;
    r.ci_lo = lo;
    r.ci_hi = hi;
    r.truth = truth;
    return r;
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in("# comment\nnetwork = ws\ndensity_mode = growth\nn = 100, 200\nestimators = hajek\n\nseed=9\n");
    const KeyValueConfig kv = KeyValueConfig::parse(in);
    const ExperimentConfig cfg = experiment_config_from(kv);
    CHECK(cfg.network == NetworkKind::WattsStrogatz);
    CHECK(cfg.density == DensityMode::Growth);
    CHECK(cfg.sizes == std::vector<std::size_t>{100, 200});
    CHECK(cfg.estimators == std::vector<EstimatorKind>{EstimatorKind::Hajek});
    CHECK(cfg.seed == 9);

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(experiment_config_from(KeyValueConfig::parse(unknown)), Error);
    std::istringstream empty_list("estimators = \n");
    CHECK_THROWS_AS(experiment_config_from(KeyValueConfig::parse(empty_list)), Error);
    std::istringstream zero_reps("repetitions = 0\n");
    CHECK_THROWS_AS(experiment_config_from(KeyValueConfig::parse(zero_reps)), Error);
    std::istringstream bad_number("alpha = abc\n");
    CHECK_THROWS_AS(experiment_config_from(KeyValueConfig::parse(bad_number)), Error);
    std::istringstream no_equals("network\n");
    CHECK_THROWS_AS(KeyValueConfig::parse(no_equals), Error);

    ExperimentConfig full;
    apply_full_scale(full);
    CHECK(full.repetitions == 1000);
    CHECK(full.splits == 20);
    CHECK(full.forest.n_trees == 500);
}

TEST_CASE("benchmark networks") {
    const Network er = make_network(NetworkKind::ErdosRenyi, DensityMode::Constant, 2000, 0.05, 1);
    CHECK(std::abs(2.0 * er.edge_count() / 2000.0 - 3.0) < 0.3);
    const Network ws = make_network(NetworkKind::WattsStrogatz, DensityMode::Constant, 100, 0.05, 1);
    CHECK(ws.edge_count() == 200);
    const Network wg = make_network(NetworkKind::WattsStrogatz, DensityMode::Growth, 2500, 0.05, 1);
    const auto k_side = static_cast<std::size_t>(std::lround(1.5 * std::exp(std::log(2500.0) / 9.0)));
    CHECK(k_side == 4);
    CHECK(wg.edge_count() == 2500 * k_side);
}

TEST_CASE("experiment rows") {
    ExperimentConfig cfg = small_config();
    cfg.estimators = {EstimatorKind::Hajek};
    cfg.sizes = {100};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].rep == 1);
    CHECK(rows[1].rep == 2);
    CHECK(rows[0].estimator == "hajek");
    CHECK(rows[0].seconds == 0.0);
    CHECK(std::isfinite(rows[0].truth));
}

TEST_CASE("experiment output is reproducible and round-trips") {
    const ExperimentConfig cfg = small_config();
    const auto a = run_experiment(cfg);
    REQUIRE(a.size() == 6);
    std::ostringstream out_a, out_b;
    write_results(out_a, a);
    ExperimentConfig threaded = cfg;
    threaded.threads = 2;
    write_results(out_b, run_experiment(threaded));
    CHECK(out_a.str() == out_b.str());

    std::istringstream in(out_a.str());
    const auto back = read_results(in);
    REQUIRE(back.size() == a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(back[k].network == a[k].network);
        CHECK(back[k].estimator == a[k].estimator);
        CHECK(back[k].n == a[k].n);
        CHECK(back[k].rep == a[k].rep);
        CHECK(same_real(back[k].theta_hat, a[k].theta_hat));
        CHECK(same_real(back[k].sigma_hat, a[k].sigma_hat));
        CHECK(same_real(back[k].ci_lo, a[k].ci_lo));
        CHECK(same_real(back[k].ci_hi, a[k].ci_hi));
        CHECK(same_real(back[k].truth, a[k].truth));
        CHECK(back[k].failed == a[k].failed);
    }
    std::ostringstream again;
    write_results(again, back);
    CHECK(again.str() == out_a.str());
}

TEST_CASE("failures become flagged rows") {
    ExperimentConfig cfg = small_config();
    cfg.sizes = {60};
    cfg.folds = 10;
    cfg.min_fit_size = 50;
    cfg.estimators = {EstimatorKind::NetAipw};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].failed);
    CHECK(std::isnan(rows[0].theta_hat));
}

TEST_CASE("results reader rejects malformed input") {
    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_results(bad_header), Error);
    std::istringstream short_row(std::string(kResultHeader) + "\ner,const,1\n");
    CHECK_THROWS_AS(read_results(short_row), Error);
}

TEST_CASE("summary metrics") {
    SUBCASE("full coverage") {
        const std::vector<ResultRow> rows{row("netaipw", 1.0, 0.0, 2.0, 1.5), row("netaipw", 2.0, 1.0, 3.0, 1.5)};
        const auto s = summarize(rows, 0.05);
        REQUIRE(s.size() == 1);
        CHECK(s[0].coverage == 1.0);
        CHECK(s[0].median_ci_length == 2.0);
        CHECK(s[0].median_bias == 0.0);
    }
    SUBCASE("symmetric estimates around the truth") {
        const std::vector<ResultRow> rows{row("netaipw", 0.5, 0, 1, 1.0), row("netaipw", 1.5, 1, 2, 1.0),
                                          row("netaipw", 1.0, 0, 2, 1.0)};
        CHECK(summarize(rows, 0.05)[0].median_bias == 0.0);
        CHECK(summarize(rows, 0.05)[0].coverage == 1.0);
    }
    SUBCASE("baselines use the empirical spread") {
        std::vector<ResultRow> rows;
        for (double t : {0.0, 1.0, 2.0}) rows.push_back(row("hajek", t, NAN, NAN, 1.0));
        const auto s = summarize(rows, 0.05);
        CHECK(s[0].sd_estimate == 1.0);
        CHECK(s[0].median_ci_length == doctest::Approx(2 * 1.959963984540054).epsilon(1e-12));
        CHECK(s[0].coverage == 1.0);
    }
    SUBCASE("failed rows are counted, not scored") {
        std::vector<ResultRow> rows{row("ipw", 1.0, NAN, NAN, 1.0), row("ipw", 3.0, NAN, NAN, 1.0)};
        rows[1].failed = true;
        const auto s = summarize(rows, 0.05);
        CHECK(s[0].completed == 1);
        CHECK(s[0].failed == 1);
    }
}
