#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kCli = NETAIPW_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > cli_test_stdout.txt 2> cli_test_stderr.txt";
    return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("simulate and estimate are reproducible") {
    write("cli_sim.cfg", "network = er\nn = 600\n");
    REQUIRE(run("simulate --config cli_sim.cfg --seed 5 --out cli_a.csv --edges-out cli_a.edges") == 0);
    REQUIRE(run("simulate --config cli_sim.cfg --seed 5 --out cli_b.csv --edges-out cli_b.edges") == 0);
    CHECK(slurp("cli_a.csv") == slurp("cli_b.csv"));
    CHECK(slurp("cli_a.edges") == slurp("cli_b.edges"));
    REQUIRE(run("simulate --config cli_sim.cfg --seed 6 --out cli_c.csv") == 0);
    CHECK(slurp("cli_a.csv") != slurp("cli_c.csv"));

    write("cli_est.cfg", "folds = 5\nsplits = 2\ntrees = 10\nmin_fit_size = 10\n");
    REQUIRE(run("estimate --config cli_est.cfg --data cli_a.csv --edges cli_a.edges --seed 3 --out cli_r1.txt") == 0);
    REQUIRE(run("estimate --config cli_est.cfg --data cli_a.csv --edges cli_a.edges --seed 3 --out cli_r2.txt") == 0);
    CHECK(slurp("cli_r1.txt") == slurp("cli_r2.txt"));
    CHECK(slurp("cli_r1.txt").find("theta_hat = ") == 0);
}

TEST_CASE("bench and summarize are reproducible") {
    write("cli_bench.cfg",
          "n = 150\nrepetitions = 2\nfolds = 4\nsplits = 2\ntrees = 10\nmin_fit_size = 10\noracle_max_reps = 400\n");
    REQUIRE(run("bench --config cli_bench.cfg --seed 7 --out cli_bench_a.csv") == 0);
    REQUIRE(run("bench --config cli_bench.cfg --seed 7 --out cli_bench_b.csv") == 0);
    const std::string a = slurp("cli_bench_a.csv");
    CHECK(a == slurp("cli_bench_b.csv"));
    CHECK(a.rfind("network,density_mode,n,estimator,rep,", 0) == 0);
    REQUIRE(run("summarize --in cli_bench_a.csv --out cli_sum_a.csv") == 0);
    REQUIRE(run("summarize --in cli_bench_b.csv --out cli_sum_b.csv") == 0);
    CHECK(slurp("cli_sum_a.csv") == slurp("cli_sum_b.csv"));
}

TEST_CASE("errors exit nonzero with a message") {
    write("cli_bad.cfg", "colour = blue\n");
    CHECK(run("bench --config cli_bad.cfg --out cli_bad.csv") != 0);
    CHECK(slurp("cli_test_stderr.txt").find("unknown config key") != std::string::npos);
    CHECK(run("summarize --in does-not-exist.csv") != 0);
    CHECK(run("") != 0);
}
