// Command-line front end: simulate, estimate, bench, summarize.

#include "netaipw/bench.hpp"
#include "netaipw/config.hpp"
#include "netaipw/error.hpp"
#include "netaipw/estimate.hpp"
#include "netaipw/gate.hpp"
#include "netaipw/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace netaipw;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

KeyValueConfig load_config(const CommonOptions& common) {
    KeyValueConfig kv = common.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(common.config_path);
    if (common.seed) kv.set("seed", std::to_string(*common.seed));
    return kv;
}

// Writes to the --out path, or stdout when none was given.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    write(out);
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return in;
}

void run_simulate(const CommonOptions& common, const std::string& edges_out) {
    KeyValueConfig kv = load_config(common);
    kv.require_known({"network", "density_mode", "n", "ws_beta", "seed"});
    const NetworkKind kind = parse_network_kind(kv.get_string("network", "er"));
    const DensityMode mode = parse_density_mode(kv.get_string("density_mode", "const"));
    const std::size_t n = kv.get_size("n", 625);
    const double beta = kv.get_double("ws_beta", 0.05);
    const std::uint64_t seed = kv.get_u64("seed", 1);
    const Network net = make_network(kind, mode, n, beta, derive_seed(seed, {1}));
    const Dataset data = simulate(net, benchmark_sem(), derive_seed(seed, {2}));
    emit(common.out, [&](std::ostream& o) { write_dataset(o, data); });
    if (!edges_out.empty()) emit(edges_out, [&](std::ostream& o) { write_edge_list(o, net); });
}

struct EstimateOptions {
    std::string data_path;
    std::string edges_path;
    std::string gate;
    std::size_t l_cap = kDefaultAlphaCap;
};

void run_estimate(const CommonOptions& common, const EstimateOptions& opts) {
    KeyValueConfig kv = load_config(common);
    kv.require_known({"folds", "splits", "alpha", "trees", "min_node_size", "mtry", "sample_fraction", "min_fit_size",
                      "clip_eps", "min_stratum_size", "known_propensity", "features", "seed", "threads"});
    std::ifstream edges_in = open_input(opts.edges_path);
    const Network net = read_edge_list(edges_in);
    std::ifstream data_in = open_input(opts.data_path);
    const Dataset data = read_dataset(data_in, net, feature_spec_by_name(kv.get_string("features", "signed_confounder_mean")));

    EstimateConfig cfg;
    cfg.folds = kv.get_size("folds", cfg.folds);
    cfg.repetitions = kv.get_size("splits", cfg.repetitions);
    cfg.alpha = kv.get_double("alpha", cfg.alpha);
    cfg.min_stratum_size = kv.get_size("min_stratum_size", cfg.min_stratum_size);
    cfg.fit.min_fit_size = kv.get_size("min_fit_size", cfg.fit.min_fit_size);
    cfg.fit.clip_eps = kv.get_double("clip_eps", cfg.fit.clip_eps);
    if (kv.has("known_propensity")) cfg.fit.known_propensity = kv.get_double("known_propensity", 0.5);
    cfg.threads = kv.get_size("threads", cfg.threads);
    ForestConfig forest;
    forest.n_trees = kv.get_size("trees", 200);
    forest.min_node_size = kv.get_size("min_node_size", forest.min_node_size);
    forest.mtry = kv.get_size("mtry", forest.mtry);
    forest.sample_fraction = kv.get_double("sample_fraction", forest.sample_fraction);
    const LearnerPtr learner = forest_learner(forest);
    const std::uint64_t seed = kv.get_u64("seed", 1);

    const EstimateReport report =
        opts.gate.empty()
            ? run_algorithm1(data, cfg, *learner, seed)
            : estimate_gate(data, cfg, *learner, parse_intervention(opts.gate, data.size()), seed, opts.l_cap);
    emit(common.out, [&](std::ostream& o) { write_report(o, report); });
}

void run_bench(const CommonOptions& common, bool full_scale, bool timing, std::optional<std::size_t> threads) {
    KeyValueConfig kv = load_config(common);
    ExperimentConfig cfg = experiment_config_from(kv);
    if (full_scale) apply_full_scale(cfg);
    if (timing) cfg.timing = true;
    if (threads) cfg.threads = *threads;
    const auto rows = run_experiment(cfg);
    emit(common.out, [&](std::ostream& o) { write_results(o, rows); });
}

void run_summarize(const CommonOptions& common, const std::string& in_path, double alpha) {
    std::ifstream in = open_input(in_path);
    const auto rows = read_results(in);
    const auto summary = summarize(rows, alpha);
    emit(common.out, [&](std::ostream& o) { write_summary(o, summary); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network AIPW estimation of treatment effects under interference"};
    app.require_subcommand(1);
    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
        sub->add_option("--out", common.out, "Output path (default stdout)");
    };

    std::string edges_out;
    auto* sim = app.add_subcommand("simulate", "Simulate a benchmark network and dataset");
    add_common(sim);
    sim->add_option("--edges-out", edges_out, "Also write the network edge list here");

    EstimateOptions est_opts;
    auto* est = app.add_subcommand("estimate", "Estimate the EATE (or a GATE) from a dataset");
    add_common(est);
    est->add_option("--data", est_opts.data_path, "Dataset file")->required()->check(CLI::ExistingFile);
    est->add_option("--edges", est_opts.edges_path, "Network edge list")->required()->check(CLI::ExistingFile);
    est->add_option("--gate", est_opts.gate, "Intervention: all-ones, all-zeros or a 0/1 file");
    est->add_option("--l-cap", est_opts.l_cap, "Largest allowed dependency neighborhood for the GATE score");

    bool full_scale = false;
    bool timing = false;
    std::optional<std::size_t> threads;
    auto* bench = app.add_subcommand("bench", "Run the simulation study and write per-repetition CSV rows");
    add_common(bench);
    bench->add_flag("--full-scale", full_scale, "R = 1000, B = 20, 500 trees");
    bench->add_flag("--timing", timing, "Record wall-clock seconds per estimate");
    bench->add_option("--threads", threads, "Worker threads (0 = all cores)");

    std::string in_path;
    double alpha = 0.05;
    auto* summ = app.add_subcommand("summarize", "Bias, coverage and CI length per design cell");
    add_common(summ);
    summ->add_option("--in", in_path, "Results CSV from bench")->required()->check(CLI::ExistingFile);
    summ->add_option("--alpha", alpha, "Nominal level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) run_simulate(common, edges_out);
        if (*est) run_estimate(common, est_opts);
        if (*bench) run_bench(common, full_scale, timing, threads);
        if (*summ) run_summarize(common, in_path, alpha);
    } catch (const std::exception& e) {
        std::cerr << "netaipw: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
