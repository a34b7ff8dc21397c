#include "netaipw/bench.hpp"

#include "netaipw/baselines.hpp"
#include "netaipw/error.hpp"
#include "netaipw/estimate.hpp"
#include "netaipw/parallel.hpp"
#include "netaipw/rng.hpp"
#include "netaipw/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace netaipw {

namespace {

enum SeedTag : std::uint64_t { kNetworkSeed = 11, kDataSeed = 12, kEstimatorSeed = 13, kOracleSeed = 14 };

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& text) {
    if (text == "nan" || text == "-nan") return kNaN;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
    }
    if (used != text.size()) throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
    return v;
}

std::size_t parse_count(const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorKind::Parse, "not a count: '" + text + "'");
    }
    return std::stoull(text);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

ResultRow failed_row(ResultRow row) {
    row.theta_hat = row.sigma_hat = row.p_value = row.ci_lo = row.ci_hi = kNaN;
    row.failed = true;
    return row;
}

}  // namespace

std::string to_string(NetworkKind kind) { return kind == NetworkKind::ErdosRenyi ? "er" : "ws"; }
std::string to_string(DensityMode mode) { return mode == DensityMode::Constant ? "const" : "growth"; }

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::NetAipw: return "netaipw";
        case EstimatorKind::Hajek: return "hajek";
        case EstimatorKind::Ipw: return "ipw";
    }
    return "?";
}

NetworkKind parse_network_kind(const std::string& text) {
    if (text == "er") return NetworkKind::ErdosRenyi;
    if (text == "ws") return NetworkKind::WattsStrogatz;
    throw Error(ErrorKind::Parse, "network must be er or ws, got '" + text + "'");
}

DensityMode parse_density_mode(const std::string& text) {
    if (text == "const") return DensityMode::Constant;
    if (text == "growth" || text == "n^{1/9}" || text == "n19") return DensityMode::Growth;
    throw Error(ErrorKind::Parse, "density_mode must be const or growth, got '" + text + "'");
}

EstimatorKind parse_estimator(const std::string& text) {
    if (text == "netaipw") return EstimatorKind::NetAipw;
    if (text == "hajek") return EstimatorKind::Hajek;
    if (text == "ipw") return EstimatorKind::Ipw;
    throw Error(ErrorKind::Parse, "unknown estimator '" + text + "'");
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
    kv.require_known({"network", "density_mode", "n", "repetitions", "folds", "splits", "alpha", "learner", "trees",
                      "min_node_size", "mtry", "sample_fraction", "estimators", "seed", "min_fit_size", "clip_eps",
                      "min_stratum_size", "ws_beta", "oracle_min_reps", "oracle_max_reps", "threads", "timing"});
    ExperimentConfig cfg;
    cfg.network = parse_network_kind(kv.get_string("network", to_string(cfg.network)));
    cfg.density = parse_density_mode(kv.get_string("density_mode", to_string(cfg.density)));
    if (kv.has("n")) {
        cfg.sizes.clear();
        for (const auto& s : kv.get_list("n", {})) cfg.sizes.push_back(parse_count(s));
    }
    cfg.repetitions = kv.get_size("repetitions", cfg.repetitions);
    cfg.folds = kv.get_size("folds", cfg.folds);
    cfg.splits = kv.get_size("splits", cfg.splits);
    cfg.alpha = kv.get_double("alpha", cfg.alpha);
    cfg.learner = kv.get_string("learner", cfg.learner);
    cfg.forest.n_trees = kv.get_size("trees", cfg.forest.n_trees);
    cfg.forest.min_node_size = kv.get_size("min_node_size", cfg.forest.min_node_size);
    cfg.forest.mtry = kv.get_size("mtry", cfg.forest.mtry);
    cfg.forest.sample_fraction = kv.get_double("sample_fraction", cfg.forest.sample_fraction);
    if (kv.has("estimators")) {
        cfg.estimators.clear();
        for (const auto& s : kv.get_list("estimators", {})) cfg.estimators.push_back(parse_estimator(s));
    }
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.min_fit_size = kv.get_size("min_fit_size", cfg.min_fit_size);
    cfg.clip_eps = kv.get_double("clip_eps", cfg.clip_eps);
    cfg.min_stratum_size = kv.get_size("min_stratum_size", cfg.min_stratum_size);
    cfg.ws_beta = kv.get_double("ws_beta", cfg.ws_beta);
    cfg.oracle_min_reps = kv.get_size("oracle_min_reps", cfg.oracle_min_reps);
    cfg.oracle_max_reps = kv.get_size("oracle_max_reps", cfg.oracle_max_reps);
    cfg.threads = kv.get_size("threads", cfg.threads);
    cfg.timing = kv.get_bool("timing", cfg.timing);

    if (cfg.repetitions < 1) throw Error(ErrorKind::InvalidParameter, "repetitions must be at least 1");
    if (cfg.estimators.empty()) throw Error(ErrorKind::InvalidParameter, "estimator list is empty");
    if (cfg.sizes.empty()) throw Error(ErrorKind::InvalidParameter, "no sample sizes given");
    if (cfg.learner != "forest" && cfg.learner != "oracle") {
        throw Error(ErrorKind::Parse, "learner must be forest or oracle, got '" + cfg.learner + "'");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorKind::InvalidProbability, "alpha out of (0, 1)");
    return cfg;
}

void apply_full_scale(ExperimentConfig& cfg) {
    cfg.repetitions = 1000;
    cfg.splits = 20;
    cfg.forest.n_trees = 500;
}

Network make_network(NetworkKind kind, DensityMode mode, std::size_t n, double ws_beta, std::uint64_t seed) {
    const double growth = 3.0 * std::pow(static_cast<double>(n), 1.0 / 9.0);
    if (kind == NetworkKind::ErdosRenyi) {
        const double mean_degree = mode == DensityMode::Constant ? 3.0 : growth;
        return erdos_renyi(n, std::min(1.0, mean_degree / static_cast<double>(n)), seed);
    }
    const std::size_t k_side =
        mode == DensityMode::Constant ? 2 : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(growth / 2.0)));
    return watts_strogatz(n, k_side, ws_beta, seed);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    const SemSpec sem = benchmark_sem();
    const bool oracle = cfg.learner == "oracle";
    const LearnerPtr learner = forest_learner(cfg.forest);

    EstimateConfig est;
    est.folds = cfg.folds;
    est.repetitions = cfg.splits;
    est.alpha = cfg.alpha;
    est.min_stratum_size = cfg.min_stratum_size;
    est.fit.min_fit_size = cfg.min_fit_size;
    est.fit.clip_eps = cfg.clip_eps;
    if (oracle) est.fit.fixed = oracle_nuisances(sem);
    FitOptions ipw_options;
    ipw_options.min_fit_size = cfg.min_fit_size;
    ipw_options.clip_eps = cfg.clip_eps;

    struct Job {
        std::size_t n;
        std::size_t rep;
    };
    std::vector<Job> jobs;
    for (std::size_t n : cfg.sizes) {
        for (std::size_t rep = 1; rep <= cfg.repetitions; ++rep) jobs.push_back({n, rep});
    }
    std::vector<std::vector<ResultRow>> rows(jobs.size());

    parallel_for(jobs.size(), cfg.threads, [&](std::size_t job) {
        const auto [n, rep] = jobs[job];
        const Network net = make_network(cfg.network, cfg.density, n, cfg.ws_beta, derive_seed(cfg.seed, {kNetworkSeed, n, rep}));
        const DependencyGraph dependency = derive_dependency_graph(net, *sem.features);
        const Dataset data = simulate(net, dependency, sem, derive_seed(cfg.seed, {kDataSeed, n, rep}));

        ResultRow base;
        base.network = to_string(cfg.network);
        base.density_mode = to_string(cfg.density);
        base.n = n;
        base.rep = rep;
        double smallest_half_width = HUGE_VAL;
        auto& out = rows[job];
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            const EstimatorKind kind = cfg.estimators[e];
            ResultRow row = base;
            row.estimator = to_string(kind);
            const std::uint64_t seed = derive_seed(cfg.seed, {kEstimatorSeed, n, rep, static_cast<std::uint64_t>(kind)});
            const auto start = std::chrono::steady_clock::now();
            try {
                row.sigma_hat = row.p_value = row.ci_lo = row.ci_hi = kNaN;
                switch (kind) {
                    case EstimatorKind::NetAipw: {
                        const EstimateReport report = run_algorithm1(data, est, *learner, seed);
                        row.theta_hat = report.theta_hat;
                        row.sigma_hat = report.sigma_hat;
                        row.p_value = report.p_value;
                        row.ci_lo = report.ci_lo;
                        row.ci_hi = report.ci_hi;
                        smallest_half_width = std::min(smallest_half_width, (report.ci_hi - report.ci_lo) / 2.0);
                        break;
                    }
                    case EstimatorKind::Hajek:
                        row.theta_hat = hajek(data.w, data.y);
                        break;
                    case EstimatorKind::Ipw:
                        row.theta_hat = ipw_crossfit(data, cfg.folds, *learner, seed, ipw_options);
                        break;
                }
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::CrossFitInfeasible && err.kind() != ErrorKind::DegenerateArms &&
                    err.kind() != ErrorKind::EmptyRuns) {
                    throw;
                }
                row = failed_row(row);
            }
            if (cfg.timing) {
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
            out.push_back(row);
        }

        const double target = smallest_half_width / 10.0;
        std::size_t reps = std::max<std::size_t>(100, cfg.oracle_min_reps);
        OracleEstimate truth = true_eate_oracle(net, sem, reps, derive_seed(cfg.seed, {kOracleSeed, n, rep}));
        while (!(truth.mc_se < target) && reps < cfg.oracle_max_reps && std::isfinite(target)) {
            reps = std::min(cfg.oracle_max_reps, reps * 4);
            truth = true_eate_oracle(net, sem, reps, derive_seed(cfg.seed, {kOracleSeed, n, rep}));
        }
        for (auto& row : out) row.truth = truth.value;
    });

    std::vector<ResultRow> all;
    for (auto& block : rows) all.insert(all.end(), block.begin(), block.end());
    return all;
}

void write_results(std::ostream& out, std::span<const ResultRow> rows) {
    out << kResultHeader << '\n';
    for (const auto& r : rows) {
        out << r.network << ',' << r.density_mode << ',' << r.n << ',' << r.estimator << ',' << r.rep << ','
            << real(r.theta_hat) << ',' << real(r.sigma_hat) << ',' << real(r.p_value) << ',' << real(r.ci_lo) << ','
            << real(r.ci_hi) << ',' << real(r.truth) << ',' << (r.failed ? 1 : 0) << ',' << real(r.seconds) << '\n';
    }
}

std::vector<ResultRow> read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty results file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultHeader) throw Error(ErrorKind::Parse, "unexpected results header: " + line);
    std::vector<ResultRow> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 13) throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": expected 13 fields");
        if (f[11] != "0" && f[11] != "1") throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": bad failed flag");
        ResultRow r;
        r.network = f[0];
        r.density_mode = f[1];
        r.n = parse_count(f[2]);
        r.estimator = f[3];
        r.rep = parse_count(f[4]);
        r.theta_hat = parse_real(f[5]);
        r.sigma_hat = parse_real(f[6]);
        r.p_value = parse_real(f[7]);
        r.ci_lo = parse_real(f[8]);
        r.ci_hi = parse_real(f[9]);
        r.truth = parse_real(f[10]);
        r.failed = f[11] == "1";
        r.seconds = parse_real(f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidProbability, "alpha out of (0, 1)");
    using Key = std::tuple<std::string, std::string, std::size_t, std::string>;
    std::map<Key, std::vector<const ResultRow*>> groups;
    std::vector<Key> order;
    for (const auto& r : rows) {
        Key key{r.network, r.density_mode, r.n, r.estimator};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& members = groups[key];
        SummaryRow s;
        std::tie(s.network, s.density_mode, s.n, s.estimator) = key;
        std::vector<const ResultRow*> ok;
        for (const auto* r : members) {
            if (r->failed) {
                ++s.failed;
            } else {
                ok.push_back(r);
            }
        }
        s.completed = ok.size();
        if (ok.empty()) {
            s.median_bias = s.coverage = s.median_ci_length = s.mean_estimate = s.sd_estimate = kNaN;
            out.push_back(s);
            continue;
        }
        std::vector<double> bias;
        double mean = 0.0;
        for (const auto* r : ok) {
            bias.push_back(r->theta_hat - r->truth);
            mean += r->theta_hat;
        }
        mean /= static_cast<double>(ok.size());
        double ss = 0.0;
        for (const auto* r : ok) ss += (r->theta_hat - mean) * (r->theta_hat - mean);
        const double sd = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : kNaN;
        s.median_bias = median_of(bias);
        s.mean_estimate = mean;
        s.sd_estimate = sd;

        const bool own_intervals = s.estimator == "netaipw";
        std::size_t covered = 0;
        std::vector<double> lengths;
        for (const auto* r : ok) {
            const double lo = own_intervals ? r->ci_lo : r->theta_hat - z * sd;
            const double hi = own_intervals ? r->ci_hi : r->theta_hat + z * sd;
            covered += (lo <= r->truth && r->truth <= hi) ? 1 : 0;
            lengths.push_back(hi - lo);
        }
        s.coverage = static_cast<double>(covered) / static_cast<double>(ok.size());
        s.median_ci_length = median_of(lengths);
        out.push_back(s);
    }
    return out;
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows) {
    out << "network,density_mode,n,estimator,completed,failed,median_bias,coverage,median_ci_length,mean_estimate,"
           "sd_estimate\n";
    for (const auto& s : rows) {
        out << s.network << ',' << s.density_mode << ',' << s.n << ',' << s.estimator << ',' << s.completed << ','
            << s.failed << ',' << real(s.median_bias) << ',' << real(s.coverage) << ',' << real(s.median_ci_length)
            << ',' << real(s.mean_estimate) << ',' << real(s.sd_estimate) << '\n';
    }
}

}  // namespace netaipw
