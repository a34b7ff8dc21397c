#pragma once

#include "netaipw/config.hpp"
#include "netaipw/graph.hpp"
#include "netaipw/learn.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace netaipw {

enum class NetworkKind { ErdosRenyi, WattsStrogatz };
enum class DensityMode { Constant, Growth };
enum class EstimatorKind { NetAipw, Hajek, Ipw };

std::string to_string(NetworkKind kind);
std::string to_string(DensityMode mode);
std::string to_string(EstimatorKind kind);
NetworkKind parse_network_kind(const std::string& text);
DensityMode parse_density_mode(const std::string& text);
EstimatorKind parse_estimator(const std::string& text);

struct ExperimentConfig {
    NetworkKind network = NetworkKind::ErdosRenyi;
    DensityMode density = DensityMode::Constant;
    std::vector<std::size_t> sizes{625, 2500};
    std::size_t repetitions = 200;  // R, simulated datasets per size
    std::size_t folds = 10;         // K
    std::size_t splits = 10;        // B, cross-fitting repetitions per estimate
    double alpha = 0.05;
    /// "forest" or "oracle" (true nuisance functions, netAIPW only).
    std::string learner = "forest";
    ForestConfig forest{.n_trees = 200};
    std::vector<EstimatorKind> estimators{EstimatorKind::NetAipw, EstimatorKind::Hajek, EstimatorKind::Ipw};
    std::uint64_t seed = 1;
    std::size_t min_fit_size = 50;
    double clip_eps = 0.01;
    std::size_t min_stratum_size = 30;
    double ws_beta = 0.05;
    std::size_t oracle_min_reps = 200;
    std::size_t oracle_max_reps = 100000;
    /// Worker threads over repetitions; 0 uses the hardware count.
    std::size_t threads = 1;
    /// Record wall-clock seconds per estimate; off keeps output reproducible.
    bool timing = false;
};

/// Reads the keys: network, density_mode, n, repetitions, folds, splits,
/// alpha, learner, trees, min_node_size, mtry, sample_fraction, estimators,
/// seed, min_fit_size, clip_eps, min_stratum_size, ws_beta, oracle_min_reps,
/// oracle_max_reps, threads, timing. Throws Parse or InvalidParameter.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv);

/// R = 1000, B = 20, 500 trees.
void apply_full_scale(ExperimentConfig& cfg);

/// ER with edge probability 3/n (constant) or 3 n^(1/9) / n (growth); WS
/// with k_side = 2 (constant) or max(1, round(3 n^(1/9) / 2)) (growth).
Network make_network(NetworkKind kind, DensityMode mode, std::size_t n, double ws_beta, std::uint64_t seed);

struct ResultRow {
    std::string network;
    std::string density_mode;
    std::size_t n = 0;
    std::string estimator;
    std::size_t rep = 0;
    double theta_hat = 0.0;
    double sigma_hat = 0.0;
    double p_value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double truth = 0.0;
    bool failed = false;
    double seconds = 0.0;
};

/// For each size and repetition: a fresh network and benchmark dataset from
/// derived seeds, every configured estimator on that dataset, and the Monte
/// Carlo EATE of that network as truth. Oracle repetitions grow until the
/// oracle's standard error is below a tenth of the smallest netAIPW CI
/// half-width of the repetition. Estimator failures become rows with
/// failed = true. Rows are ordered by (size, repetition, estimator).
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kResultHeader =
    "network,density_mode,n,estimator,rep,theta_hat,sigma_hat,p_value,ci_lo,ci_hi,truth,failed,seconds";

void write_results(std::ostream& out, std::span<const ResultRow> rows);
/// Throws Parse on a malformed header or row.
std::vector<ResultRow> read_results(std::istream& in);

struct SummaryRow {
    std::string network;
    std::string density_mode;
    std::size_t n = 0;
    std::string estimator;
    std::size_t completed = 0;
    std::size_t failed = 0;
    double median_bias = 0.0;
    double coverage = 0.0;
    double median_ci_length = 0.0;
    double mean_estimate = 0.0;
    double sd_estimate = 0.0;
};

/// Metrics per (network, density, n, estimator) over the non-failed rows.
/// netAIPW uses its own intervals; the other estimators use
/// theta_hat +- z_(1 - alpha / 2) * (empirical sd of theta_hat).
std::vector<SummaryRow> summarize(std::span<const ResultRow> rows, double alpha);

void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace netaipw
