#pragma once

#include "netaipw/graph.hpp"
#include "netaipw/learn.hpp"
#include "netaipw/matrix.hpp"
#include "netaipw/rng.hpp"
#include "netaipw/spillover.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace netaipw {

enum class OutcomeModel {
    Continuous,  // Y = W g1 + (1 - W) g0 + noise
    Binary,      // Y ~ Bernoulli(W g1 + (1 - W) g0)
};

/// Structural equations generating (C, W, Y) given spillover features.
struct SemSpec {
    std::size_t confounder_dim = 1;
    std::function<void(Rng&, std::span<double>)> sample_confounders;
    /// h(C_i, Z_i), must lie strictly inside (0, 1).
    std::function<double(std::span<const double>, std::span<const double>)> propensity;
    /// g1(C_i, X_i) and g0(C_i, X_i).
    std::function<double(std::span<const double>, std::span<const double>)> g1;
    std::function<double(std::span<const double>, std::span<const double>)> g0;
    OutcomeModel outcome = OutcomeModel::Continuous;
    /// Centered noise for the continuous model; empty means no noise.
    std::function<double(Rng&)> outcome_noise;
    FeatureSpecPtr features;
};

/// One unit's record (W_i, C_i, X_i, Z_i, Y_i), viewing into a Dataset.
struct UnitData {
    std::uint8_t w = 0;
    std::span<const double> c;
    std::span<const double> x;
    std::span<const double> z;
    double y = 0.0;
};

/// Column-wise unit records together with the network they live on.
struct Dataset {
    Network network;
    DependencyGraph dependency;
    FeatureSpecPtr features;
    std::vector<std::uint8_t> w;
    Matrix c;
    Matrix x;
    Matrix z;
    std::vector<double> y;

    std::size_t size() const noexcept { return w.size(); }
    UnitData unit(Unit i) const { return {w[i], c.row(i), x.row(i), z.row(i), y[i]}; }
    /// Rows [C | X], the regressors of g1 and g0.
    Matrix outcome_features() const { return hconcat(c, x); }
    /// Rows [C | Z], the regressors of h.
    Matrix propensity_features() const { return hconcat(c, z); }
};

/// Sequentially evaluates the structural equations in the order
/// C -> Z -> W -> X -> Y, one RNG stream per stage derived from `seed`.
/// Throws InvalidSem if a sampled propensity leaves (0, 1) or a binary-model
/// mean leaves [0, 1].
Dataset simulate(const Network& net, const SemSpec& sem, std::uint64_t seed);

/// Same, reusing a dependency graph already derived for (net, sem.features).
Dataset simulate(const Network& net, const DependencyGraph& dependency, const SemSpec& sem, std::uint64_t seed);

/// Simulation-study SEM: C ~ Unif(0, 1); h = sigmoid(C - 0.25); step-function
/// g1, g0; noise ~ Unif(-sqrt(0.12)/2, sqrt(0.12)/2); X = signed
/// confounder mean of the neighbors; no Z.
SemSpec benchmark_sem();

double sigmoid(double v);
double benchmark_propensity(double c);
double benchmark_g1(double c, double x);
double benchmark_g0(double c, double x);

/// Predictors evaluating the SEM's true g1, g0 (over [C | X] rows) and h
/// (over [C | Z] rows).
NuisanceTriple oracle_nuisances(const SemSpec& sem);

struct OracleEstimate {
    double value = 0.0;
    double mc_se = 0.0;
};

/// Monte Carlo value of (1/N) sum_i E[g1(C_i, X_i) - g0(C_i, X_i)], redrawing
/// (C, W, X) `reps` times. Throws InvalidParameter when reps < 100.
OracleEstimate true_eate_oracle(const Network& net, const SemSpec& sem, std::size_t reps, std::uint64_t seed);

/// Per-unit E[g1(C_i, X_i) - g0(C_i, X_i)] by the same redraws.
std::vector<OracleEstimate> true_unit_effects(const Network& net, const SemSpec& sem, std::size_t reps,
                                              std::uint64_t seed);

/// Interventional Monte Carlo value of (1/N) sum_i E[Y_i under do(W = pi)
/// - Y_i under do(W = 1 - pi)], using the outcome means (noise is centered).
OracleEstimate true_gate_oracle(const Network& net, const SemSpec& sem, std::span<const std::uint8_t> pi,
                                std::size_t reps, std::uint64_t seed);

/// Delimited text with header unit,w,c_1..c_p,x_1..x_r,z_1..z_t,y. Units are
/// 1-indexed; reals are printed with 17 significant digits.
void write_dataset(std::ostream& out, const Dataset& data);

/// Reads a dataset written by write_dataset and attaches the network and
/// features. Stored X/Z must match recomputation from (W, C, network);
/// throws Parse or DimensionMismatch otherwise.
Dataset read_dataset(std::istream& in, const Network& net, FeatureSpecPtr features);

}  // namespace netaipw
