#pragma once

#include "netaipw/learn.hpp"
#include "netaipw/simulate.hpp"
#include "netaipw/spillover.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace netaipw {

/// Random partition into K folds plus, per fold, the units that may train
/// nuisances for it: everything outside the fold and not adjacent to it in
/// the dependency graph.
struct FoldPlan {
    std::vector<std::vector<Unit>> folds;
    std::vector<std::vector<Unit>> complements;
    std::vector<std::size_t> fold_of;

    std::size_t fold_count() const noexcept { return folds.size(); }
};

/// Uniform random partition of 0..n-1 into K folds whose sizes differ by at
/// most one. Throws InvalidK unless 2 <= K <= n.
FoldPlan make_folds(std::size_t n, std::size_t k, const DependencyGraph& dependency, std::uint64_t seed);

/// Plan for caller-chosen folds, which must partition 0..n-1.
FoldPlan fold_plan_from(std::vector<std::vector<Unit>> folds, const DependencyGraph& dependency);

/// The units of `fold` and their dependency-graph neighbors removed from 0..n-1.
std::vector<Unit> independent_complement(std::span<const Unit> fold, const DependencyGraph& dependency);

struct FitOptions {
    /// Randomized designs: use this constant instead of fitting h.
    std::optional<double> known_propensity;
    /// Each treatment arm of a complement needs at least this many units.
    std::size_t min_fit_size = 50;
    double clip_eps = 0.01;
    /// Use these nuisances for every fold instead of fitting (oracle runs).
    std::optional<NuisanceTriple> fixed;
};

/// Regressor matrices shared by every fold of a dataset.
struct DesignMatrices {
    Matrix outcome;     // [C | X]
    Matrix propensity;  // [C | Z]
    std::vector<double> w;

    explicit DesignMatrices(const Dataset& data);
};

/// g1 on the treated units of `comp`, g0 on its controls, both over [C | X];
/// h on all of `comp` over [C | Z] (clipped), or the known constant.
/// Throws CrossFitInfeasible when an arm is below min_fit_size.
NuisanceTriple fit_nuisances(const Dataset& data, std::span<const Unit> comp, const RegressionLearner& learner,
                             const FitOptions& options, std::uint64_t seed);
NuisanceTriple fit_nuisances(const Dataset& data, const DesignMatrices& design, std::span<const Unit> comp,
                             const RegressionLearner& learner, const FitOptions& options, std::uint64_t seed);

/// Propensities from eta.h with clipping applied; counts clamped entries.
/// Without clipping, a value outside (0, 1) throws DegeneratePropensity.
std::vector<double> evaluate_propensity(const NuisanceTriple& eta, const Matrix& rows, std::size_t* clipped = nullptr);

/// AIPW score of one unit. Throws DegeneratePropensity.
double score_phi(const UnitData& unit, const NuisanceTriple& eta);

struct RunDiagnostics {
    std::size_t clipped = 0;
    std::size_t min_complement = 0;
    std::size_t max_complement = 0;
    bool variance_fallback = false;
};

/// Evaluates a unit-level score for the units of one fold using that fold's
/// nuisances. The EATE score is the default; the GATE score plugs in here.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;
    virtual void fold_scores(const Dataset& data, const DesignMatrices& design, std::span<const Unit> fold,
                             const NuisanceTriple& eta, std::span<double> phi, RunDiagnostics& diag) const = 0;
};

const ScoreModel& eate_score();

/// phi_i = score of unit i under the nuisances of its own fold.
std::vector<double> cross_fit_scores(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas,
                                     const ScoreModel& score = eate_score());

/// Mean over folds of the within-fold mean score.
double point_estimate(const FoldPlan& plan, std::span<const double> phi);
double point_estimate(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas);

/// Units grouped by dependency-graph degree. Degree classes are taken in
/// ascending order and merged greedily until each group holds at least
/// min_size units; an undersized tail joins the previous group.
std::vector<std::vector<Unit>> degree_strata(const DependencyGraph& dependency, std::size_t min_size);

/// Mean score within each stratum.
std::vector<double> stratum_effects(std::span<const double> phi, const std::vector<std::vector<Unit>>& strata);

struct VarianceEstimate {
    double sigma2 = 0.0;
    bool fallback = false;  // off-diagonal sum drove the estimate <= 0
};

/// (1/N) sum psi_i^2 + (2/N) sum over dependency edges psi_i psi_j, with
/// psi_i = phi_i - theta_{stratum(i)}. Falls back to the diagonal term when
/// the total is not positive.
VarianceEstimate variance_estimate(std::span<const double> phi, const std::vector<std::vector<Unit>>& strata,
                                   std::span<const double> theta_by_stratum, const DependencyGraph& dependency);
VarianceEstimate variance_estimate(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas,
                                   const std::vector<std::vector<Unit>>& strata);

double normal_cdf(double x);
double normal_quantile(double p);

/// min(1, 2 (1 - Phi(|theta| / se))).
double two_sided_p_value(double theta, double se);

struct RunResult {
    double theta = 0.0;
    double sigma = 0.0;
    double p_value = 1.0;
    RunDiagnostics diagnostics;
};

struct EstimateConfig {
    std::size_t folds = 10;
    std::size_t repetitions = 10;
    double alpha = 0.05;
    std::size_t min_stratum_size = 30;
    FitOptions fit;
    /// Worker threads for the repetition loop; 0 uses the hardware count.
    std::size_t threads = 1;
};

/// One pass of folds -> nuisances -> estimate -> variance -> p-value.
RunResult single_run(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                     std::uint64_t seed, const ScoreModel& score = eate_score());

struct Aggregate {
    double theta_hat = 0.0;
    double p_value = 1.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Median estimate, doubled median p-value (capped at 1) and the confidence
/// set {theta : median_b |theta_b - theta| / se_b < Phi^-1(1 - alpha / 4)},
/// se_b = sigma_b / sqrt(n), found by bisection either side of its minimizer.
/// Throws EmptyRuns.
Aggregate aggregate(std::span<const RunResult> runs, double alpha, std::size_t n);

struct EstimateReport {
    double theta_hat = 0.0;
    double sigma_hat = 0.0;  // median of per-repetition sigma
    double p_value = 1.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
    std::size_t folds = 0;
    std::size_t repetitions = 0;
    double alpha = 0.05;
    std::vector<RunResult> per_repetition;
    std::size_t failed_runs = 0;
    // Diagnostics.
    std::size_t d_max = 0;
    bool d_max_warning = false;  // d_max > n^(1/4)
    std::vector<std::size_t> stratum_sizes;
    std::size_t min_complement = 0;
    std::size_t max_complement = 0;
    std::size_t clipped = 0;
    std::size_t variance_fallbacks = 0;
};

/// Repeats single_run B times with derived seeds and aggregates. Runs that
/// fail with CrossFitInfeasible are dropped; if more than half fail the
/// first such error is rethrown.
EstimateReport run_algorithm1(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                              std::uint64_t seed, const ScoreModel& score = eate_score());

/// "key = value" lines followed by a [repetitions] table.
void write_report(std::ostream& out, const EstimateReport& report);

}  // namespace netaipw
