#include "netaipw/estimate.hpp"

#include "netaipw/error.hpp"
#include "netaipw/kernels.hpp"
#include "netaipw/parallel.hpp"
#include "netaipw/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace netaipw {

namespace {

enum SeedTag : std::uint64_t { kFoldSeed = 1, kLearnerSeed = 2 };
enum LearnerTag : std::uint64_t { kTreatedFit = 1, kControlFit = 2, kPropensityFit = 3 };

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<double> gather(std::span<const double> values, std::span<const Unit> index) {
    std::vector<double> out(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) out[k] = values[index[k]];
    return out;
}

class EateScore final : public ScoreModel {
public:
    void fold_scores(const Dataset& data, const DesignMatrices& design, std::span<const Unit> fold,
                     const NuisanceTriple& eta, std::span<double> phi, RunDiagnostics& diag) const override {
        const Matrix cx = select_rows(design.outcome, fold);
        const Matrix cz = select_rows(design.propensity, fold);
        const std::vector<double> g1 = eta.g1->predict(cx);
        const std::vector<double> g0 = eta.g0->predict(cx);
        const std::vector<double> h = evaluate_propensity(eta, cz, &diag.clipped);
        const std::vector<double> w = gather(design.w, fold);
        const std::vector<double> y = gather(data.y, fold);
        std::vector<double> out(fold.size());
        kernels::aipw_scores(g1, g0, h, w, y, out);
        for (std::size_t k = 0; k < fold.size(); ++k) phi[fold[k]] = out[k];
    }
};

FoldPlan finish_plan(std::vector<std::vector<Unit>> folds, const DependencyGraph& dependency) {
    const std::size_t n = dependency.size();
    FoldPlan plan;
    plan.fold_of.assign(n, SIZE_MAX);
    for (std::size_t k = 0; k < folds.size(); ++k) {
        std::sort(folds[k].begin(), folds[k].end());
        for (Unit i : folds[k]) {
            if (i >= n) throw Error(ErrorKind::IndexOutOfRange, "fold member " + std::to_string(i));
            if (plan.fold_of[i] != SIZE_MAX) throw Error(ErrorKind::InvalidParameter, "folds overlap at unit " + std::to_string(i));
            plan.fold_of[i] = k;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (plan.fold_of[i] == SIZE_MAX) throw Error(ErrorKind::InvalidParameter, "folds miss unit " + std::to_string(i));
    }
    plan.complements.reserve(folds.size());
    for (const auto& fold : folds) plan.complements.push_back(independent_complement(fold, dependency));
    plan.folds = std::move(folds);
    return plan;
}

}  // namespace

std::vector<Unit> independent_complement(std::span<const Unit> fold, const DependencyGraph& dependency) {
    const std::size_t n = dependency.size();
    std::vector<std::uint8_t> excluded(n, 0);
    for (Unit i : fold) {
        excluded[i] = 1;
        for (Unit j : dependency.neighbors(i)) excluded[j] = 1;
    }
    std::vector<Unit> out;
    for (Unit j = 0; j < n; ++j) {
        if (!excluded[j]) out.push_back(j);
    }
    return out;
}

FoldPlan make_folds(std::size_t n, std::size_t k, const DependencyGraph& dependency, std::uint64_t seed) {
    if (k < 2 || k > n) {
        throw Error(ErrorKind::InvalidK, "need 2 <= K <= n, got K = " + std::to_string(k) + ", n = " + std::to_string(n));
    }
    if (dependency.size() != n) throw Error(ErrorKind::DimensionMismatch, "dependency graph size");
    std::vector<Unit> perm(n);
    std::iota(perm.begin(), perm.end(), Unit{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::vector<Unit>> folds(k);
    for (std::size_t pos = 0; pos < n; ++pos) folds[pos % k].push_back(perm[pos]);
    return finish_plan(std::move(folds), dependency);
}

FoldPlan fold_plan_from(std::vector<std::vector<Unit>> folds, const DependencyGraph& dependency) {
    return finish_plan(std::move(folds), dependency);
}

DesignMatrices::DesignMatrices(const Dataset& data)
    : outcome(data.outcome_features()), propensity(data.propensity_features()), w(data.w.begin(), data.w.end()) {}

NuisanceTriple fit_nuisances(const Dataset& data, std::span<const Unit> comp, const RegressionLearner& learner,
                             const FitOptions& options, std::uint64_t seed) {
    return fit_nuisances(data, DesignMatrices(data), comp, learner, options, seed);
}

NuisanceTriple fit_nuisances(const Dataset& data, const DesignMatrices& design, std::span<const Unit> comp,
                             const RegressionLearner& learner, const FitOptions& options, std::uint64_t seed) {
    if (options.fixed) return *options.fixed;
    std::vector<Unit> treated, control;
    for (Unit i : comp) (data.w[i] ? treated : control).push_back(i);
    const std::size_t need = std::max<std::size_t>(1, options.min_fit_size);
    if (treated.size() < need || control.size() < need) {
        throw Error(ErrorKind::CrossFitInfeasible,
                    "complement has " + std::to_string(comp.size()) + " units (" + std::to_string(treated.size()) +
                        " treated, " + std::to_string(control.size()) + " control), each arm needs " +
                        std::to_string(need) + "; dependency graph max degree is " +
                        std::to_string(data.dependency.max_degree()) + ". Use a sparser network or fewer folds");
    }
    NuisanceTriple eta;
    eta.g1 = learner.fit(select_rows(design.outcome, treated), gather(data.y, treated), derive_seed(seed, {kTreatedFit}));
    eta.g0 = learner.fit(select_rows(design.outcome, control), gather(data.y, control), derive_seed(seed, {kControlFit}));
    if (options.known_propensity) {
        const double p = *options.known_propensity;
        if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidProbability, "known propensity " + std::to_string(p));
        eta.h = constant_predictor(p);
    } else {
        eta.h = learner.fit(select_rows(design.propensity, comp), gather(design.w, comp), derive_seed(seed, {kPropensityFit}));
        eta.clip_eps = options.clip_eps;
    }
    return eta;
}

std::vector<double> evaluate_propensity(const NuisanceTriple& eta, const Matrix& rows, std::size_t* clipped) {
    std::vector<double> h = eta.h->predict(rows);
    if (eta.clip_eps > 0.0) {
        std::vector<double> out = clip_propensity(h, eta.clip_eps);
        if (clipped != nullptr) {
            for (std::size_t k = 0; k < h.size(); ++k) *clipped += out[k] != h[k] ? 1 : 0;
        }
        return out;
    }
    for (double v : h) {
        if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::DegeneratePropensity, "propensity " + std::to_string(v));
    }
    return h;
}

double score_phi(const UnitData& unit, const NuisanceTriple& eta) {
    Matrix cx(1, unit.c.size() + unit.x.size());
    Matrix cz(1, unit.c.size() + unit.z.size());
    std::copy(unit.c.begin(), unit.c.end(), cx.row(0).begin());
    std::copy(unit.x.begin(), unit.x.end(), cx.row(0).begin() + static_cast<std::ptrdiff_t>(unit.c.size()));
    std::copy(unit.c.begin(), unit.c.end(), cz.row(0).begin());
    std::copy(unit.z.begin(), unit.z.end(), cz.row(0).begin() + static_cast<std::ptrdiff_t>(unit.c.size()));
    const double g1 = eta.g1->predict_row(cx.row(0));
    const double g0 = eta.g0->predict_row(cx.row(0));
    const double h = evaluate_propensity(eta, cz)[0];
    const double w = unit.w;
    double out = 0.0;
    kernels::aipw_scores({&g1, 1}, {&g0, 1}, {&h, 1}, {&w, 1}, {&unit.y, 1}, {&out, 1});
    return out;
}

const ScoreModel& eate_score() {
    static const EateScore score;
    return score;
}

std::vector<double> cross_fit_scores(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas,
                                     const ScoreModel& score) {
    if (etas.size() != plan.fold_count()) throw Error(ErrorKind::DimensionMismatch, "one nuisance triple per fold");
    DesignMatrices design(data);
    std::vector<double> phi(data.size());
    RunDiagnostics diag;
    for (std::size_t k = 0; k < plan.fold_count(); ++k) score.fold_scores(data, design, plan.folds[k], etas[k], phi, diag);
    return phi;
}

double point_estimate(const FoldPlan& plan, std::span<const double> phi) {
    std::vector<double> fold_means;
    fold_means.reserve(plan.fold_count());
    for (const auto& fold : plan.folds) {
        if (fold.empty()) throw Error(ErrorKind::InvalidK, "empty fold");
        fold_means.push_back(kernels::lane_sum(gather(phi, fold)) / static_cast<double>(fold.size()));
    }
    return kernels::lane_sum(fold_means) / static_cast<double>(fold_means.size());
}

double point_estimate(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas) {
    return point_estimate(plan, cross_fit_scores(data, plan, etas));
}

std::vector<std::vector<Unit>> degree_strata(const DependencyGraph& dependency, std::size_t min_size) {
    const std::size_t n = dependency.size();
    if (n == 0) return {};
    std::vector<std::vector<Unit>> by_degree(dependency.max_degree() + 1);
    for (Unit i = 0; i < n; ++i) by_degree[dependency.degree(i)].push_back(i);
    std::vector<std::vector<Unit>> strata;
    std::vector<Unit> current;
    for (auto& cls : by_degree) {
        current.insert(current.end(), cls.begin(), cls.end());
        if (!current.empty() && current.size() >= min_size) {
            strata.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        if (strata.empty()) {
            strata.push_back(std::move(current));
        } else {
            strata.back().insert(strata.back().end(), current.begin(), current.end());
        }
    }
    return strata;
}

std::vector<double> stratum_effects(std::span<const double> phi, const std::vector<std::vector<Unit>>& strata) {
    std::vector<double> out;
    out.reserve(strata.size());
    for (const auto& s : strata) out.push_back(kernels::lane_sum(gather(phi, s)) / static_cast<double>(s.size()));
    return out;
}

VarianceEstimate variance_estimate(std::span<const double> phi, const std::vector<std::vector<Unit>>& strata,
                                   std::span<const double> theta_by_stratum, const DependencyGraph& dependency) {
    const std::size_t n = phi.size();
    if (theta_by_stratum.size() != strata.size()) throw Error(ErrorKind::DimensionMismatch, "one effect per stratum");
    if (dependency.size() != n) throw Error(ErrorKind::DimensionMismatch, "dependency graph size");
    std::vector<double> psi(n);
    std::vector<std::uint8_t> covered(n, 0);
    for (std::size_t s = 0; s < strata.size(); ++s) {
        for (Unit i : strata[s]) {
            psi[i] = phi[i] - theta_by_stratum[s];
            covered[i] = 1;
        }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
        throw Error(ErrorKind::InvalidParameter, "strata do not cover every unit");
    }
    std::vector<std::uint32_t> first, second;
    for (const auto& [i, j] : dependency.edges()) {
        first.push_back(static_cast<std::uint32_t>(i));
        second.push_back(static_cast<std::uint32_t>(j));
    }
    const double nn = static_cast<double>(n);
    const double diagonal = kernels::lane_sum_squared_deviation(psi, 0.0) / nn;
    const double cross = 2.0 * kernels::lane_pair_product_sum(psi, first, second) / nn;
    const double total = diagonal + cross;
    if (total > 0.0) return {total, false};
    return {diagonal, true};
}

VarianceEstimate variance_estimate(const Dataset& data, const FoldPlan& plan, std::span<const NuisanceTriple> etas,
                                   const std::vector<std::vector<Unit>>& strata) {
    const auto phi = cross_fit_scores(data, plan, etas);
    return variance_estimate(phi, strata, stratum_effects(phi, strata), data.dependency);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidProbability, "quantile level " + std::to_string(p));
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double two_sided_p_value(double theta, double se) {
    if (!(se > 0.0)) return theta == 0.0 ? 1.0 : 0.0;
    return std::min(1.0, std::erfc(std::abs(theta) / se / std::sqrt(2.0)));
}

RunResult single_run(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                     std::uint64_t seed, const ScoreModel& score) {
    const std::size_t n = data.size();
    const FoldPlan plan = make_folds(n, cfg.folds, data.dependency, derive_seed(seed, {kFoldSeed}));
    const DesignMatrices design(data);
    RunResult result;
    RunDiagnostics& diag = result.diagnostics;
    diag.min_complement = SIZE_MAX;
    std::vector<double> phi(n);
    for (std::size_t k = 0; k < plan.fold_count(); ++k) {
        diag.min_complement = std::min(diag.min_complement, plan.complements[k].size());
        diag.max_complement = std::max(diag.max_complement, plan.complements[k].size());
        const NuisanceTriple eta =
            fit_nuisances(data, design, plan.complements[k], learner, cfg.fit, derive_seed(seed, {kLearnerSeed, k}));
        score.fold_scores(data, design, plan.folds[k], eta, phi, diag);
    }
    result.theta = point_estimate(plan, phi);
    const auto strata = degree_strata(data.dependency, cfg.min_stratum_size);
    const VarianceEstimate var = variance_estimate(phi, strata, stratum_effects(phi, strata), data.dependency);
    diag.variance_fallback = var.fallback;
    result.sigma = std::sqrt(var.sigma2);
    result.p_value = two_sided_p_value(result.theta, result.sigma / std::sqrt(static_cast<double>(n)));
    return result;
}

Aggregate aggregate(std::span<const RunResult> runs, double alpha, std::size_t n) {
    if (runs.empty()) throw Error(ErrorKind::EmptyRuns, "no successful repetitions to aggregate");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidProbability, "alpha " + std::to_string(alpha));
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> thetas, ses, ps;
    for (const auto& r : runs) {
        thetas.push_back(r.theta);
        ses.push_back(r.sigma / root_n);
        ps.push_back(r.p_value);
    }
    Aggregate out;
    out.theta_hat = median_of(thetas);
    out.p_value = std::min(1.0, 2.0 * median_of(ps));

    const double critical = normal_quantile(1.0 - alpha / 4.0);
    std::vector<double> scratch(runs.size());
    auto standardized_median = [&](double theta) {
        for (std::size_t b = 0; b < runs.size(); ++b) {
            const double d = std::abs(thetas[b] - theta);
            scratch[b] = ses[b] > 0.0 ? d / ses[b] : (d == 0.0 ? 0.0 : HUGE_VAL);
        }
        return median_of(scratch);
    };

    // The median of |theta_b - theta| / se_b is piecewise linear in theta with
    // breakpoints at the theta_b and where two of the lines cross. Between
    // breakpoints it is linear, so the set where it falls below the critical
    // value is a union of intervals whose ends are found by bisection inside
    // one linear piece. The interval reported is the hull of that set.
    std::vector<double> breaks(thetas);
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            if (!(ses[a] > 0.0 && ses[b] > 0.0)) continue;
            breaks.push_back((thetas[a] * ses[b] + thetas[b] * ses[a]) / (ses[a] + ses[b]));
            if (ses[a] != ses[b]) breaks.push_back((thetas[a] * ses[b] - thetas[b] * ses[a]) / (ses[b] - ses[a]));
        }
    }
    const double max_se = *std::max_element(ses.begin(), ses.end());
    const double span = 20.0 * max_se;
    double lo_bound = *std::min_element(thetas.begin(), thetas.end()) - span;
    double hi_bound = *std::max_element(thetas.begin(), thetas.end()) + span;
    breaks.push_back(lo_bound);
    breaks.push_back(hi_bound);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::size_t first_inside = breaks.size(), last_inside = breaks.size();
    double best_theta = out.theta_hat;
    double best_value = standardized_median(best_theta);
    for (std::size_t k = 0; k < breaks.size(); ++k) {
        const double v = standardized_median(breaks[k]);
        if (v < best_value) {
            best_value = v;
            best_theta = breaks[k];
        }
        if (v < critical) {
            if (first_inside == breaks.size()) first_inside = k;
            last_inside = k;
        }
    }
    if (first_inside == breaks.size()) {
        out.ci_lo = out.ci_hi = best_theta;
        return out;
    }

    const double tol = 1e-9 * std::max(1.0, std::abs(out.theta_hat));
    auto bisect = [&](double outside, double inside) {
        while (std::abs(inside - outside) > tol) {
            const double mid = outside + (inside - outside) / 2.0;
            if (mid == outside || mid == inside) break;
            if (standardized_median(mid) < critical) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        return outside + (inside - outside) / 2.0;
    };
    out.ci_lo = first_inside == 0 ? breaks[0] : bisect(breaks[first_inside - 1], breaks[first_inside]);
    out.ci_hi = last_inside + 1 == breaks.size() ? breaks.back() : bisect(breaks[last_inside + 1], breaks[last_inside]);
    return out;
}

EstimateReport run_algorithm1(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                              std::uint64_t seed, const ScoreModel& score) {
    if (cfg.repetitions < 1) throw Error(ErrorKind::InvalidParameter, "need at least one repetition");
    const std::size_t n = data.size();
    std::vector<std::optional<RunResult>> results(cfg.repetitions);
    std::vector<std::optional<Error>> failures(cfg.repetitions);
    parallel_for(cfg.repetitions, cfg.threads, [&](std::size_t b) {
        try {
            results[b] = single_run(data, cfg, learner, derive_seed(seed, {b}), score);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CrossFitInfeasible) throw;
            failures[b] = e;
        }
    });

    EstimateReport report;
    report.n = n;
    report.folds = cfg.folds;
    report.repetitions = cfg.repetitions;
    report.alpha = cfg.alpha;
    for (std::size_t b = 0; b < cfg.repetitions; ++b) {
        if (results[b]) report.per_repetition.push_back(*results[b]);
    }
    report.failed_runs = cfg.repetitions - report.per_repetition.size();
    if (2 * report.failed_runs > cfg.repetitions) {
        for (auto& f : failures) {
            if (f) throw *f;
        }
    }

    const Aggregate agg = aggregate(report.per_repetition, cfg.alpha, n);
    report.theta_hat = agg.theta_hat;
    report.p_value = agg.p_value;
    report.ci_lo = agg.ci_lo;
    report.ci_hi = agg.ci_hi;
    std::vector<double> sigmas;
    report.min_complement = SIZE_MAX;
    for (const auto& r : report.per_repetition) {
        sigmas.push_back(r.sigma);
        report.min_complement = std::min(report.min_complement, r.diagnostics.min_complement);
        report.max_complement = std::max(report.max_complement, r.diagnostics.max_complement);
        report.clipped += r.diagnostics.clipped;
        report.variance_fallbacks += r.diagnostics.variance_fallback ? 1 : 0;
    }
    report.sigma_hat = median_of(sigmas);
    report.d_max = data.dependency.max_degree();
    report.d_max_warning = static_cast<double>(report.d_max) > std::pow(static_cast<double>(n), 0.25);
    for (const auto& s : degree_strata(data.dependency, cfg.min_stratum_size)) report.stratum_sizes.push_back(s.size());
    return report;
}

void write_report(std::ostream& out, const EstimateReport& report) {
    auto real = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "theta_hat = " << real(report.theta_hat) << '\n'
        << "sigma_hat = " << real(report.sigma_hat) << '\n'
        << "p_value = " << real(report.p_value) << '\n'
        << "ci_lo = " << real(report.ci_lo) << '\n'
        << "ci_hi = " << real(report.ci_hi) << '\n'
        << "alpha = " << real(report.alpha) << '\n'
        << "n = " << report.n << '\n'
        << "folds = " << report.folds << '\n'
        << "repetitions = " << report.repetitions << '\n'
        << "failed_runs = " << report.failed_runs << '\n'
        << "d_max = " << report.d_max << '\n'
        << "d_max_warning = " << (report.d_max_warning ? "true" : "false") << '\n'
        << "stratum_sizes = ";
    for (std::size_t s = 0; s < report.stratum_sizes.size(); ++s) out << (s ? "," : "") << report.stratum_sizes[s];
    out << '\n'
        << "min_complement = " << report.min_complement << '\n'
        << "max_complement = " << report.max_complement << '\n'
        << "clipped_propensities = " << report.clipped << '\n'
        << "variance_fallbacks = " << report.variance_fallbacks << '\n'
        << "[repetitions]\n"
        << "rep,theta,sigma,p_value\n";
    for (std::size_t b = 0; b < report.per_repetition.size(); ++b) {
        const auto& r = report.per_repetition[b];
        out << (b + 1) << ',' << real(r.theta) << ',' << real(r.sigma) << ',' << real(r.p_value) << '\n';
    }
}

}  // namespace netaipw
