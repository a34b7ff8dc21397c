#include "netaipw/baselines.hpp"

#include "netaipw/error.hpp"
#include "netaipw/kernels.hpp"
#include "netaipw/rng.hpp"

#include <optional>
#include <string>

namespace netaipw {

double hajek(std::span<const std::uint8_t> w, std::span<const double> y) {
    if (w.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "w and y lengths differ");
    double sum1 = 0.0, sum0 = 0.0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i]) {
            sum1 += y[i];
            ++n1;
        } else {
            sum0 += y[i];
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0) throw Error(ErrorKind::DegenerateArms, "need at least one treated and one control unit");
    return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
}

double ipw_crossfit(const Dataset& data, std::size_t k, const RegressionLearner& learner, std::uint64_t seed,
                    const FitOptions& options) {
    const FoldPlan plan = make_folds(data.size(), k, data.dependency, derive_seed(seed, {1}));
    return ipw_crossfit(data, plan, learner, seed, options);
}

double ipw_crossfit(const Dataset& data, const FoldPlan& plan, const RegressionLearner& learner, std::uint64_t seed,
                    const FitOptions& options) {
    const Matrix& c = data.c;
    const std::vector<double> w(data.w.begin(), data.w.end());
    const std::size_t need = std::max<std::size_t>(1, options.min_fit_size);
    std::optional<DesignMatrices> design;
    if (options.fixed) design.emplace(data);
    std::vector<double> fold_means;
    for (std::size_t k = 0; k < plan.fold_count(); ++k) {
        const auto& comp = plan.complements[k];
        const auto& fold = plan.folds[k];
        std::vector<double> e;
        if (options.known_propensity) {
            const double p = *options.known_propensity;
            if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidProbability, "known propensity " + std::to_string(p));
            e.assign(fold.size(), p);
        } else if (options.fixed) {
            e = clip_propensity(options.fixed->h->predict(select_rows(design->propensity, fold)), options.clip_eps);
        } else {
            std::size_t treated = 0;
            for (Unit i : comp) treated += data.w[i];
            const std::size_t control = comp.size() - treated;
            if (treated < need || control < need) {
                throw Error(ErrorKind::CrossFitInfeasible,
                            "complement has " + std::to_string(comp.size()) + " units (" + std::to_string(treated) +
                                " treated, " + std::to_string(control) + " control), each arm needs " +
                                std::to_string(need) + "; dependency graph max degree is " +
                                std::to_string(data.dependency.max_degree()));
            }
            std::vector<double> targets;
            targets.reserve(comp.size());
            for (Unit i : comp) targets.push_back(w[i]);
            const PredictorPtr model = learner.fit(select_rows(c, comp), targets, derive_seed(seed, {2, k, 3}));
            e = clip_propensity(model->predict(select_rows(c, fold)), options.clip_eps);
        }
        std::vector<double> fw, fy;
        for (Unit i : fold) {
            fw.push_back(w[i]);
            fy.push_back(data.y[i]);
        }
        std::vector<double> terms(fold.size());
        kernels::ipw_terms(e, fw, fy, terms);
        fold_means.push_back(kernels::lane_sum(terms) / static_cast<double>(fold.size()));
    }
    return kernels::lane_sum(fold_means) / static_cast<double>(fold_means.size());
}

}  // namespace netaipw
