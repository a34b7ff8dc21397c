#pragma once

#include "netaipw/matrix.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace netaipw {

/// A fitted regression function. Immutable; safe for concurrent prediction.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual double predict_row(std::span<const double> row) const = 0;
    virtual void predict(const Matrix& features, std::span<double> out) const;
    std::vector<double> predict(const Matrix& features) const;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

/// Fits a Predictor from (features, targets). Implementations are
/// deterministic given the seed.
class RegressionLearner {
public:
    virtual ~RegressionLearner() = default;
    virtual PredictorPtr fit(const Matrix& features, std::span<const double> targets, std::uint64_t seed) const = 0;
};

using LearnerPtr = std::shared_ptr<const RegressionLearner>;

struct ForestConfig {
    std::size_t n_trees = 500;
    std::size_t min_node_size = 5;
    std::size_t mtry = 0;  // 0 selects max(1, floor(q / 3))
    double sample_fraction = 1.0;
    std::uint64_t seed = 0;
};

/// Bagged CART regression forest. Each tree is grown on a bootstrap sample
/// (with replacement, sample_fraction * m draws); each node tries mtry
/// features drawn without replacement and picks the midpoint split with the
/// largest variance reduction, ties going to the lower feature index and then
/// the lower threshold. Nodes with at most min_node_size samples, or with a
/// constant target, become leaves. Throws TooFewSamples, NonFiniteInput,
/// InvalidParameter.
PredictorPtr fit_random_forest(const ForestConfig& cfg, const Matrix& features, std::span<const double> targets);

/// Forest learner; the per-fit seed replaces cfg.seed.
LearnerPtr forest_learner(ForestConfig cfg);

/// Predicts the training-target mean everywhere.
LearnerPtr mean_learner();

/// Ignores the training data and evaluates `truth` row by row.
LearnerPtr oracle_learner(std::function<double(std::span<const double>)> truth);

/// Predicts a fixed value.
PredictorPtr constant_predictor(double value);

/// Predictor evaluating a function row by row.
PredictorPtr function_predictor(std::function<double(std::span<const double>)> fn);

/// Clamps each entry to [eps, 1 - eps]. Throws InvalidEps unless 0 < eps < 0.5.
std::vector<double> clip_propensity(std::span<const double> p, double eps);

/// Outcome regressions g1 (treated arm) and g0 (control arm) over (C, X) rows,
/// and the propensity h over (C, Z) rows.
struct NuisanceTriple {
    PredictorPtr g1;
    PredictorPtr g0;
    PredictorPtr h;
    /// Propensity predictions are clamped to [clip_eps, 1 - clip_eps] before
    /// use; 0 disables clipping.
    double clip_eps = 0.0;
};

}  // namespace netaipw
