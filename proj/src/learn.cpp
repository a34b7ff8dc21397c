#include "netaipw/learn.hpp"

#include "netaipw/error.hpp"

#include <algorithm>
#include <string>

namespace netaipw {

void Predictor::predict(const Matrix& features, std::span<double> out) const {
    if (out.size() != features.rows()) throw Error(ErrorKind::DimensionMismatch, "prediction buffer size");
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict_row(features.row(r));
}

std::vector<double> Predictor::predict(const Matrix& features) const {
    std::vector<double> out(features.rows());
    predict(features, out);
    return out;
}

namespace {

class ConstantPredictor final : public Predictor {
public:
    explicit ConstantPredictor(double v) : value_(v) {}
    double predict_row(std::span<const double>) const override { return value_; }
    void predict(const Matrix& features, std::span<double> out) const override {
        if (out.size() != features.rows()) throw Error(ErrorKind::DimensionMismatch, "prediction buffer size");
        std::fill(out.begin(), out.end(), value_);
    }

private:
    double value_;
};

class FunctionPredictor final : public Predictor {
public:
    explicit FunctionPredictor(std::function<double(std::span<const double>)> fn) : fn_(std::move(fn)) {}
    double predict_row(std::span<const double> row) const override { return fn_(row); }

private:
    std::function<double(std::span<const double>)> fn_;
};

class MeanLearner final : public RegressionLearner {
public:
    PredictorPtr fit(const Matrix& features, std::span<const double> targets, std::uint64_t) const override {
        if (targets.empty()) throw Error(ErrorKind::TooFewSamples, "mean learner needs at least one row");
        if (features.rows() != targets.size()) throw Error(ErrorKind::DimensionMismatch, "features vs targets");
        double sum = 0.0;
        for (double t : targets) sum += t;
        return constant_predictor(sum / static_cast<double>(targets.size()));
    }
};

class OracleLearner final : public RegressionLearner {
public:
    explicit OracleLearner(std::function<double(std::span<const double>)> truth) : truth_(std::move(truth)) {}
    PredictorPtr fit(const Matrix&, std::span<const double>, std::uint64_t) const override {
        return function_predictor(truth_);
    }

private:
    std::function<double(std::span<const double>)> truth_;
};

class ForestLearner final : public RegressionLearner {
public:
    explicit ForestLearner(ForestConfig cfg) : cfg_(cfg) {}
    PredictorPtr fit(const Matrix& features, std::span<const double> targets, std::uint64_t seed) const override {
        ForestConfig cfg = cfg_;
        cfg.seed = seed;
        return fit_random_forest(cfg, features, targets);
    }

private:
    ForestConfig cfg_;
};

}  // namespace

PredictorPtr constant_predictor(double value) { return std::make_shared<ConstantPredictor>(value); }

PredictorPtr function_predictor(std::function<double(std::span<const double>)> fn) {
    return std::make_shared<FunctionPredictor>(std::move(fn));
}

LearnerPtr forest_learner(ForestConfig cfg) { return std::make_shared<ForestLearner>(cfg); }
LearnerPtr mean_learner() { return std::make_shared<MeanLearner>(); }

LearnerPtr oracle_learner(std::function<double(std::span<const double>)> truth) {
    return std::make_shared<OracleLearner>(std::move(truth));
}

std::vector<double> clip_propensity(std::span<const double> p, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::InvalidEps, "eps = " + std::to_string(eps));
    std::vector<double> out(p.begin(), p.end());
    for (double& v : out) v = std::clamp(v, eps, 1.0 - eps);
    return out;
}

}  // namespace netaipw
