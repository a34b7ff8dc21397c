#pragma once

#include "netaipw/estimate.hpp"

#include <cstdint>
#include <span>

namespace netaipw {

/// Difference of the treated-arm and control-arm outcome means.
/// Throws DegenerateArms when an arm is empty.
double hajek(std::span<const std::uint8_t> w, std::span<const double> y);

/// Cross-fitted inverse probability weighting: per fold, the mean of
/// W Y / e(C) - (1 - W) Y / (1 - e(C)), with e regressed on C alone over the
/// fold's dependency-aware complement and clipped; averaged over folds.
/// A known propensity in `options`, or fixed nuisances (h evaluated on
/// [C | Z]), skips the regression.
double ipw_crossfit(const Dataset& data, std::size_t k, const RegressionLearner& learner, std::uint64_t seed,
                    const FitOptions& options = {});
double ipw_crossfit(const Dataset& data, const FoldPlan& plan, const RegressionLearner& learner, std::uint64_t seed,
                    const FitOptions& options = {});

}  // namespace netaipw
