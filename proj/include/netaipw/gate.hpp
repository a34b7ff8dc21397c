#pragma once

#include "netaipw/estimate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace netaipw {

/// Population-wide binary treatment assignment pi.
struct InterventionVector {
    std::vector<std::uint8_t> pi;

    static InterventionVector all_ones(std::size_t n) { return {std::vector<std::uint8_t>(n, 1)}; }
    static InterventionVector all_zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
    InterventionVector flipped() const;
    std::size_t size() const noexcept { return pi.size(); }
};

/// "all-ones", "all-zeros", or the path of a file holding one 0/1 per unit
/// (whitespace separated). Throws Parse, Io, DimensionMismatch.
InterventionVector parse_intervention(const std::string& text, std::size_t n);

inline constexpr std::size_t kDefaultAlphaCap = 20;

/// Dependency-graph neighbors of i together with i, ascending.
std::vector<Unit> gate_alpha(const DependencyGraph& dependency, Unit i);

/// g1(C_i, X_i^pi) - g0(C_i, X_i^(1-pi))
///   + prod_{j in alpha(i)} W_j / h_j * (Y_i - g1(C_i, X_i))
///   - prod_{j in alpha(i)} (1 - W_j) / (1 - h_j) * (Y_i - g0(C_i, X_i)),
/// where X^pi recomputes the X features with treatments set to pi.
/// Throws AlphaTooLarge when |alpha(i)| > l_cap.
double score_phi_gate(Unit i, const Dataset& data, const NuisanceTriple& eta, const InterventionVector& pi,
                      std::size_t l_cap = kDefaultAlphaCap);

/// Score model plugging the GATE score into the cross-fitting pipeline.
/// Counterfactual features are computed once at construction.
class GateScore final : public ScoreModel {
public:
    GateScore(const Dataset& data, const InterventionVector& pi, std::size_t l_cap = kDefaultAlphaCap);

    void fold_scores(const Dataset& data, const DesignMatrices& design, std::span<const Unit> fold,
                     const NuisanceTriple& eta, std::span<double> phi, RunDiagnostics& diag) const override;

private:
    Matrix treated_rows_;  // [C | X^pi]
    Matrix control_rows_;  // [C | X^(1-pi)]
};

/// The estimation loop of run_algorithm1 with the GATE score.
EstimateReport estimate_gate(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                             const InterventionVector& pi, std::uint64_t seed, std::size_t l_cap = kDefaultAlphaCap);

}  // namespace netaipw
