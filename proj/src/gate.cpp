#include "netaipw/gate.hpp"

#include "netaipw/error.hpp"

#include <algorithm>
#include <fstream>
#include <string>

namespace netaipw {

namespace {

void check_intervention(const Dataset& data, const InterventionVector& pi) {
    if (pi.size() != data.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "intervention has " + std::to_string(pi.size()) + " entries for " + std::to_string(data.size()) +
                        " units");
    }
}

std::size_t largest_alpha(const DependencyGraph& dependency) { return dependency.max_degree() + 1; }

void check_alpha_cap(const DependencyGraph& dependency, std::size_t l_cap) {
    const std::size_t largest = largest_alpha(dependency);
    if (largest > l_cap) {
        throw Error(ErrorKind::AlphaTooLarge, "a unit depends on " + std::to_string(largest) +
                                                  " units, above the cap of " + std::to_string(l_cap));
    }
}

Matrix counterfactual_rows(const Dataset& data, std::span<const std::uint8_t> treatments) {
    return hconcat(data.c, compute_x_features(data.network, *data.features, treatments, data.c));
}

// Weight products over alpha(i) given the propensities of its members.
double gate_score_value(double g1_pi, double g0_flip, double g1_obs, double g0_obs, double y,
                        std::span<const Unit> alpha, std::span<const std::uint8_t> w, std::span<const double> h) {
    double treated_weight = 1.0;
    double control_weight = 1.0;
    for (std::size_t a = 0; a < alpha.size(); ++a) {
        const double wj = w[alpha[a]];
        treated_weight *= wj / h[a];
        control_weight *= (1.0 - wj) / (1.0 - h[a]);
    }
    const double plug_in = g1_pi - g0_flip;
    const double treated = treated_weight * (y - g1_obs);
    const double control = control_weight * (y - g0_obs);
    return (plug_in + treated) - control;
}

}  // namespace

InterventionVector InterventionVector::flipped() const {
    InterventionVector out{pi};
    for (auto& v : out.pi) v = v ? 0 : 1;
    return out;
}

InterventionVector parse_intervention(const std::string& text, std::size_t n) {
    if (text == "all-ones") return InterventionVector::all_ones(n);
    if (text == "all-zeros") return InterventionVector::all_zeros(n);
    std::ifstream in(text);
    if (!in) throw Error(ErrorKind::Io, "cannot open intervention file " + text);
    InterventionVector out;
    std::string token;
    while (in >> token) {
        if (token != "0" && token != "1") throw Error(ErrorKind::Parse, "intervention entry '" + token + "' is not 0 or 1");
        out.pi.push_back(token == "1" ? 1 : 0);
    }
    if (out.size() != n) {
        throw Error(ErrorKind::DimensionMismatch,
                    "intervention file has " + std::to_string(out.size()) + " entries, expected " + std::to_string(n));
    }
    return out;
}

std::vector<Unit> gate_alpha(const DependencyGraph& dependency, Unit i) {
    if (i >= dependency.size()) throw Error(ErrorKind::IndexOutOfRange, "unit " + std::to_string(i));
    const auto nb = dependency.neighbors(i);
    std::vector<Unit> out(nb.begin(), nb.end());
    out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

double score_phi_gate(Unit i, const Dataset& data, const NuisanceTriple& eta, const InterventionVector& pi,
                      std::size_t l_cap) {
    check_intervention(data, pi);
    const std::vector<Unit> alpha = gate_alpha(data.dependency, i);
    if (alpha.size() > l_cap) {
        throw Error(ErrorKind::AlphaTooLarge, "unit " + std::to_string(i) + " depends on " +
                                                  std::to_string(alpha.size()) + " units, above the cap of " +
                                                  std::to_string(l_cap));
    }
    const FeatureSpec& spec = *data.features;
    const InterventionVector flip = pi.flipped();
    const std::size_t p = data.c.cols();
    std::vector<double> row(p + spec.x_dim());
    std::copy(data.c.row(i).begin(), data.c.row(i).end(), row.begin());
    const std::span<double> x_part(row.data() + p, spec.x_dim());

    spec.eval_x(data.network, i, pi.pi, data.c, x_part);
    const double g1_pi = eta.g1->predict_row(row);
    spec.eval_x(data.network, i, flip.pi, data.c, x_part);
    const double g0_flip = eta.g0->predict_row(row);
    std::copy(data.x.row(i).begin(), data.x.row(i).end(), x_part.begin());
    const double g1_obs = eta.g1->predict_row(row);
    const double g0_obs = eta.g0->predict_row(row);

    const Matrix cz = select_rows(data.propensity_features(), alpha);
    const std::vector<double> h = evaluate_propensity(eta, cz);
    return gate_score_value(g1_pi, g0_flip, g1_obs, g0_obs, data.y[i], alpha, data.w, h);
}

GateScore::GateScore(const Dataset& data, const InterventionVector& pi, std::size_t l_cap)
    : treated_rows_((check_intervention(data, pi), check_alpha_cap(data.dependency, l_cap),
                     counterfactual_rows(data, pi.pi))),
      control_rows_(counterfactual_rows(data, pi.flipped().pi)) {}

void GateScore::fold_scores(const Dataset& data, const DesignMatrices& design, std::span<const Unit> fold,
                            const NuisanceTriple& eta, std::span<double> phi, RunDiagnostics& diag) const {
    const std::size_t n = data.size();
    // Propensities are needed for every member of every alpha(i) in the fold.
    std::vector<std::size_t> slot(n, SIZE_MAX);
    std::vector<Unit> needed;
    std::vector<std::vector<Unit>> alphas;
    alphas.reserve(fold.size());
    for (Unit i : fold) {
        alphas.push_back(gate_alpha(data.dependency, i));
        for (Unit j : alphas.back()) {
            if (slot[j] == SIZE_MAX) {
                slot[j] = needed.size();
                needed.push_back(j);
            }
        }
    }
    const std::vector<double> h_needed = evaluate_propensity(eta, select_rows(design.propensity, needed), &diag.clipped);
    const std::vector<double> g1_pi = eta.g1->predict(select_rows(treated_rows_, fold));
    const std::vector<double> g0_flip = eta.g0->predict(select_rows(control_rows_, fold));
    const Matrix observed = select_rows(design.outcome, fold);
    const std::vector<double> g1_obs = eta.g1->predict(observed);
    const std::vector<double> g0_obs = eta.g0->predict(observed);

    std::vector<double> h;
    for (std::size_t k = 0; k < fold.size(); ++k) {
        h.clear();
        for (Unit j : alphas[k]) h.push_back(h_needed[slot[j]]);
        phi[fold[k]] = gate_score_value(g1_pi[k], g0_flip[k], g1_obs[k], g0_obs[k], data.y[fold[k]], alphas[k], data.w, h);
    }
}

EstimateReport estimate_gate(const Dataset& data, const EstimateConfig& cfg, const RegressionLearner& learner,
                             const InterventionVector& pi, std::uint64_t seed, std::size_t l_cap) {
    const GateScore score(data, pi, l_cap);
    return run_algorithm1(data, cfg, learner, seed, score);
}

}  // namespace netaipw
