#pragma once

#include "netaipw/graph.hpp"
#include "netaipw/matrix.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace netaipw {

/// Treatments are stored as 0/1 bytes.
using Treatments = std::span<const std::uint8_t>;

/// Which other units' variables a unit's X-feature reads.
struct XFootprint {
    std::vector<Unit> treatments;   // units j whose W_j enters X_i
    std::vector<Unit> confounders;  // units j whose C_j enters X_i
};

/// A user-declared set of spillover features. X_i (length x_dim) may read
/// other units' treatments and confounders; Z_i (length z_dim) may read other
/// units' confounders only. Footprints are declared alongside the evaluators
/// and must cover everything the evaluators read; a unit never appears in
/// its own footprint. `check_footprints` verifies this by perturbation.
class FeatureSpec {
public:
    virtual ~FeatureSpec() = default;

    virtual std::string name() const = 0;
    virtual std::size_t x_dim() const = 0;
    virtual std::size_t z_dim() const = 0;

    virtual XFootprint x_footprint(const Network& net, Unit i) const = 0;
    virtual std::vector<Unit> z_footprint(const Network& net, Unit i) const = 0;

    virtual void eval_x(const Network& net, Unit i, Treatments w, const Matrix& c, std::span<double> out) const = 0;
    virtual void eval_z(const Network& net, Unit i, const Matrix& c, std::span<double> out) const = 0;
};

using FeatureSpecPtr = std::shared_ptr<const FeatureSpec>;

// Built-in features. All return 0 on units without the relevant neighbors.

/// X_i = share of treated network neighbors (x_dim 1, no Z).
FeatureSpecPtr frac_treated_neighbors();

/// X_i = (share of treated neighbors, share of treated units at distance two).
FeatureSpecPtr two_hop_treated_fractions();

/// X_i = mean over neighbors j of (+C_j if W_j = 1, -C_j if W_j = 0), using
/// the first confounder column (x_dim 1, no Z).
FeatureSpecPtr signed_confounder_mean();

/// Z_i = mean of the neighbors' first confounder column (z_dim 1, no X).
FeatureSpecPtr neighbor_confounder_mean();

/// X-features of `x_part` combined with Z-features of `z_part`.
FeatureSpecPtr combine_features(FeatureSpecPtr x_part, FeatureSpecPtr z_part);

/// Resolves a built-in by name: frac_treated_neighbors, two_hop_treated_fractions,
/// signed_confounder_mean, neighbor_confounder_mean. Throws InvalidParameter.
FeatureSpecPtr feature_spec_by_name(const std::string& name);

/// N x r matrix of X-features. Throws DimensionMismatch.
Matrix compute_x_features(const Network& net, const FeatureSpec& spec, Treatments w, const Matrix& c);

/// N x t matrix of Z-features (N x 0 when t = 0). Throws DimensionMismatch.
Matrix compute_z_features(const Network& net, const FeatureSpec& spec, const Matrix& c);

/// Undirected graph whose missing edges certify independence of unit records.
class DependencyGraph {
public:
    DependencyGraph() = default;
    explicit DependencyGraph(Network graph) : graph_(std::move(graph)) {}

    const Network& graph() const noexcept { return graph_; }
    std::size_t size() const noexcept { return graph_.size(); }
    std::span<const Unit> neighbors(Unit i) const { return graph_.neighbors(i); }
    std::size_t degree(Unit i) const { return graph_.degree(i); }
    std::size_t max_degree() const noexcept { return graph_.max_degree(); }
    std::vector<Edge> edges() const { return graph_.edges(); }

    friend bool operator==(const DependencyGraph&, const DependencyGraph&) = default;

private:
    Network graph_;
};

struct DependencyOptions {
    /// Also join i and j when some C_m enters X_i and Z_j.
    bool conservative = false;
};

/// Edge {i, j} iff (1) some third unit m has a variable in both X_i and X_j,
/// or C_m in both Z_i and Z_j; or (2) W_i or C_i enters X_j, or C_i enters
/// Z_j (or the mirrored statements). Sharing is judged per unit: W_m in X_i
/// and C_m in X_j counts, since W_m is itself a function of C_m.
DependencyGraph derive_dependency_graph(const Network& net, const FeatureSpec& spec,
                                        const DependencyOptions& options = {});

/// Randomized perturbation check of footprint faithfulness: mutates one
/// out-of-footprint W_j or C_j per trial and confirms X_i / Z_i are
/// bit-identical. Returns the number of violating trials.
std::size_t check_footprints(const Network& net, const FeatureSpec& spec, std::size_t confounder_dim,
                             std::size_t trials, std::uint64_t seed);

}  // namespace netaipw
