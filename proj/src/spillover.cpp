#include "netaipw/spillover.hpp"

#include "netaipw/error.hpp"
#include "netaipw/rng.hpp"

#include <algorithm>
#include <bit>

namespace netaipw {

namespace {

std::vector<Unit> to_vector(std::span<const Unit> s) { return {s.begin(), s.end()}; }

std::vector<Unit> merge_sorted(std::span<const Unit> a, std::span<const Unit> b) {
    std::vector<Unit> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

double treated_share(Treatments w, std::span<const Unit> units) {
    if (units.empty()) return 0.0;
    std::size_t treated = 0;
    for (Unit j : units) treated += w[j];
    return static_cast<double>(treated) / static_cast<double>(units.size());
}

class FracTreatedNeighbors final : public FeatureSpec {
public:
    std::string name() const override { return "frac_treated_neighbors"; }
    std::size_t x_dim() const override { return 1; }
    std::size_t z_dim() const override { return 0; }
    XFootprint x_footprint(const Network& net, Unit i) const override { return {to_vector(net.neighbors(i)), {}}; }
    std::vector<Unit> z_footprint(const Network&, Unit) const override { return {}; }
    void eval_x(const Network& net, Unit i, Treatments w, const Matrix&, std::span<double> out) const override {
        out[0] = treated_share(w, net.neighbors(i));
    }
    void eval_z(const Network&, Unit, const Matrix&, std::span<double>) const override {}
};

class TwoHopTreatedFractions final : public FeatureSpec {
public:
    std::string name() const override { return "two_hop_treated_fractions"; }
    std::size_t x_dim() const override { return 2; }
    std::size_t z_dim() const override { return 0; }
    XFootprint x_footprint(const Network& net, Unit i) const override {
        return {merge_sorted(net.neighbors(i), net.second_neighbors(i)), {}};
    }
    std::vector<Unit> z_footprint(const Network&, Unit) const override { return {}; }
    void eval_x(const Network& net, Unit i, Treatments w, const Matrix&, std::span<double> out) const override {
        out[0] = treated_share(w, net.neighbors(i));
        out[1] = treated_share(w, net.second_neighbors(i));
    }
    void eval_z(const Network&, Unit, const Matrix&, std::span<double>) const override {}
};

class SignedConfounderMean final : public FeatureSpec {
public:
    std::string name() const override { return "signed_confounder_mean"; }
    std::size_t x_dim() const override { return 1; }
    std::size_t z_dim() const override { return 0; }
    XFootprint x_footprint(const Network& net, Unit i) const override {
        auto nbrs = to_vector(net.neighbors(i));
        return {nbrs, nbrs};
    }
    std::vector<Unit> z_footprint(const Network&, Unit) const override { return {}; }
    void eval_x(const Network& net, Unit i, Treatments w, const Matrix& c, std::span<double> out) const override {
        auto nbrs = net.neighbors(i);
        if (nbrs.empty()) {
            out[0] = 0.0;
            return;
        }
        double sum = 0.0;
        for (Unit j : nbrs) sum += w[j] ? c(j, 0) : -c(j, 0);
        out[0] = sum / static_cast<double>(nbrs.size());
    }
    void eval_z(const Network&, Unit, const Matrix&, std::span<double>) const override {}
};

class NeighborConfounderMean final : public FeatureSpec {
public:
    std::string name() const override { return "neighbor_confounder_mean"; }
    std::size_t x_dim() const override { return 0; }
    std::size_t z_dim() const override { return 1; }
    XFootprint x_footprint(const Network&, Unit) const override { return {}; }
    std::vector<Unit> z_footprint(const Network& net, Unit i) const override { return to_vector(net.neighbors(i)); }
    void eval_x(const Network&, Unit, Treatments, const Matrix&, std::span<double>) const override {}
    void eval_z(const Network& net, Unit i, const Matrix& c, std::span<double> out) const override {
        auto nbrs = net.neighbors(i);
        if (nbrs.empty()) {
            out[0] = 0.0;
            return;
        }
        double sum = 0.0;
        for (Unit j : nbrs) sum += c(j, 0);
        out[0] = sum / static_cast<double>(nbrs.size());
    }
};

class CombinedFeatures final : public FeatureSpec {
public:
    CombinedFeatures(FeatureSpecPtr x_part, FeatureSpecPtr z_part) : x_(std::move(x_part)), z_(std::move(z_part)) {}
    std::string name() const override { return x_->name() + "+" + z_->name(); }
    std::size_t x_dim() const override { return x_->x_dim(); }
    std::size_t z_dim() const override { return z_->z_dim(); }
    XFootprint x_footprint(const Network& net, Unit i) const override { return x_->x_footprint(net, i); }
    std::vector<Unit> z_footprint(const Network& net, Unit i) const override { return z_->z_footprint(net, i); }
    void eval_x(const Network& net, Unit i, Treatments w, const Matrix& c, std::span<double> out) const override {
        x_->eval_x(net, i, w, c, out);
    }
    void eval_z(const Network& net, Unit i, const Matrix& c, std::span<double> out) const override {
        z_->eval_z(net, i, c, out);
    }

private:
    FeatureSpecPtr x_;
    FeatureSpecPtr z_;
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](double x, double y) {
        return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
    });
}

void check_dims(const Network& net, const Matrix& c, std::size_t w_size, bool check_w) {
    if (c.rows() != net.size() || (check_w && w_size != net.size())) {
        throw Error(ErrorKind::DimensionMismatch, "network has " + std::to_string(net.size()) + " units, confounders " +
                                                      std::to_string(c.rows()) + " rows, treatments " +
                                                      std::to_string(w_size));
    }
}

void add_clique(std::vector<Edge>& edges, const std::vector<Unit>& members) {
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            if (members[a] != members[b]) edges.emplace_back(members[a], members[b]);
        }
    }
}

void add_biclique(std::vector<Edge>& edges, const std::vector<Unit>& left, const std::vector<Unit>& right) {
    for (Unit a : left) {
        for (Unit b : right) {
            if (a != b) edges.emplace_back(a, b);
        }
    }
}

}  // namespace

FeatureSpecPtr frac_treated_neighbors() { return std::make_shared<FracTreatedNeighbors>(); }
FeatureSpecPtr two_hop_treated_fractions() { return std::make_shared<TwoHopTreatedFractions>(); }
FeatureSpecPtr signed_confounder_mean() { return std::make_shared<SignedConfounderMean>(); }
FeatureSpecPtr neighbor_confounder_mean() { return std::make_shared<NeighborConfounderMean>(); }

FeatureSpecPtr combine_features(FeatureSpecPtr x_part, FeatureSpecPtr z_part) {
    return std::make_shared<CombinedFeatures>(std::move(x_part), std::move(z_part));
}

FeatureSpecPtr feature_spec_by_name(const std::string& name) {
    if (name == "frac_treated_neighbors") return frac_treated_neighbors();
    if (name == "two_hop_treated_fractions") return two_hop_treated_fractions();
    if (name == "signed_confounder_mean") return signed_confounder_mean();
    if (name == "neighbor_confounder_mean") return neighbor_confounder_mean();
    throw Error(ErrorKind::InvalidParameter, "unknown feature spec '" + name + "'");
}

Matrix compute_x_features(const Network& net, const FeatureSpec& spec, Treatments w, const Matrix& c) {
    check_dims(net, c, w.size(), true);
    Matrix x(net.size(), spec.x_dim());
    if (spec.x_dim() == 0) return x;
    for (Unit i = 0; i < net.size(); ++i) spec.eval_x(net, i, w, c, x.row(i));
    return x;
}

Matrix compute_z_features(const Network& net, const FeatureSpec& spec, const Matrix& c) {
    check_dims(net, c, 0, false);
    Matrix z(net.size(), spec.z_dim());
    if (spec.z_dim() == 0) return z;
    for (Unit i = 0; i < net.size(); ++i) spec.eval_z(net, i, c, z.row(i));
    return z;
}

DependencyGraph derive_dependency_graph(const Network& net, const FeatureSpec& spec, const DependencyOptions& options) {
    const std::size_t n = net.size();
    // readers_x[m]: units whose X reads some variable of m; readers_z[m]: units whose Z reads C_m.
    std::vector<std::vector<Unit>> readers_x(n), readers_z(n);
    std::vector<Edge> edges;
    for (Unit i = 0; i < n; ++i) {
        XFootprint xf = spec.x_footprint(net, i);
        std::vector<Unit> x_units = merge_sorted(xf.treatments, xf.confounders);
        std::vector<Unit> z_units = spec.z_footprint(net, i);
        std::sort(z_units.begin(), z_units.end());
        z_units.erase(std::unique(z_units.begin(), z_units.end()), z_units.end());
        for (Unit m : x_units) {
            if (m == i) throw Error(ErrorKind::InvalidParameter, "unit " + std::to_string(i) + " in its own X footprint");
            readers_x[m].push_back(i);
            edges.emplace_back(m, i);  // condition 2
        }
        for (Unit m : z_units) {
            if (m == i) throw Error(ErrorKind::InvalidParameter, "unit " + std::to_string(i) + " in its own Z footprint");
            readers_z[m].push_back(i);
            edges.emplace_back(m, i);
        }
    }
    // Condition 1: a shared source m joins all of its readers; m itself is
    // excluded automatically since it never reads its own variables.
    for (Unit m = 0; m < n; ++m) {
        add_clique(edges, readers_x[m]);
        add_clique(edges, readers_z[m]);
        if (options.conservative) add_biclique(edges, readers_x[m], readers_z[m]);
    }
    for (auto& e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return DependencyGraph(Network(n, edges));
}

std::size_t check_footprints(const Network& net, const FeatureSpec& spec, std::size_t confounder_dim,
                             std::size_t trials, std::uint64_t seed) {
    const std::size_t n = net.size();
    if (n == 0) return 0;
    Rng rng(seed);
    std::size_t violations = 0;
    std::vector<double> before_x(spec.x_dim()), after_x(spec.x_dim());
    std::vector<double> before_z(spec.z_dim()), after_z(spec.z_dim());
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<std::uint8_t> w(n);
        Matrix c(n, confounder_dim);
        for (auto& wi : w) wi = rng.bernoulli(0.5) ? 1 : 0;
        for (double& v : c.data()) v = rng.uniform(-1.0, 1.0);

        const Unit i = rng.below(n);
        const Unit j = rng.below(n);
        const bool perturb_w = confounder_dim == 0 || rng.bernoulli(0.5);
        XFootprint xf = spec.x_footprint(net, i);
        std::vector<Unit> zf = spec.z_footprint(net, i);
        auto contains = [](const std::vector<Unit>& v, Unit u) { return std::find(v.begin(), v.end(), u) != v.end(); };
        const bool in_x = perturb_w ? contains(xf.treatments, j) : contains(xf.confounders, j);
        const bool in_z = !perturb_w && contains(zf, j);

        spec.eval_x(net, i, w, c, before_x);
        spec.eval_z(net, i, c, before_z);
        if (perturb_w) {
            w[j] ^= 1;
        } else {
            c(j, rng.below(confounder_dim)) += rng.uniform(0.5, 1.5);
        }
        spec.eval_x(net, i, w, c, after_x);
        spec.eval_z(net, i, c, after_z);
        const bool x_same = bitwise_equal(before_x, after_x);
        const bool z_same = bitwise_equal(before_z, after_z);
        if ((!in_x && !x_same) || (!in_z && !z_same)) ++violations;
    }
    return violations;
}

}  // namespace netaipw
