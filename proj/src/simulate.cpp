#include "netaipw/simulate.hpp"

#include "netaipw/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace netaipw {

namespace {

enum Stage : std::uint64_t { kConfounderStream = 1, kTreatmentStream = 2, kOutcomeStream = 3 };

void validate(const SemSpec& sem) {
    if (!sem.sample_confounders || !sem.propensity || !sem.g1 || !sem.g0 || !sem.features) {
        throw Error(ErrorKind::InvalidSem, "confounder sampler, propensity, g1, g0 and features are all required");
    }
}

Matrix sample_confounders(const SemSpec& sem, std::size_t n, std::uint64_t seed) {
    Matrix c(n, sem.confounder_dim);
    Rng rng(derive_seed(seed, {kConfounderStream}));
    for (std::size_t i = 0; i < n; ++i) sem.sample_confounders(rng, c.row(i));
    return c;
}

std::vector<std::uint8_t> sample_treatments(const SemSpec& sem, const Matrix& c, const Matrix& z, std::uint64_t seed) {
    const std::size_t n = c.rows();
    std::vector<std::uint8_t> w(n);
    Rng rng(derive_seed(seed, {kTreatmentStream}));
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sem.propensity(c.row(i), z.row(i));
        if (!(p > 0.0 && p < 1.0)) {
            throw Error(ErrorKind::InvalidSem, "propensity " + std::to_string(p) + " at unit " + std::to_string(i));
        }
        w[i] = rng.bernoulli(p) ? 1 : 0;
    }
    return w;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw Error(ErrorKind::Parse, "dataset line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

Dataset simulate(const Network& net, const SemSpec& sem, std::uint64_t seed) {
    validate(sem);
    return simulate(net, derive_dependency_graph(net, *sem.features), sem, seed);
}

Dataset simulate(const Network& net, const DependencyGraph& dependency, const SemSpec& sem, std::uint64_t seed) {
    validate(sem);
    const std::size_t n = net.size();
    Dataset data;
    data.network = net;
    data.dependency = dependency;
    data.features = sem.features;
    data.c = sample_confounders(sem, n, seed);
    data.z = compute_z_features(net, *sem.features, data.c);
    data.w = sample_treatments(sem, data.c, data.z, seed);
    data.x = compute_x_features(net, *sem.features, data.w, data.c);
    data.y.resize(n);
    Rng rng(derive_seed(seed, {kOutcomeStream}));
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = data.w[i] ? sem.g1(data.c.row(i), data.x.row(i)) : sem.g0(data.c.row(i), data.x.row(i));
        if (sem.outcome == OutcomeModel::Binary) {
            if (!(mean >= 0.0 && mean <= 1.0)) {
                throw Error(ErrorKind::InvalidSem, "binary outcome mean " + std::to_string(mean) + " outside [0, 1]");
            }
            data.y[i] = rng.bernoulli(mean) ? 1.0 : 0.0;
        } else {
            data.y[i] = mean + (sem.outcome_noise ? sem.outcome_noise(rng) : 0.0);
        }
    }
    return data;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double benchmark_propensity(double c) { return sigmoid(c - 0.25); }

double benchmark_g1(double c, double /*x*/) {
    if (c < 0.5) return 2.5;
    if (c < 0.7) return 1.5;
    return 4.0;
}

double benchmark_g0(double c, double x) {
    if (c >= 0.4) return x >= 0.2 ? 0.5 : -0.75;
    return x >= 0.2 ? 0.25 : -0.5;
}

SemSpec benchmark_sem() {
    SemSpec sem;
    sem.confounder_dim = 1;
    sem.sample_confounders = [](Rng& rng, std::span<double> c) { c[0] = rng.uniform(); };
    sem.propensity = [](std::span<const double> c, std::span<const double>) { return benchmark_propensity(c[0]); };
    sem.g1 = [](std::span<const double> c, std::span<const double> x) { return benchmark_g1(c[0], x[0]); };
    sem.g0 = [](std::span<const double> c, std::span<const double> x) { return benchmark_g0(c[0], x[0]); };
    sem.outcome = OutcomeModel::Continuous;
    sem.outcome_noise = [](Rng& rng) {
        const double half_width = std::sqrt(0.12) / 2.0;
        return rng.uniform(-half_width, half_width);
    };
    sem.features = signed_confounder_mean();
    return sem;
}

NuisanceTriple oracle_nuisances(const SemSpec& sem) {
    const std::size_t p = sem.confounder_dim;
    auto split_eval = [p](auto fn) {
        return function_predictor([p, fn](std::span<const double> row) { return fn(row.first(p), row.subspan(p)); });
    };
    return {split_eval(sem.g1), split_eval(sem.g0), split_eval(sem.propensity)};
}

std::vector<OracleEstimate> true_unit_effects(const Network& net, const SemSpec& sem, std::size_t reps,
                                              std::uint64_t seed) {
    validate(sem);
    if (reps < 2) throw Error(ErrorKind::InvalidParameter, "need at least 2 oracle repetitions");
    const std::size_t n = net.size();
    std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t s = derive_seed(seed, {r});
        Matrix c = sample_confounders(sem, n, s);
        Matrix z = compute_z_features(net, *sem.features, c);
        auto w = sample_treatments(sem, c, z, s);
        Matrix x = compute_x_features(net, *sem.features, w, c);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = sem.g1(c.row(i), x.row(i)) - sem.g0(c.row(i), x.row(i));
            sum[i] += d;
            sum_sq[i] += d * d;
        }
    }
    std::vector<OracleEstimate> out(n);
    const double m = static_cast<double>(reps);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / m;
        const double var = std::max(0.0, (sum_sq[i] - m * mean * mean) / (m - 1.0));
        out[i] = {mean, std::sqrt(var / m)};
    }
    return out;
}

namespace {

OracleEstimate mean_and_se(const std::vector<double>& values) {
    const double m = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

}  // namespace

OracleEstimate true_eate_oracle(const Network& net, const SemSpec& sem, std::size_t reps, std::uint64_t seed) {
    validate(sem);
    if (reps < 100) throw Error(ErrorKind::InvalidParameter, "true_eate_oracle needs reps >= 100");
    const std::size_t n = net.size();
    std::vector<double> per_rep(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t s = derive_seed(seed, {r});
        Matrix c = sample_confounders(sem, n, s);
        Matrix z = compute_z_features(net, *sem.features, c);
        auto w = sample_treatments(sem, c, z, s);
        Matrix x = compute_x_features(net, *sem.features, w, c);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += sem.g1(c.row(i), x.row(i)) - sem.g0(c.row(i), x.row(i));
        per_rep[r] = acc / static_cast<double>(n);
    }
    return mean_and_se(per_rep);
}

OracleEstimate true_gate_oracle(const Network& net, const SemSpec& sem, std::span<const std::uint8_t> pi,
                                std::size_t reps, std::uint64_t seed) {
    validate(sem);
    if (reps < 2) throw Error(ErrorKind::InvalidParameter, "need at least 2 oracle repetitions");
    const std::size_t n = net.size();
    if (pi.size() != n) throw Error(ErrorKind::DimensionMismatch, "intervention vector length");
    std::vector<std::uint8_t> flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = pi[i] ? 0 : 1;
    auto arm_mean = [&](std::uint8_t wi, std::span<const double> c, std::span<const double> x) {
        return wi ? sem.g1(c, x) : sem.g0(c, x);
    };
    std::vector<double> per_rep(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t s = derive_seed(seed, {r});
        Matrix c = sample_confounders(sem, n, s);
        Matrix x_pi = compute_x_features(net, *sem.features, pi, c);
        Matrix x_flip = compute_x_features(net, *sem.features, flipped, c);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += arm_mean(pi[i], c.row(i), x_pi.row(i)) - arm_mean(flipped[i], c.row(i), x_flip.row(i));
        }
        per_rep[r] = acc / static_cast<double>(n);
    }
    return mean_and_se(per_rep);
}

void write_dataset(std::ostream& out, const Dataset& data) {
    out << "unit,w";
    for (std::size_t k = 0; k < data.c.cols(); ++k) out << ",c_" << (k + 1);
    for (std::size_t k = 0; k < data.x.cols(); ++k) out << ",x_" << (k + 1);
    for (std::size_t k = 0; k < data.z.cols(); ++k) out << ",z_" << (k + 1);
    out << ",y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << (i + 1) << ',' << static_cast<int>(data.w[i]);
        for (double v : data.c.row(i)) out << ',' << format_real(v);
        for (double v : data.x.row(i)) out << ',' << format_real(v);
        for (double v : data.z.row(i)) out << ',' << format_real(v);
        out << ',' << format_real(data.y[i]) << '\n';
    }
}

Dataset read_dataset(std::istream& in, const Network& net, FeatureSpecPtr features) {
    if (!features) throw Error(ErrorKind::InvalidParameter, "read_dataset needs a feature spec");
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "dataset is empty");
    const auto header = split_fields(line);
    std::size_t p = 0, r = 0, t = 0;
    for (const auto& h : header) {
        if (h.rfind("c_", 0) == 0) ++p;
        else if (h.rfind("x_", 0) == 0) ++r;
        else if (h.rfind("z_", 0) == 0) ++t;
    }
    if (header.size() != 3 + p + r + t || header.front() != "unit" || header[1] != "w" || header.back() != "y") {
        throw Error(ErrorKind::Parse, "dataset header must be unit,w,c_*,x_*,z_*,y");
    }
    if (r != features->x_dim() || t != features->z_dim()) {
        throw Error(ErrorKind::DimensionMismatch, "feature columns do not match spec '" + features->name() + "'");
    }
    const std::size_t n = net.size();
    Dataset data;
    data.network = net;
    data.features = features;
    data.w.assign(n, 0);
    data.c = Matrix(n, p);
    data.x = Matrix(n, r);
    data.z = Matrix(n, t);
    data.y.assign(n, 0.0);
    std::vector<bool> seen(n, false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            throw Error(ErrorKind::Parse, "dataset line " + std::to_string(line_no) + ": wrong field count");
        }
        const double label = parse_real(f[0], line_no);
        if (label < 1 || label > static_cast<double>(n) || label != std::floor(label)) {
            throw Error(ErrorKind::IndexOutOfRange, "dataset line " + std::to_string(line_no) + ": unit " + f[0]);
        }
        const auto i = static_cast<Unit>(label) - 1;
        if (seen[i]) throw Error(ErrorKind::Parse, "unit " + f[0] + " listed twice");
        seen[i] = true;
        const double w = parse_real(f[1], line_no);
        if (w != 0.0 && w != 1.0) throw Error(ErrorKind::Parse, "treatment must be 0 or 1 at line " + std::to_string(line_no));
        data.w[i] = static_cast<std::uint8_t>(w);
        std::size_t col = 2;
        for (std::size_t k = 0; k < p; ++k) data.c(i, k) = parse_real(f[col++], line_no);
        for (std::size_t k = 0; k < r; ++k) data.x(i, k) = parse_real(f[col++], line_no);
        for (std::size_t k = 0; k < t; ++k) data.z(i, k) = parse_real(f[col++], line_no);
        data.y[i] = parse_real(f[col], line_no);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw Error(ErrorKind::DimensionMismatch, "unit " + std::to_string(i + 1) + " missing from dataset");
    }
    if (compute_x_features(net, *features, data.w, data.c) != data.x ||
        compute_z_features(net, *features, data.c) != data.z) {
        throw Error(ErrorKind::DimensionMismatch, "stored features differ from recomputation with '" +
                                                      features->name() + "' on this network");
    }
    data.dependency = derive_dependency_graph(net, *features);
    return data;
}

}  // namespace netaipw
