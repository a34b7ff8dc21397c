#include "netaipw/error.hpp"
#include "netaipw/learn.hpp"
#include "netaipw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

namespace netaipw {

namespace {

struct Node {
    double value = 0.0;     // split threshold, or the leaf prediction
    std::int32_t feature = -1;  // -1 marks a leaf
    std::uint32_t left = 0;     // right child is left + 1
};

class ForestPredictor final : public Predictor {
public:
    ForestPredictor(std::vector<Node> nodes, std::vector<std::uint32_t> roots, std::size_t n_features)
        : nodes_(std::move(nodes)), roots_(std::move(roots)), n_features_(n_features) {}

    double predict_row(std::span<const double> row) const override {
        if (row.size() != n_features_) throw Error(ErrorKind::DimensionMismatch, "forest feature count");
        double sum = 0.0;
        for (std::uint32_t root : roots_) {
            const Node* node = &nodes_[root];
            while (node->feature >= 0) {
                node = &nodes_[row[static_cast<std::size_t>(node->feature)] <= node->value ? node->left : node->left + 1];
            }
            sum += node->value;
        }
        return sum / static_cast<double>(roots_.size());
    }

private:
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> roots_;
    std::size_t n_features_;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;  // sum_l^2 / n_l + sum_r^2 / n_r
    bool found = false;
};

/// Grows trees over per-feature presorted sample lists. A node owns the same
/// contiguous range [begin, end) in every feature's list; splitting stably
/// partitions each list so the ranges stay sorted.
class TreeBuilder {
public:
    TreeBuilder(const ForestConfig& cfg, std::size_t mtry, const std::vector<std::vector<double>>& columns,
                std::span<const double> targets, const std::vector<std::vector<std::uint32_t>>& order)
        : cfg_(cfg), mtry_(mtry), columns_(columns), targets_(targets), order_(order),
          sorted_(columns.size()), goes_left_(targets.size()), counts_(targets.size()) {}

    void grow(std::uint64_t seed, std::vector<Node>& nodes, std::vector<std::uint32_t>& roots) {
        Rng rng(seed);
        const std::size_t m = targets_.size();
        const auto draws = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(cfg_.sample_fraction * static_cast<double>(m))));
        std::fill(counts_.begin(), counts_.end(), 0u);
        for (std::size_t d = 0; d < draws; ++d) ++counts_[rng.below(m)];

        const std::size_t q = columns_.size();
        if (q == 0) {
            // No regressors: the tree is the bootstrap mean.
            double sum = 0.0;
            for (std::size_t r = 0; r < m; ++r) sum += counts_[r] * targets_[r];
            roots.push_back(static_cast<std::uint32_t>(nodes.size()));
            nodes.push_back({sum / static_cast<double>(draws), -1, 0});
            return;
        }
        for (std::size_t f = 0; f < q; ++f) {
            auto& list = sorted_[f];
            list.clear();
            for (std::uint32_t r : order_[f]) {
                for (std::uint32_t k = 0; k < counts_[r]; ++k) list.push_back(r);
            }
        }
        scratch_.resize(draws);
        feature_pool_.resize(q);

        roots.push_back(static_cast<std::uint32_t>(nodes.size()));
        nodes.emplace_back();
        struct Pending {
            std::uint32_t node;
            std::size_t begin, end;
        };
        std::vector<Pending> stack{{roots.back(), 0, draws}};
        while (!stack.empty()) {
            const Pending job = stack.back();
            stack.pop_back();
            const auto& any_list = sorted_[0];
            double sum = 0.0;
            bool constant = true;
            const double first = targets_[any_list[job.begin]];
            for (std::size_t k = job.begin; k < job.end; ++k) {
                const double t = targets_[any_list[k]];
                sum += t;
                constant = constant && t == first;
            }
            const std::size_t size = job.end - job.begin;
            const double mean = sum / static_cast<double>(size);
            if (size <= cfg_.min_node_size || constant) {
                nodes[job.node] = {mean, -1, 0};
                continue;
            }
            const Split split = best_split(rng, job.begin, job.end, sum);
            if (!split.found) {
                nodes[job.node] = {mean, -1, 0};
                continue;
            }
            const std::size_t mid = partition(job.begin, job.end, split);
            const auto left = static_cast<std::uint32_t>(nodes.size());
            nodes.emplace_back();
            nodes.emplace_back();
            nodes[job.node] = {split.threshold, static_cast<std::int32_t>(split.feature), left};
            stack.push_back({left + 1, mid, job.end});
            stack.push_back({left, job.begin, mid});
        }
    }

private:
    Split best_split(Rng& rng, std::size_t begin, std::size_t end, double total) {
        const std::size_t q = columns_.size();
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
        for (std::size_t k = 0; k < mtry_; ++k) {
            const std::size_t pick = k + rng.below(q - k);
            std::swap(feature_pool_[k], feature_pool_[pick]);
        }
        std::sort(feature_pool_.begin(), feature_pool_.begin() + static_cast<std::ptrdiff_t>(mtry_));

        const double n = static_cast<double>(end - begin);
        Split best;
        best.score = total * total / n;  // a split must beat the unsplit node
        for (std::size_t k = 0; k < mtry_; ++k) {
            const std::size_t f = feature_pool_[k];
            const auto& col = columns_[f];
            const auto& list = sorted_[f];
            double left_sum = 0.0;
            for (std::size_t pos = begin; pos + 1 < end; ++pos) {
                left_sum += targets_[list[pos]];
                const double here = col[list[pos]];
                const double next = col[list[pos + 1]];
                if (!(here < next)) continue;
                const double nl = static_cast<double>(pos + 1 - begin);
                const double nr = n - nl;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
                if (score > best.score) {
                    double threshold = here + (next - here) / 2.0;
                    if (!(threshold < next)) threshold = here;  // adjacent doubles
                    best.score = score;
                    best.feature = f;
                    best.threshold = threshold;
                    best.found = true;
                }
            }
        }
        return best;
    }

    std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
        const auto& col = columns_[split.feature];
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint32_t r = sorted_[0][k];
            goes_left_[r] = col[r] <= split.threshold ? 1 : 0;
        }
        std::size_t mid = begin;
        for (auto& list : sorted_) {
            std::size_t lo = begin, hi = 0;
            for (std::size_t k = begin; k < end; ++k) {
                const std::uint32_t r = list[k];
                if (goes_left_[r]) {
                    list[lo++] = r;
                } else {
                    scratch_[hi++] = r;
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(hi), list.begin() + static_cast<std::ptrdiff_t>(lo));
            mid = lo;
        }
        return mid;
    }

    const ForestConfig& cfg_;
    std::size_t mtry_;
    const std::vector<std::vector<double>>& columns_;
    std::span<const double> targets_;
    const std::vector<std::vector<std::uint32_t>>& order_;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::size_t> feature_pool_;
};

}  // namespace

PredictorPtr fit_random_forest(const ForestConfig& cfg, const Matrix& features, std::span<const double> targets) {
    const std::size_t m = targets.size();
    const std::size_t q = features.cols();
    if (features.rows() != m) throw Error(ErrorKind::DimensionMismatch, "features vs targets");
    if (m < 2) throw Error(ErrorKind::TooFewSamples, "forest needs at least 2 rows, got " + std::to_string(m));
    if (cfg.n_trees < 1 || cfg.min_node_size < 1 || !(cfg.sample_fraction > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "forest needs n_trees >= 1, min_node_size >= 1, sample_fraction > 0");
    }
    const std::size_t mtry = cfg.mtry == 0 ? std::max<std::size_t>(1, q / 3) : cfg.mtry;
    if (q > 0 && mtry > q) throw Error(ErrorKind::InvalidParameter, "mtry exceeds feature count");
    for (double v : features.data()) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite feature value");
    }
    for (double v : targets) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite target value");
    }

    std::vector<std::vector<double>> columns(q, std::vector<double>(m));
    std::vector<std::vector<std::uint32_t>> order(q, std::vector<std::uint32_t>(m));
    for (std::size_t f = 0; f < q; ++f) {
        for (std::size_t r = 0; r < m; ++r) columns[f][r] = features(r, f);
        std::iota(order[f].begin(), order[f].end(), 0u);
        const auto& col = columns[f];
        std::stable_sort(order[f].begin(), order[f].end(), [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }

    std::vector<Node> nodes;
    std::vector<std::uint32_t> roots;
    roots.reserve(cfg.n_trees);
    TreeBuilder builder(cfg, mtry, columns, targets, order);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) builder.grow(derive_seed(cfg.seed, {t}), nodes, roots);
    return std::make_shared<ForestPredictor>(std::move(nodes), std::move(roots), q);
}

}  // namespace netaipw
