#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace netaipw {

using Unit = std::size_t;
using Edge = std::pair<Unit, Unit>;

/// Undirected simple graph on units 0..n-1. Immutable after construction;
/// neighbor lists are sorted so iteration order is reproducible.
class Network {
public:
    Network() = default;

    /// Builds a network from unordered pairs. Duplicate and mirrored pairs
    /// collapse to one edge. Throws IndexOutOfRange or SelfLoop.
    Network(std::size_t n, std::span<const Edge> edges);

    std::size_t size() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    std::span<const Unit> neighbors(Unit i) const;
    std::size_t degree(Unit i) const { return neighbors(i).size(); }
    std::size_t max_degree() const noexcept;
    bool has_edge(Unit i, Unit j) const;

    /// Units at distance exactly two from i.
    std::vector<Unit> second_neighbors(Unit i) const;

    /// All edges as (i, j) with i < j in lexicographic order.
    std::vector<Edge> edges() const;

    friend bool operator==(const Network&, const Network&) = default;

private:
    void check_unit(Unit i) const;

    std::vector<std::vector<Unit>> adjacency_;
    std::size_t edge_count_ = 0;
};

/// G(n, p): every unordered pair is an edge independently with probability p.
Network erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Ring lattice with k_side neighbors on each side, then each lattice edge
/// (i, i + offset) is visited for offset = 1..k_side, i = 0..n-1 and, with
/// probability beta, its far endpoint is moved to a uniformly chosen unit
/// that is neither i nor already adjacent to i. Edge count stays n * k_side.
Network watts_strogatz(std::size_t n, std::size_t k_side, double beta, std::uint64_t seed);

/// Edge-list text: one "i j" pair per line, 1-indexed. The writer emits a
/// "# n <count>" comment so isolated trailing units survive a round trip;
/// the reader honors it when present and otherwise uses the largest label.
void write_edge_list(std::ostream& out, const Network& net);
Network read_edge_list(std::istream& in);

}  // namespace netaipw
