#include "netaipw/graph.hpp"

#include "netaipw/error.hpp"
#include "netaipw/rng.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace netaipw {

Network::Network(std::size_t n, std::span<const Edge> edges) : adjacency_(n) {
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) {
            throw Error(ErrorKind::IndexOutOfRange, "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                                        ") outside [0, " + std::to_string(n) + ")");
        }
        if (a == b) throw Error(ErrorKind::SelfLoop, "unit " + std::to_string(a));
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    std::size_t directed = 0;
    for (auto& nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        directed += nbrs.size();
    }
    edge_count_ = directed / 2;
}

void Network::check_unit(Unit i) const {
    if (i >= adjacency_.size()) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "unit " + std::to_string(i) + " outside [0, " + std::to_string(adjacency_.size()) + ")");
    }
}

std::span<const Unit> Network::neighbors(Unit i) const {
    check_unit(i);
    return adjacency_[i];
}

std::size_t Network::max_degree() const noexcept {
    std::size_t best = 0;
    for (const auto& nbrs : adjacency_) best = std::max(best, nbrs.size());
    return best;
}

bool Network::has_edge(Unit i, Unit j) const {
    auto nbrs = neighbors(i);
    check_unit(j);
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::vector<Unit> Network::second_neighbors(Unit i) const {
    auto first = neighbors(i);
    std::vector<Unit> out;
    for (Unit j : first) {
        for (Unit m : adjacency_[j]) {
            if (m != i && !std::binary_search(first.begin(), first.end(), m)) out.push_back(m);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Edge> Network::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Unit i = 0; i < adjacency_.size(); ++i) {
        for (Unit j : adjacency_[i]) {
            if (i < j) out.emplace_back(i, j);
        }
    }
    return out;
}

Network erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidProbability, "p = " + std::to_string(p));
    Rng rng(seed);
    std::vector<Edge> edges;
    for (Unit i = 0; i < n; ++i) {
        for (Unit j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }
    }
    return Network(n, edges);
}

Network watts_strogatz(std::size_t n, std::size_t k_side, double beta, std::uint64_t seed) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "rewiring probability " + std::to_string(beta));
    }
    if (2 * k_side >= n) {
        throw Error(ErrorKind::InvalidParameter,
                    "need 2 * k_side < n, got k_side = " + std::to_string(k_side) + ", n = " + std::to_string(n));
    }
    std::vector<std::set<Unit>> adj(n);
    for (Unit i = 0; i < n; ++i) {
        for (std::size_t off = 1; off <= k_side; ++off) {
            const Unit j = (i + off) % n;
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    Rng rng(seed);
    for (std::size_t off = 1; off <= k_side; ++off) {
        for (Unit i = 0; i < n; ++i) {
            const Unit j = (i + off) % n;
            // The lattice edge may already have been moved away by an earlier rewire of j.
            if (!adj[i].count(j)) continue;
            if (!rng.bernoulli(beta)) continue;
            if (adj[i].size() + 1 >= n) continue;  // i is adjacent to everyone
            Unit target;
            do {
                target = rng.below(n);
            } while (target == i || adj[i].count(target));
            adj[i].erase(j);
            adj[j].erase(i);
            adj[i].insert(target);
            adj[target].insert(i);
        }
    }
    std::vector<Edge> edges;
    edges.reserve(n * k_side);
    for (Unit i = 0; i < n; ++i) {
        for (Unit j : adj[i]) {
            if (i < j) edges.emplace_back(i, j);
        }
    }
    return Network(n, edges);
}

void write_edge_list(std::ostream& out, const Network& net) {
    out << "# n " << net.size() << '\n';
    for (const auto& [i, j] : net.edges()) out << (i + 1) << ' ' << (j + 1) << '\n';
}

Network read_edge_list(std::istream& in) {
    std::vector<Edge> edges;
    std::size_t declared = 0;
    bool has_declared = false;
    std::size_t largest = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first[0] == '#') {
            std::string key;
            if (first == "#" && (ls >> key) && key == "n" && (ls >> declared)) has_declared = true;
            continue;
        }
        long long a = 0, b = 0;
        std::istringstream fs(first);
        if (!(fs >> a) || !(ls >> b)) {
            throw Error(ErrorKind::Parse, "edge list line " + std::to_string(line_no) + ": expected two labels");
        }
        if (a < 1 || b < 1) {
            throw Error(ErrorKind::IndexOutOfRange, "edge list line " + std::to_string(line_no) + ": labels are 1-indexed");
        }
        edges.emplace_back(static_cast<Unit>(a - 1), static_cast<Unit>(b - 1));
        largest = std::max({largest, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
    }
    return Network(has_declared ? declared : largest, edges);
}

}  // namespace netaipw
