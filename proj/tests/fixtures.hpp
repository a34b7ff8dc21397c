#pragma once

#include "netaipw/graph.hpp"

#include <cstdint>
#include <vector>

namespace netaipw::testing {

// Nine-unit network matching the neighborhood of unit 6 in the worked
// example (0-indexed here; unit k of the example is index k - 1).
inline Network example_network() {
    const std::vector<Edge> edges{{0, 1}, {1, 2}, {1, 5}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {2, 3}};
    return Network(9, edges);
}

// Treatments giving unit 6 one treated neighbor out of three and two treated
// second neighbors out of three.
inline std::vector<std::uint8_t> example_treatments() { return {1, 1, 0, 1, 0, 1, 0, 1, 0}; }

// Chain 1-2-3-4, 0-indexed.
inline Network chain4() {
    const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}};
    return Network(4, edges);
}

}  // namespace netaipw::testing
