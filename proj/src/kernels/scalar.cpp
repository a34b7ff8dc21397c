#include "kernels_impl.hpp"

namespace netaipw::kernels {

namespace {

void aipw_scores(const double* g1, const double* g0, const double* h, const double* w, const double* y, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double plug_in = g1[i] - g0[i];
        const double treated = (w[i] / h[i]) * (y[i] - g1[i]);
        const double control = ((1.0 - w[i]) / (1.0 - h[i])) * (y[i] - g0[i]);
        out[i] = (plug_in + treated) - control;
    }
}

void ipw_terms(const double* e, const double* w, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (w[i] * y[i]) / e[i] - ((1.0 - w[i]) * y[i]) / (1.0 - e[i]);
    }
}

double lane_sum(const double* x, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) lane[i % 4] += x[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double lane_sum_squared_deviation(const double* x, double center, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center;
        lane[i % 4] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double lane_pair_product_sum(const double* values, const std::uint32_t* first, const std::uint32_t* second,
                             std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) lane[k % 4] += values[first[k]] * values[second[k]];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{aipw_scores, ipw_terms, lane_sum, lane_sum_squared_deviation, lane_pair_product_sum};
    return table;
}

}  // namespace netaipw::kernels
