#pragma once

#include <cstddef>
#include <cstdint>

namespace netaipw::kernels {

struct KernelTable {
    void (*aipw_scores)(const double* g1, const double* g0, const double* h, const double* w, const double* y,
                        double* out, std::size_t n);
    void (*ipw_terms)(const double* e, const double* w, const double* y, double* out, std::size_t n);
    double (*lane_sum)(const double* x, std::size_t n);
    double (*lane_sum_squared_deviation)(const double* x, double center, std::size_t n);
    double (*lane_pair_product_sum)(const double* values, const std::uint32_t* first, const std::uint32_t* second,
                                    std::size_t n);
};

const KernelTable& scalar_table();
#if defined(NETAIPW_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace netaipw::kernels
