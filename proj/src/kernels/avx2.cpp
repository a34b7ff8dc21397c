// Compiled with -mavx2 (and without -mfma); only reached after a runtime
// CPU check.
#include "kernels_impl.hpp"

#include <immintrin.h>

namespace netaipw::kernels {

namespace {

void aipw_scores(const double* g1, const double* g0, const double* h, const double* w, const double* y, double* out,
                 std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg1 = _mm256_loadu_pd(g1 + i);
        const __m256d vg0 = _mm256_loadu_pd(g0 + i);
        const __m256d vh = _mm256_loadu_pd(h + i);
        const __m256d vw = _mm256_loadu_pd(w + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d plug_in = _mm256_sub_pd(vg1, vg0);
        const __m256d treated = _mm256_mul_pd(_mm256_div_pd(vw, vh), _mm256_sub_pd(vy, vg1));
        const __m256d control =
            _mm256_mul_pd(_mm256_div_pd(_mm256_sub_pd(one, vw), _mm256_sub_pd(one, vh)), _mm256_sub_pd(vy, vg0));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_add_pd(plug_in, treated), control));
    }
    for (; i < n; ++i) {
        const double plug_in = g1[i] - g0[i];
        const double treated = (w[i] / h[i]) * (y[i] - g1[i]);
        const double control = ((1.0 - w[i]) / (1.0 - h[i])) * (y[i] - g0[i]);
        out[i] = (plug_in + treated) - control;
    }
}

void ipw_terms(const double* e, const double* w, const double* y, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ve = _mm256_loadu_pd(e + i);
        const __m256d vw = _mm256_loadu_pd(w + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d treated = _mm256_div_pd(_mm256_mul_pd(vw, vy), ve);
        const __m256d control = _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(one, vw), vy), _mm256_sub_pd(one, ve));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(treated, control));
    }
    for (; i < n; ++i) out[i] = (w[i] * y[i]) / e[i] - ((1.0 - w[i]) * y[i]) / (1.0 - e[i]);
}

double lane_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t k = 0; i + k < n; ++k) lane[k] += x[i + k];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double lane_sum_squared_deviation(const double* x, double center, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t k = 0; i + k < n; ++k) {
        const double d = x[i + k] - center;
        lane[k] += d * d;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double lane_pair_product_sum(const double* values, const std::uint32_t* first, const std::uint32_t* second,
                             std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i fi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(first + k));
        const __m128i si = _mm_loadu_si128(reinterpret_cast<const __m128i*>(second + k));
        const __m256d a = _mm256_i32gather_pd(values, fi, 8);
        const __m256d b = _mm256_i32gather_pd(values, si, 8);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(a, b));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t j = 0; k + j < n; ++j) lane[j] += values[first[k + j]] * values[second[k + j]];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{aipw_scores, ipw_terms, lane_sum, lane_sum_squared_deviation, lane_pair_product_sum};
    return table;
}

}  // namespace netaipw::kernels
