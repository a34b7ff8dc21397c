#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops of the estimators. Each kernel has a scalar
// reference implementation and an AVX2 variant picked at runtime. Both
// variants perform the same IEEE operations in the same order, so results
// are bit-identical whichever one runs:
//   - elementwise kernels use no fused multiply-add;
//   - reductions accumulate into four lanes (lane k takes indices = k mod 4)
//     and combine them as (l0 + l1) + (l2 + l3).

namespace netaipw::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

bool isa_supported(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();

/// Variant currently in use. Starts at detected_isa() unless the
/// NETAIPW_ISA environment variable is "scalar".
Isa active_isa();

/// Switches variants process-wide. Throws InvalidParameter if unsupported.
void select_isa(Isa isa);

/// out = g1 - g0 + w / h * (y - g1) - (1 - w) / (1 - h) * (y - g0)
void aipw_scores(std::span<const double> g1, std::span<const double> g0, std::span<const double> h,
                 std::span<const double> w, std::span<const double> y, std::span<double> out);

/// out = w * y / e - (1 - w) * y / (1 - e)
void ipw_terms(std::span<const double> e, std::span<const double> w, std::span<const double> y,
               std::span<double> out);

double lane_sum(std::span<const double> x);

/// Sum of (x - center)^2.
double lane_sum_squared_deviation(std::span<const double> x, double center);

/// Sum over k of values[first[k]] * values[second[k]].
double lane_pair_product_sum(std::span<const double> values, std::span<const std::uint32_t> first,
                             std::span<const std::uint32_t> second);

}  // namespace netaipw::kernels
