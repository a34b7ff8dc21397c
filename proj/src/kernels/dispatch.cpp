#include "netaipw/kernels.hpp"

#include "kernels_impl.hpp"
#include "netaipw/error.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

namespace netaipw::kernels {

namespace {

const KernelTable& table_for(Isa isa) {
#if defined(NETAIPW_HAVE_AVX2)
    if (isa == Isa::Avx2) return avx2_table();
#endif
    (void)isa;
    return scalar_table();
}

Isa initial_isa() {
    const char* env = std::getenv("NETAIPW_ISA");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return detected_isa();
}

std::atomic<const KernelTable*>& active_table() {
    static std::atomic<const KernelTable*> table{&table_for(initial_isa())};
    return table;
}

std::atomic<Isa>& active_tag() {
    static std::atomic<Isa> tag{initial_isa()};
    return tag;
}

const KernelTable& current() { return *active_table().load(std::memory_order_relaxed); }

void check_same_size(std::size_t expected, std::size_t actual) {
    if (expected != actual) {
        throw Error(ErrorKind::DimensionMismatch,
                    "kernel inputs of length " + std::to_string(expected) + " and " + std::to_string(actual));
    }
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(NETAIPW_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detected_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active_tag().load(); }

void select_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw Error(ErrorKind::InvalidParameter, std::string("instruction set not available: ") + std::string(to_string(isa)));
    }
    active_table().store(&table_for(isa));
    active_tag().store(isa);
}

void aipw_scores(std::span<const double> g1, std::span<const double> g0, std::span<const double> h,
                 std::span<const double> w, std::span<const double> y, std::span<double> out) {
    const std::size_t n = out.size();
    for (std::size_t len : {g1.size(), g0.size(), h.size(), w.size(), y.size()}) check_same_size(n, len);
    current().aipw_scores(g1.data(), g0.data(), h.data(), w.data(), y.data(), out.data(), n);
}

void ipw_terms(std::span<const double> e, std::span<const double> w, std::span<const double> y,
               std::span<double> out) {
    const std::size_t n = out.size();
    for (std::size_t len : {e.size(), w.size(), y.size()}) check_same_size(n, len);
    current().ipw_terms(e.data(), w.data(), y.data(), out.data(), n);
}

double lane_sum(std::span<const double> x) { return current().lane_sum(x.data(), x.size()); }

double lane_sum_squared_deviation(std::span<const double> x, double center) {
    return current().lane_sum_squared_deviation(x.data(), center, x.size());
}

double lane_pair_product_sum(std::span<const double> values, std::span<const std::uint32_t> first,
                             std::span<const std::uint32_t> second) {
    check_same_size(first.size(), second.size());
    for (std::size_t k = 0; k < first.size(); ++k) {
        if (first[k] >= values.size() || second[k] >= values.size()) {
            throw Error(ErrorKind::IndexOutOfRange, "pair index outside value array");
        }
    }
    return current().lane_pair_product_sum(values.data(), first.data(), second.data(), first.size());
}

}  // namespace netaipw::kernels
