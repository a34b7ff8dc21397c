#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace netaipw {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a path of integer tags.
/// Distinct paths give statistically independent streams; the scheme is a
/// counter-based split, so adding a sibling stream never shifts another.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(master);
    for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
    return s;
}

/// Thin wrapper over mt19937_64 with distribution code that does not depend
/// on the standard library's (implementation-defined) distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace netaipw
