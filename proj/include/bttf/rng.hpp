#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "bttf/dense.hpp"

namespace bttf {

/// Deterministic random source. All draws are derived from the raw
/// mt19937_64 word stream so that results are bit-identical across
/// platforms and standard library implementations (std::*_distribution
/// is implementation-defined and must not be used for anything that
/// feeds model parameters or batch order).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t word() { return engine_(); }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(word() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform index in [0, n). Modulo bias is negligible for the pool
    /// sizes used here and keeps the draw count per call fixed.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(word() % n); }

    /// Standard normal via Box-Muller on the raw word stream.
    double gaussian() {
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<Index> permutation(Index n) {
        std::vector<Index> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), Index{0});
        for (Index i = n - 1; i > 0; --i) {
            const auto j = below(static_cast<std::size_t>(i) + 1);
            std::swap(p[static_cast<std::size_t>(i)], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace bttf
