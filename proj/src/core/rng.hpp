#pragma once

// Deterministic PRNG for every stochastic ingredient in the lab (random test
// fields, multistart ascent, sweep perturbations).  splitmix64 is used both
// as the generator and as the stream-splitting hash, so a (seed, stream)
// pair always yields the same draws regardless of platform or thread count.

#include <cstdint>
#include <cmath>

#include "grid.hpp"

namespace conewave {

inline constexpr const char* kPrngAlgorithm = "splitmix64-boxmuller";

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]; never returns 0 so log() below is safe.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller.  The spare draw is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Decorrelated child seed for an independent stream.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x6c62272e07bb0142ULL + stream * 0x100000001b3ULL));
    return g.next();
}

// iid standard-normal field (one value per interior node).
inline Field gaussian_field(const GridPtr& grid, SplitMix64& rng) {
    Field f(grid);
    for (double& x : f.v) x = rng.gaussian();
    return f;
}

} // namespace conewave
