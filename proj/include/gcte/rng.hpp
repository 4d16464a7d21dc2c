#pragma once

#include <cmath>
#include <cstdint>

namespace gcte {

// splitmix64 finalizer (Steele/Lea/Flood). Bijective on 64-bit words with
// good avalanche, which is all we need to turn counters into draws.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so simulations are reproducible bit for bit
// regardless of evaluation order or thread count. Parallel workers take
// disjoint streams instead of sharing sequential state.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(splitmix64(seed ^ 0x8f2d3a4b5c6e7f01ULL), stream)) {}

    // New generator for a derived stream, independent of this one.
    CounterRng substream(std::uint64_t stream) const {
        CounterRng r(0, 0);
        r.key_ = mix(key_, stream);
        return r;
    }

    std::uint64_t bits(std::uint64_t counter) const { return mix(key_, counter); }

    // Uniform on the open interval (0,1); never returns 0 or 1, so it is
    // always safe inside a logarithm.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Consumes counters 2c and 2c+1, so a
    // caller indexing normals 0,1,2,... never overlaps another stream.
    double normal(std::uint64_t counter) const {
        double u1 = uniform(2 * counter);
        double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, bound) via the 128-bit multiply trick.
    std::uint64_t uniform_below(std::uint64_t counter, std::uint64_t bound) const {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    }

    std::uint64_t key_;
};

} // namespace gcte
