#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "postsolve/signal.hpp"

namespace postsolve {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seeded random source with an explicit Box-Muller normal sampler, so
// replays are bit-identical regardless of the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double uniform() {
        // in (0, 1]
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Signal normal_signal(std::size_t n) {
        Signal out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
        return out;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// One independent substream per pipeline stage, all derived from the single
// run seed. Toggling one stage never shifts the draws of another.
struct RngSet {
    Rng mask;
    Rng measure;
    Rng diffusion;
    Rng langevin;

    static RngSet from_seed(std::uint64_t seed) {
        auto sub = [seed](std::string_view tag) { return Rng(splitmix64(seed ^ fnv1a64(tag))); };
        return RngSet{sub("mask"), sub("measure"), sub("diffusion"), sub("langevin")};
    }
};

}  // namespace postsolve
