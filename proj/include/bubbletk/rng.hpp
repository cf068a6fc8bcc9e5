#pragma once

#include <cmath>
#include <cstdint>

namespace bubbletk {

// splitmix64 step. Used both as the core generator and to derive independent
// per-replication seeds so that results never depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    return splitmix64(s);
}

// Small deterministic PRNG. The stream is fully pinned by this header (no
// standard-library distributions), so seeded output is identical across
// platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so trivially related seeds decorrelate.
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; draws are cached in pairs.
    double gaussian() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        have_cache_ = true;
        return r * std::cos(a);
    }

    // +1 or -1 with equal probability.
    double rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

private:
    std::uint64_t state_;
    double cache_ = 0.0;
    bool have_cache_ = false;
};

}  // namespace bubbletk
