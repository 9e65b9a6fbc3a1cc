#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace netrepair {

// Derives an independent stream seed from a base seed and a tag, so the
// sampler, the swarm, synthetic generation etc. never share a stream even
// when the user passes a single --seed. Splitmix64 over seed xor tag-hash.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a over the tag
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = base ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Thin wrapper around mt19937_64 with hand-rolled conversions. The standard
// distribution objects are not bit-reproducible across library versions, so
// everything that must be deterministic goes through these.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1) using the top 53 bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo,hi]; degenerate intervals (lo == hi) return lo.
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Integer in [0, n); n must be positive.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // Standard normal via Box-Muller, one value per call (the spare is kept).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace netrepair
