#pragma once

#include <cstdint>

namespace arena {

// SplitMix64. A single 64-bit word of state, three lines of mixing.
// Chosen so that runs are bit-reproducible across platforms and easy to
// re-implement in any language for cross-checking.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, n): rejection below the largest multiple of n,
    // then modulo.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
        std::uint64_t r = next();
        if (rem != 0) {
            const std::uint64_t bound = 0 - rem;  // 2^64 - (2^64 mod n)
            while (r >= bound) r = next();
        }
        return r % n;
    }

    // [0, 1) with the top 53 bits.
    double uniform_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // One SplitMix64 step from state x, used as a 64-bit mixer.
    static std::uint64_t mix(std::uint64_t x) { return Rng(x).next(); }

    // Named substreams of one experiment seed. Keeping the streams separate
    // means agent-internal draws never shift environment noise.
    enum Stream : std::uint64_t { kEnv = 0, kAgent = 1, kFallback = 2 };

    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix(mix(seed) + stream));
    }

private:
    std::uint64_t state_;
};

}  // namespace arena
