#pragma once

#include <cstdint>

namespace minisym {

// Deterministic 64-bit generator (splitmix64). The standard <random>
// distributions are implementation-defined, which would break byte-identical
// artifacts across toolchains, so every randomized component uses this.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        // Rejection sampling keeps the distribution exactly uniform.
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold)
                return r % n;
        }
    }

    bool coin() { return (next() & 1ull) != 0; }

    // Uniform in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

private:
    uint64_t state_;
};

} // namespace minisym
