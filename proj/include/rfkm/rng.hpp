#pragma once

#include <cstdint>

namespace rfkm {

// Seed for a reproducible run. The same seed over the same inputs must
// give a bit-identical trajectory on every platform.
struct RngSeed {
    std::uint64_t value = 0;
};

// SplitMix64 finalizer (Steele, Lea & Flood 2014). Stateless mix used for
// seed derivation and as the output function of the generator below.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// SplitMix64 generator. Chosen over std::mt19937_64 because the whole
// algorithm fits in a dozen lines and can be re-implemented verbatim in
// any language, keeping seeded experiments portable.
class SplitMix64 {
public:
    explicit SplitMix64(RngSeed seed) : state_(seed.value) {}
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix64(state_);
    }

    // Unbiased integer in [0, bound) via rejection sampling. bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Seed for restart `index` of stream `stream` (one stream per method).
// Pure function of its arguments, so adding a stream or extending the
// restart count never perturbs the seeds of existing runs.
inline RngSeed derive_seed(RngSeed base, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = base.value;
    h = mix64(h + 0x9e3779b97f4a7c15ull * (stream + 1));
    h = mix64(h + 0x9e3779b97f4a7c15ull * (index + 1));
    return RngSeed{h};
}

}  // namespace rfkm
