#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace lca {

// splitmix64 finalizer; also used as the hash primitive everywhere a
// deterministic hash is needed (seed derivation, verdict noise).
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent stream seed from a base seed and up to three stream tags.
// Every consumer of randomness owns a stream derived this way, so rollouts
// can run in parallel without sharing generator state.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(base ^ 0x5851f42d4c957f2dull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Deterministic PRNG (splitmix64 core). Output sequence depends only on the
// seed, never on platform or standard-library internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + next_double() * (hi - lo);
    }

    // uniform integer in [0, n); n must be > 0
    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Box-Muller; consumes two uniforms per call, no cached spare
    double gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Hash a tuple of values to a uniform double in [0,1). Used for the
// deterministic Bernoulli decisions in the caption oracle.
inline double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                        std::uint64_t d = 0) {
    std::uint64_t h = derive_seed(a, b, c, d);
    return static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
}

}  // namespace lca
