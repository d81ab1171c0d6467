// Seeded randomness and hashing. Every mechanism draw flows through an
// injected Rng; there is no ambient entropy anywhere in the engine.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "dpsql/error.hpp"

namespace dpsql {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combine hashes/seeds; order-sensitive.
inline uint64_t mix64(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// FNV-1a over bytes, finished with a splitmix round.
uint64_t hash_bytes(const void* data, size_t len, uint64_t seed = 0);
uint64_t hash_string(const std::string& s, uint64_t seed = 0);

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits; avoids the unspecified
    // per-implementation behaviour of std::uniform_real_distribution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n);

private:
    std::mt19937_64 eng_;
};

// One draw from Laplace(0, scale) via inverse CDF on a uniform draw.
double laplace_sample(double scale, Rng& rng);

} // namespace dpsql
