#include "dpsql/rng.hpp"

#include <cmath>

namespace dpsql {

uint64_t hash_bytes(const void* data, size_t len, uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

uint64_t hash_string(const std::string& s, uint64_t seed) {
    return hash_bytes(s.data(), s.size(), seed);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw Error("Rng::below(0)");
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double laplace_sample(double scale, Rng& rng) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidScale("laplace scale must be positive and finite");
    }
    double u;
    do {
        u = rng.uniform01() - 0.5;  // [-0.5, 0.5)
    } while (u == -0.5);
    double sign = u < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log(1.0 - 2.0 * std::fabs(u));
}

} // namespace dpsql
