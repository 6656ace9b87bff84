#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace sca {

// Deterministic 64-bit generator (splitmix64). std::mt19937_64 would also be
// reproducible, but the distributions on top of it are not portable across
// standard libraries, and pinned golden values must not depend on the stdlib.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Multiply-shift reduction; bias is < 2^-64 per draw.
    uint64_t uniform_index(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform in [lo, hi). 53-bit mantissa resolution.
    double uniform_real(double lo, double hi) {
        const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + unit * (hi - lo);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

inline uint64_t hash_mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    return h ^ (h >> 33);
}

inline uint64_t hash_mix(uint64_t h, std::string_view s) {
    uint64_t acc = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        acc = (acc ^ static_cast<uint8_t>(c)) * 0x100000001b3ULL;
    }
    return hash_mix(h, acc);
}

// Derives a per-item seed from a master seed and a label path, so that pool
// generation is schedule-independent under parallelization.
template <typename... Parts>
uint64_t derive_seed(uint64_t master, Parts&&... parts) {
    uint64_t h = hash_mix(0x5ca5ca5ca5ca5ca5ULL, master);
    ((h = hash_mix(h, parts)), ...);
    return h;
}

}  // namespace sca
