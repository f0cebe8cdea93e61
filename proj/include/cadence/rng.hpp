#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cadence {

// 64-bit finalizer used for seed derivation and per-cell hashing.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Uniform value in [0,1) derived from a hash key.
inline double hash01(uint64_t key) {
    return double(splitmix64(key) >> 11) * 0x1.0p-53;
}

// Deterministic random source. Distributions are coded explicitly so a
// seed produces the same stream on every standard library.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n). n must be positive.
    uint64_t below(uint64_t n) {
        return uint64_t((unsigned __int128)next_u64() * n >> 64);
    }

    // Integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + int64_t(below(uint64_t(hi - lo + 1)));
    }

    // Marsaglia polar method with one cached value.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return mean + sd * u * f;
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cadence
