#pragma once

// Deterministic random streams.  The engine is std::mt19937_64 (bit-exact by
// the standard) but every distribution is hand-rolled on top of raw 64-bit
// draws, because the std::*_distribution adaptors are allowed to differ
// between standard library implementations.  All randomness in the project
// flows from one root seed through derive_seed(root, a, b, ...).

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace predrec {

// splitmix64 finalizer; used both as a mixer and for seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derive a child seed from a root seed and one or more stream indices, e.g.
// derive_seed(root, permutation_index) or derive_seed(root, n_index, rep).
inline std::uint64_t derive_seed(std::uint64_t root) { return mix64(root); }

template <typename... Rest>
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index, Rest... rest) {
    return derive_seed(mix64(root ^ mix64(index + 0x632be59bd9b4e019ull)), rest...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via 128-bit multiply (Lemire).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
        while (true) {
            __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
            if (static_cast<std::uint64_t>(m) >= threshold)
                return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Standard normal via Box-Muller (second value cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Binomial(m, p) as m Bernoulli trials; m stays small in this project.
    long binomial(long m, double p) {
        long hits = 0;
        for (long i = 0; i < m; ++i)
            if (uniform() < p) ++hits;
        return hits;
    }

    // Poisson via Knuth's product method; fine for the bounded rates used here.
    long poisson(double rate) {
        const double limit = std::exp(-rate);
        long k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    // Index draw from unnormalized nonnegative weights.
    std::size_t sample_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace predrec
