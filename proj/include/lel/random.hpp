#pragma once
// random.hpp - seeded streams and seed derivation.
//
// Bit-for-bit reproducibility depends only on std::mt19937_64 (whose output
// sequence is fixed by the standard) and on the conversions below; no
// implementation-defined std:: distributions are used.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lel/finite_prob.hpp"

namespace lel {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014 constants).
inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of trial `index` under `master`: the (index+1)-th output of a SplitMix64
/// stream whose state starts at splitmix64(master).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) + index * 0x9E3779B97F4A7C15ULL);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard Gumbel variate.
    double gumbel() { return -std::log(-std::log(uniform_open())); }

    /// Inverse-CDF draw from p. Consumes exactly one uniform.
    Symbol sample(const Pmf& p) {
        const double u = uniform();
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t a = 0; a < p.size(); ++a) {
            if (p[a] <= 0.0) continue;
            last_positive = a;
            cum += p[a];
            if (u < cum) return static_cast<Symbol>(a);
        }
        // cumulative sum rounded below 1
        return static_cast<Symbol>(last_positive);
    }

    Sequence sample_sequence(const Pmf& p, std::size_t n) {
        Sequence s(n);
        for (auto& v : s) v = sample(p);
        return s;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace lel
