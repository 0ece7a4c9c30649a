#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace convopt {

// 64-bit FNV-1a. Used to derive per-name rng streams and config hashes so
// results do not depend on std::hash, which varies across standard libraries.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Mixes a parent seed with stream keys. Child streams derived with distinct
// keys are statistically independent, so parallel schedules cannot change
// results as long as every worker derives its stream from its own key.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t k0, std::uint64_t k1 = 0,
                                 std::uint64_t k2 = 0) {
    std::uint64_t s = splitmix64(parent ^ 0x6a09e667f3bcc909ull);
    s = splitmix64(s ^ splitmix64(k0));
    s = splitmix64(s ^ splitmix64(k1 + 0x3c6ef372fe94f82bull));
    s = splitmix64(s ^ splitmix64(k2 + 0xa54ff53a5f1d36f1ull));
    return s;
}

// Deterministic random stream. All draws are implemented directly on top of
// mt19937_64 output rather than std::<distribution> types, whose sequences
// are implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection-free modulo is biased for large n;
    // n here is always tiny relative to 2^64, so the bias is < 1e-15.
    std::uint64_t uniform_int(std::uint64_t n) { return engine_() % n; }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one fresh pair per call keeps the stream position predictable.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Samples an index from explicit probabilities (assumed to sum to ~1).
    std::size_t categorical(std::span<const double> probs) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

    // Children are keyed off the construction seed, not the current stream
    // position, so derivation order and parallel scheduling cannot matter.
    Rng child(std::uint64_t k0, std::uint64_t k1 = 0, std::uint64_t k2 = 0) const {
        return Rng(derive_seed(seed_, k0, k1, k2));
    }

    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace convopt
