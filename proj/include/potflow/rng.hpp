#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace potflow {

// Deterministic random source. All randomized code in the library draws from
// this wrapper so that a given seed reproduces bit-identical results on every
// platform; std::mt19937_64 output is specified exactly, and the helpers below
// avoid the distribution classes (whose algorithms are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    double exponential() { return -std::log1p(-uniform()); }

    // Uniform integer in [lo, hi] inclusive. Modulo bias is irrelevant for the
    // small ranges used here and keeps the draw count per call fixed.
    std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
        return lo + eng_() % (hi - lo + 1);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace potflow
