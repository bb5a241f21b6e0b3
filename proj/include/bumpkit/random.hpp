#pragma once

#include "bumpkit/grid.hpp"

#include <cstdint>

namespace bumpkit {

// splitmix64; reproducible across platforms, unlike the std distributions
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    Index below(Index n) { return static_cast<Index>(next() % static_cast<std::uint64_t>(n)); }
    double normal();
    // independent stream derived from this one
    SplitMix64 split() { return SplitMix64(next()); }

private:
    std::uint64_t state_;
};

// exp of a multiscale Gaussian field: piecewise constant on dyadic blocks at every scale
StepFn random_lognormal(const Grid& g, SplitMix64& rng, double sigma = 1.0);
// continuous piecewise linear with `knots` random knots, values in [lo, hi]
StepFn random_piecewise_linear(const Grid& g, SplitMix64& rng, int knots, double lo, double hi);
// i.i.d. uniform cell values in [lo, hi]
StepFn random_uniform(const Grid& g, SplitMix64& rng, double lo, double hi);

} // namespace bumpkit
