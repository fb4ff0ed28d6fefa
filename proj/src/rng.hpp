#pragma once

#include <cstdint>
#include <random>

#include "image.hpp"

namespace cred {

// Deterministic standard-normal stream: mt19937_64 (bit-exact per the C++
// standard) fed through an explicit Box-Muller transform, so the sequence does
// not depend on the standard library's distribution implementation.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

    double next();
    // Uniform in (0,1].
    double next_uniform();

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// splitmix64-style mixing for deriving independent sub-streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Image of i.i.d. N(0, sigma^2) samples in row-major order.
Image gaussian_noise(int width, int height, double sigma, std::uint64_t seed);

}  // namespace cred
