#include "rng.hpp"

#include <cmath>
#include <numbers>

namespace cred {

double GaussianSampler::next_uniform() {
    // 53 random bits mapped to (0,1]; never returns 0 so log() is safe.
    const std::uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double GaussianSampler::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Image gaussian_noise(int width, int height, double sigma, std::uint64_t seed) {
    GaussianSampler sampler(seed);
    Image out(width, height);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma * sampler.next();
    return out;
}

}  // namespace cred
