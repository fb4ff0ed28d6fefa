#include "noise_estimation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"

namespace cred {

NoiseEstimate estimate_sigma(const Image& b) {
    const int w = b.width(), h = b.height();
    if (w < 3 || h < 3) {
        throw std::invalid_argument("estimate_sigma: image must be at least 3x3");
    }
    // Mask [[1,-2,1],[-2,4,-2],[1,-2,1]]; annihilates affine intensity ramps,
    // so only the noise contributes in expectation.
    double acc = 0.0;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double v = b.at(x - 1, y - 1) - 2.0 * b.at(x, y - 1) + b.at(x + 1, y - 1) -
                             2.0 * b.at(x - 1, y) + 4.0 * b.at(x, y) - 2.0 * b.at(x + 1, y) +
                             b.at(x - 1, y + 1) - 2.0 * b.at(x, y + 1) + b.at(x + 1, y + 1);
            acc += std::abs(v);
        }
    }
    const double count = static_cast<double>(w - 2) * static_cast<double>(h - 2);
    NoiseEstimate est;
    est.sigma = std::sqrt(std::numbers::pi / 2.0) * acc / (6.0 * count);
    return est;
}

double sigma_discrepancy(const BlurOperator& op, const Image& x, const Image& b) {
    require_same_shape(x, b, "sigma_discrepancy");
    if (x.size() < 2) throw std::invalid_argument("sigma_discrepancy: need n > 1 pixels");
    const Image residual = sub(op.apply(x), b);
    return norm2(residual) / std::sqrt(static_cast<double>(x.size()) - 1.0);
}

}  // namespace cred
