#include "blur_operator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "fft.hpp"

namespace cred {

namespace {

std::vector<double> gaussian_kernel_1d(double sigma, int radius) {
    std::vector<double> k(2 * radius + 1, 1.0);
    if (radius > 0) {
        double sum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            k[i + radius] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
            sum += k[i + radius];
        }
        for (double& v : k) v /= sum;
    }
    return k;
}

}  // namespace

BlurOperator BlurOperator::build(double sigma_a, int width, int height) {
    if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) {
        throw std::invalid_argument("BlurOperator: sigma_a must be finite and >= 0");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("BlurOperator: dimensions must be positive");
    }
    const int radius = sigma_a == 0.0 ? 0 : static_cast<int>(std::ceil(4.0 * sigma_a));
    if (2 * radius + 1 > std::min(width, height)) {
        throw std::invalid_argument("BlurOperator: kernel size " + std::to_string(2 * radius + 1) +
                                    " exceeds image extent " +
                                    std::to_string(std::min(width, height)));
    }

    const std::vector<double> k1 = gaussian_kernel_1d(sigma_a, radius);

    // Periodic embedding: kernel center at (0,0), tails wrapped.
    std::vector<double> embedded(static_cast<std::size_t>(width) * height, 0.0);
    for (int dy = -radius; dy <= radius; ++dy) {
        const int y = (dy % height + height) % height;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = (dx % width + width) % width;
            embedded[static_cast<std::size_t>(y) * width + x] += k1[dy + radius] * k1[dx + radius];
        }
    }

    BlurOperator op;
    op.width_ = width;
    op.height_ = height;
    op.radius_ = radius;
    op.sigma_a_ = sigma_a;
    Fft2D::shared(width, height).forward(embedded.data(), op.transfer_);
    op.transfer_abs2_.resize(op.transfer_.size());
    for (std::size_t i = 0; i < op.transfer_.size(); ++i) {
        op.transfer_abs2_[i] = std::norm(op.transfer_[i]);
    }
    return op;
}

template <typename SpectralMap>
Image BlurOperator::transform(const Image& x, SpectralMap&& map) const {
    if (x.width() != width_ || x.height() != height_) {
        throw ShapeError("BlurOperator: image is " + std::to_string(x.width()) + "x" +
                         std::to_string(x.height()) + ", operator is " + std::to_string(width_) +
                         "x" + std::to_string(height_));
    }
    Fft2D& fft = Fft2D::shared(width_, height_);
    std::vector<std::complex<double>> spec;
    fft.forward(x.data(), spec);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = map(spec[i], i);
    Image out(width_, height_);
    // Imaginary residue of the inverse transform is roundoff-level for these
    // real-spectrum maps and is discarded.
    fft.inverse_real(spec, out.data());
    return out;
}

Image BlurOperator::apply(const Image& x) const {
    return transform(x, [this](std::complex<double> v, std::size_t i) { return transfer_[i] * v; });
}

Image BlurOperator::apply_adjoint(const Image& y) const {
    return transform(
        y, [this](std::complex<double> v, std::size_t i) { return std::conj(transfer_[i]) * v; });
}

Image BlurOperator::solve_regularized_normal(const Image& rhs, double c) const {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("solve_regularized_normal: c must be finite and >= 0");
    }
    return transform(rhs, [this, c](std::complex<double> v, std::size_t i) {
        return v / (c * transfer_abs2_[i] + 1.0);
    });
}

}  // namespace cred
