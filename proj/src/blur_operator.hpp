#pragma once

#include <complex>
#include <vector>

#include "image.hpp"

namespace cred {

// Gaussian blur with periodic boundary conditions, diagonalized in the
// frequency domain. Immutable after build(); apply/adjoint/solve calls are
// safe to run concurrently from different threads.
class BlurOperator {
public:
    // Truncated separable Gaussian kernel, radius ceil(4*sigma_a), renormalized
    // to unit sum, embedded with periodic wrap at the origin. sigma_a == 0
    // degenerates to the identity (delta kernel).
    static BlurOperator build(double sigma_a, int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    double sigma_a() const { return sigma_a_; }
    int kernel_radius() const { return radius_; }

    // Frequency-domain transfer function of the embedded PSF, row-major
    // height x width grid (DC at index 0).
    const std::vector<std::complex<double>>& transfer() const { return transfer_; }
    const std::vector<double>& transfer_abs2() const { return transfer_abs2_; }

    // Circular convolution with the PSF.
    Image apply(const Image& x) const;
    // Adjoint of apply; equals apply for the symmetric Gaussian PSF.
    Image apply_adjoint(const Image& y) const;
    // Exact solve of (c * A^T A + I) x = rhs, c >= 0.
    Image solve_regularized_normal(const Image& rhs, double c) const;

private:
    BlurOperator() = default;

    template <typename SpectralMap>
    Image transform(const Image& x, SpectralMap&& map) const;

    int width_ = 0;
    int height_ = 0;
    int radius_ = 0;
    double sigma_a_ = 0.0;
    std::vector<std::complex<double>> transfer_;
    std::vector<double> transfer_abs2_;
};

}  // namespace cred
