#pragma once

#include "blur_operator.hpp"
#include "image.hpp"

namespace cred {

struct NoiseEstimate {
    double sigma = 0.0;
};

// Fast AWGN standard-deviation estimate from the 3x3 Laplacian-difference
// mask, valid-region convolution (no padding). Requires width, height >= 3.
NoiseEstimate estimate_sigma(const Image& b);

// Discrepancy-based estimate ||A x - b||_2 / sqrt(n - 1).
double sigma_discrepancy(const BlurOperator& op, const Image& x, const Image& b);

}  // namespace cred
