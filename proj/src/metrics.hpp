#pragma once

#include "image.hpp"

namespace cred {

struct MetricsRecord {
    double psnr = 0.0;
    double ssim = 0.0;
    double sigma_xstar = 0.0;
    double re_sigma = 0.0;
};

// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const Image& x, const Image& ref, double peak = 255.0);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range 255, valid-region averaging. Requires min dimension >= 11.
double ssim(const Image& x, const Image& ref);

// |est - true_sigma| / true_sigma, true_sigma > 0.
double relative_error(double true_sigma, double est);

}  // namespace cred
