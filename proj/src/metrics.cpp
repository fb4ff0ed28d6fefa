#include "metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cred {

double psnr(const Image& x, const Image& ref, double peak) {
    require_same_shape(x, ref, "psnr");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - ref[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kSsimWindow = 11;

std::array<double, kSsimWindow * kSsimWindow> ssim_window_weights() {
    std::array<double, kSsimWindow * kSsimWindow> w{};
    const double sigma = 1.5;
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            const double v = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
            w[(dy + half) * kSsimWindow + (dx + half)] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Image& x, const Image& ref) {
    require_same_shape(x, ref, "ssim");
    const int w = x.width(), h = x.height();
    if (w < kSsimWindow || h < kSsimWindow) {
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");
    }
    static const auto weights = ssim_window_weights();
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double acc = 0.0;
    std::size_t count = 0;
    for (int oy = 0; oy + kSsimWindow <= h; ++oy) {
        for (int ox = 0; ox + kSsimWindow <= w; ++ox) {
            double mu_x = 0.0, mu_y = 0.0;
            for (int dy = 0; dy < kSsimWindow; ++dy) {
                for (int dx = 0; dx < kSsimWindow; ++dx) {
                    const double wgt = weights[dy * kSsimWindow + dx];
                    mu_x += wgt * x.at(ox + dx, oy + dy);
                    mu_y += wgt * ref.at(ox + dx, oy + dy);
                }
            }
            double var_x = 0.0, var_y = 0.0, cov = 0.0;
            for (int dy = 0; dy < kSsimWindow; ++dy) {
                for (int dx = 0; dx < kSsimWindow; ++dx) {
                    const double wgt = weights[dy * kSsimWindow + dx];
                    const double ax = x.at(ox + dx, oy + dy) - mu_x;
                    const double ay = ref.at(ox + dx, oy + dy) - mu_y;
                    var_x += wgt * (ax * ax);
                    var_y += wgt * (ay * ay);
                    // ax*ay binds first so swapping the arguments rounds identically
                    cov += wgt * (ax * ay);
                }
            }
            const double num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2);
            const double den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

double relative_error(double true_sigma, double est) {
    if (!(true_sigma > 0.0)) {
        throw std::invalid_argument("relative_error: true_sigma must be > 0");
    }
    return std::abs(est - true_sigma) / true_sigma;
}

}  // namespace cred
