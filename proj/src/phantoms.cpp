#include "phantoms.hpp"

#include <cmath>
#include <stdexcept>

#include "denoiser.hpp"
#include "rng.hpp"

namespace cred {

namespace {

// Piecewise-constant scene: rectangles, a disc and a diagonal split over a
// flat background. Sharp edges make it a natural deblurring target.
Image phantom_edges(int n) {
    Image img(n, n, 40.0);
    const double c = (n - 1) / 2.0;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (x + y > 3 * n / 2) img.at(x, y) = 90.0;
            if (x >= n / 8 && x < n / 2 && y >= n / 8 && y < 3 * n / 8) img.at(x, y) = 210.0;
            const double dx = x - 0.65 * (n - 1), dy = y - 0.62 * (n - 1);
            if (dx * dx + dy * dy < 0.04 * n * n) img.at(x, y) = 160.0;
            const double ex = x - c, ey = y - 0.8 * (n - 1);
            if (ex * ex / (0.09 * n * n) + ey * ey / (0.01 * n * n) < 1.0) img.at(x, y) = 230.0;
        }
    }
    return img;
}

Image phantom_blobs(int n) {
    Image img(n, n, 30.0);
    struct Blob {
        double cx, cy, s, amp;
    };
    const Blob blobs[] = {{0.3, 0.3, 0.10, 180.0},
                          {0.7, 0.35, 0.07, 140.0},
                          {0.5, 0.7, 0.14, 120.0},
                          {0.2, 0.75, 0.05, 200.0}};
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double v = img.at(x, y);
            for (const Blob& b : blobs) {
                const double dx = x / double(n - 1) - b.cx;
                const double dy = y / double(n - 1) - b.cy;
                v += b.amp * std::exp(-0.5 * (dx * dx + dy * dy) / (b.s * b.s));
            }
            img.at(x, y) = std::min(v, 255.0);
        }
    }
    return img;
}

// Vertical bars of increasing spatial frequency plus a horizontal step.
Image phantom_bars(int n) {
    Image img(n, n, 0.0);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double fx = x / double(n);
            const double phase = 2.0 * 3.14159265358979323846 * (4.0 + 12.0 * fx) * fx;
            double v = std::cos(phase) > 0.0 ? 190.0 : 60.0;
            if (y > 3 * n / 4) v = 0.5 * v + 70.0;
            img.at(x, y) = v;
        }
    }
    return img;
}

Image phantom_checker(int n) {
    Image img(n, n);
    const int block = std::max(2, n / 8);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const bool on = ((x / block) + (y / block)) % 2 == 0;
            img.at(x, y) = on ? 190.0 : 60.0;
        }
    }
    return img;
}

// Smooth pseudo-random field: fixed-seed white noise pushed through a wide
// Gaussian, rescaled to [20, 235].
Image phantom_texture(int n) {
    Image noise = gaussian_noise(n, n, 1.0, 0xC0FFEEULL);
    DenoiserSpec smooth{DenoiserKind::gaussian_smooth, std::max(1.0, n / 24.0)};
    Image field = denoise(smooth, noise);
    double lo = field[0], hi = field[0];
    for (std::size_t i = 0; i < field.size(); ++i) {
        lo = std::min(lo, field[i]);
        hi = std::max(hi, field[i]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        field[i] = 20.0 + 215.0 * (field[i] - lo) / span;
    }
    return field;
}

}  // namespace

Image make_phantom(const std::string& name, int size) {
    if (size < 8) throw std::invalid_argument("make_phantom: size must be >= 8");
    if (name == "edges") return phantom_edges(size);
    if (name == "blobs") return phantom_blobs(size);
    if (name == "bars") return phantom_bars(size);
    if (name == "checker") return phantom_checker(size);
    if (name == "texture") return phantom_texture(size);
    throw std::invalid_argument("make_phantom: unknown phantom '" + name + "'");
}

std::vector<std::string> phantom_names() {
    return {"edges", "blobs", "bars", "checker", "texture"};
}

}  // namespace cred
