#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace cred {

namespace {

// FFTW plan creation/destruction is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Fft2D::Fft2D(int width, int height)
    : width_(width), height_(height), n_(static_cast<std::size_t>(width) * height) {
    if (width < 1 || height < 1) throw std::invalid_argument("Fft2D: dimensions must be positive");

    cbuf_in_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_));
    cbuf_out_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_));
    if (!cbuf_in_ || !cbuf_out_) throw std::bad_alloc();

    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps planning deterministic run-to-run for a given build.
    plan_fwd_ = fftw_plan_dft_2d(height_, width_, reinterpret_cast<fftw_complex*>(cbuf_in_),
                                 reinterpret_cast<fftw_complex*>(cbuf_out_), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_2d(height_, width_, reinterpret_cast<fftw_complex*>(cbuf_in_),
                                 reinterpret_cast<fftw_complex*>(cbuf_out_), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft2D: plan creation failed");
}

Fft2D::~Fft2D() {
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plan_fwd_) fftw_destroy_plan(plan_fwd_);
        if (plan_bwd_) fftw_destroy_plan(plan_bwd_);
        if (plan_dct_) fftw_destroy_plan(plan_dct_);
        if (plan_idct_) fftw_destroy_plan(plan_idct_);
    }
    fftw_free(cbuf_in_);
    fftw_free(cbuf_out_);
    fftw_free(rbuf_in_);
    fftw_free(rbuf_out_);
}

void Fft2D::forward(const double* in, std::vector<std::complex<double>>& out) {
    for (std::size_t i = 0; i < n_; ++i) cbuf_in_[i] = std::complex<double>(in[i], 0.0);
    fftw_execute(plan_fwd_);
    out.assign(cbuf_out_, cbuf_out_ + n_);
}

void Fft2D::inverse_real(const std::vector<std::complex<double>>& in, double* out,
                         double* max_imag) {
    if (in.size() != n_) throw std::invalid_argument("Fft2D::inverse_real: size mismatch");
    std::memcpy(cbuf_in_, in.data(), n_ * sizeof(std::complex<double>));
    fftw_execute(plan_bwd_);
    const double inv_n = 1.0 / static_cast<double>(n_);
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] = cbuf_out_[i].real() * inv_n;
        worst = std::max(worst, std::abs(cbuf_out_[i].imag()) * inv_n);
    }
    if (max_imag) *max_imag = worst;
}

void Fft2D::ensure_dct_plans() {
    if (plan_dct_) return;
    rbuf_in_ = fftw_alloc_real(n_);
    rbuf_out_ = fftw_alloc_real(n_);
    if (!rbuf_in_ || !rbuf_out_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_dct_ = fftw_plan_r2r_2d(height_, width_, rbuf_in_, rbuf_out_, FFTW_REDFT10, FFTW_REDFT10,
                                 FFTW_ESTIMATE);
    plan_idct_ = fftw_plan_r2r_2d(height_, width_, rbuf_in_, rbuf_out_, FFTW_REDFT01, FFTW_REDFT01,
                                  FFTW_ESTIMATE);
    if (!plan_dct_ || !plan_idct_) throw std::runtime_error("Fft2D: DCT plan creation failed");
}

// FFTW's REDFT10 computes f_k = 2 sum_j x_j cos(pi (j+1/2) k / n). The
// orthonormal DCT-II coefficient is c_k = s_k/2 * f_k with s_0 = sqrt(1/n) and
// s_k = sqrt(2/n) otherwise; applied separably along both axes.
void Fft2D::dct2(const double* in, double* out) {
    ensure_dct_plans();
    std::memcpy(rbuf_in_, in, n_ * sizeof(double));
    fftw_execute(plan_dct_);
    const double s0x = std::sqrt(1.0 / width_) / 2.0, sx = std::sqrt(2.0 / width_) / 2.0;
    const double s0y = std::sqrt(1.0 / height_) / 2.0, sy = std::sqrt(2.0 / height_) / 2.0;
    for (int y = 0; y < height_; ++y) {
        const double fy = (y == 0) ? s0y : sy;
        for (int x = 0; x < width_; ++x) {
            const double fx = (x == 0) ? s0x : sx;
            out[static_cast<std::size_t>(y) * width_ + x] =
                rbuf_out_[static_cast<std::size_t>(y) * width_ + x] * fx * fy;
        }
    }
}

// REDFT01 computes y_j = g_0 + 2 sum_{k>=1} g_k cos(pi (j+1/2) k / n); feeding
// g_0 = c_0 s_0 and g_k = c_k s_k / 2 reconstructs the orthonormal synthesis.
void Fft2D::idct2(const double* in, double* out) {
    ensure_dct_plans();
    const double s0x = std::sqrt(1.0 / width_), sx = std::sqrt(2.0 / width_) / 2.0;
    const double s0y = std::sqrt(1.0 / height_), sy = std::sqrt(2.0 / height_) / 2.0;
    for (int y = 0; y < height_; ++y) {
        const double fy = (y == 0) ? s0y : sy;
        for (int x = 0; x < width_; ++x) {
            const double fx = (x == 0) ? s0x : sx;
            rbuf_in_[static_cast<std::size_t>(y) * width_ + x] =
                in[static_cast<std::size_t>(y) * width_ + x] * fx * fy;
        }
    }
    fftw_execute(plan_idct_);
    std::memcpy(out, rbuf_out_, n_ * sizeof(double));
}

Fft2D& Fft2D::shared(int width, int height) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft2D>> cache;
    auto& slot = cache[{width, height}];
    if (!slot) slot = std::make_unique<Fft2D>(width, height);
    return *slot;
}

}  // namespace cred
