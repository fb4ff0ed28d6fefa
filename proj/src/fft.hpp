#pragma once

#include <complex>
#include <vector>

// Forward declarations so fftw3.h stays out of public headers.
struct fftw_plan_s;

namespace cred {

// Per-shape FFTW workspace: complex 2-D DFT plans plus lazily created
// orthonormal DCT-II plans. Instances are not thread-safe; use shared() to get
// a thread-local cached instance. FFTW planning is serialized internally.
class Fft2D {
public:
    Fft2D(int width, int height);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int width() const { return width_; }
    int height() const { return height_; }

    // Unnormalized forward DFT of a real array (row-major, height rows).
    void forward(const double* in, std::vector<std::complex<double>>& out);

    // Inverse DFT with 1/n normalization; writes the real part and reports the
    // largest discarded imaginary magnitude if max_imag is non-null.
    void inverse_real(const std::vector<std::complex<double>>& in, double* out,
                      double* max_imag = nullptr);

    // Orthonormal 2-D DCT-II and its inverse (DCT-III); idct2(dct2(x)) == x and
    // both preserve the l2 norm.
    void dct2(const double* in, double* out);
    void idct2(const double* in, double* out);

    // Thread-local instance cache keyed by shape.
    static Fft2D& shared(int width, int height);

private:
    void ensure_dct_plans();

    int width_;
    int height_;
    std::size_t n_;
    std::complex<double>* cbuf_in_ = nullptr;
    std::complex<double>* cbuf_out_ = nullptr;
    double* rbuf_in_ = nullptr;
    double* rbuf_out_ = nullptr;
    fftw_plan_s* plan_fwd_ = nullptr;
    fftw_plan_s* plan_bwd_ = nullptr;
    fftw_plan_s* plan_dct_ = nullptr;
    fftw_plan_s* plan_idct_ = nullptr;
};

}  // namespace cred
