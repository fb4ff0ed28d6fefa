#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cred {

// Dense grayscale image with real-valued intensities, row-major storage.
// Nominal range is [0,255] but values are not clamped outside of PGM export;
// solvers iterate on unclamped reals.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);
    Image(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool all_finite() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

// Throws ShapeError naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

Image add(const Image& a, const Image& b);
Image sub(const Image& a, const Image& b);
Image scale(const Image& a, double c);
// y += a * x
void axpy(double a, const Image& x, Image& y);
double dot(const Image& a, const Image& b);
double norm2(const Image& a);

// Binary PGM (P5), maxval 255. Loading maps bytes to doubles exactly; saving
// rounds to nearest integer and clamps to [0,255] at write time only.
Image load_pgm(const std::string& path);
void save_pgm(const Image& img, const std::string& path);

}  // namespace cred
