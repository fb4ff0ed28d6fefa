#include "image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace cred {

Image::Image(int width, int height, double fill) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("Image: dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    width_ = width;
    height_ = height;
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> data) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("Image: dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    if (data.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("Image: data length " + std::to_string(data.size()) +
                                    " does not match " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
    width_ = width;
    height_ = height;
    data_ = std::move(data);
    if (!all_finite()) {
        throw std::invalid_argument("Image: non-finite value in pixel data");
    }
}

bool Image::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        std::ostringstream oss;
        oss << what << ": shape mismatch, " << a.width() << "x" << a.height() << " vs "
            << b.width() << "x" << b.height();
        throw ShapeError(oss.str());
    }
}

Image add(const Image& a, const Image& b) {
    require_same_shape(a, b, "add");
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Image sub(const Image& a, const Image& b) {
    require_same_shape(a, b, "sub");
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Image scale(const Image& a, double c) {
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return out;
}

void axpy(double a, const Image& x, Image& y) {
    require_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(const Image& a, const Image& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Image& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
    return std::sqrt(acc);
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
            tok.push_back(static_cast<char>(in.get()));
        }
        return tok;
    }
    throw ParseError("PGM: unexpected end of header");
}

int parse_pgm_int(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(std::string("PGM: malformed ") + what + " '" + tok + "'");
    }
    long v = std::stol(tok);
    if (v <= 0 || v > 1 << 20) {
        throw ParseError(std::string("PGM: out-of-range ") + what + " " + tok);
    }
    return static_cast<int>(v);
}

}  // namespace

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string magic = next_pgm_token(in);
    if (magic == "P2") throw ParseError("PGM: ASCII format (P2) is not supported, expected P5");
    if (magic != "P5") throw ParseError("PGM: bad magic '" + magic + "', expected P5");

    int width = parse_pgm_int(next_pgm_token(in), "width");
    int height = parse_pgm_int(next_pgm_token(in), "height");
    int maxval = parse_pgm_int(next_pgm_token(in), "maxval");
    if (maxval != 255) {
        throw ParseError("PGM: unsupported maxval " + std::to_string(maxval) + ", expected 255");
    }

    // Exactly one whitespace byte separates the header from the payload.
    int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) throw ParseError("PGM: missing header separator");

    std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw ParseError("PGM: truncated payload in '" + path + "'");
    }

    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(raw[i]);
    return Image(width, height, std::move(data));
}

void save_pgm(const Image& img, const std::string& path) {
    if (img.empty()) throw std::invalid_argument("save_pgm: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        long v = std::lround(img[i]);
        raw[i] = static_cast<unsigned char>(std::clamp(v, 0L, 255L));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace cred
