#include "denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "json.hpp"

namespace cred {

const char* to_string(DenoiserKind kind) {
    switch (kind) {
        case DenoiserKind::tv_rof: return "tv_rof";
        case DenoiserKind::dct_threshold: return "dct_threshold";
        case DenoiserKind::median: return "median";
        case DenoiserKind::gaussian_smooth: return "gaussian_smooth";
    }
    return "?";
}

DenoiserKind denoiser_kind_from_string(std::string_view name) {
    if (name == "tv_rof") return DenoiserKind::tv_rof;
    if (name == "dct_threshold") return DenoiserKind::dct_threshold;
    if (name == "median") return DenoiserKind::median;
    if (name == "gaussian_smooth") return DenoiserKind::gaussian_smooth;
    throw std::invalid_argument("unknown denoiser kind '" + std::string(name) + "'");
}

void DenoiserSpec::validate() const {
    if (!(strength > 0.0) || !std::isfinite(strength)) {
        throw std::invalid_argument("DenoiserSpec: strength must be finite and > 0");
    }
    if (kind == DenoiserKind::median &&
        (strength != std::floor(strength) || strength > 1e6)) {
        throw std::invalid_argument("DenoiserSpec: median half-size must be a positive integer");
    }
}

namespace {

// Chambolle's dual projection algorithm for the ROF model
// min_u 1/2 ||u - x||^2 + w TV(u), run for a fixed 20 iterations so the map is
// deterministic. Forward-difference gradient, adjoint divergence.
Image denoise_tv(const Image& x, double weight) {
    const int w = x.width(), h = x.height();
    const std::size_t n = x.size();
    std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0);
    const double step = 0.25;
    const int iters = 20;

    for (int it = 0; it < iters; ++it) {
        // div p
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                const std::size_t i = static_cast<std::size_t>(y) * w + xx;
                double d = 0.0;
                if (xx == 0) d += px[i];
                else if (xx == w - 1) d -= px[i - 1];
                else d += px[i] - px[i - 1];
                if (y == 0) d += py[i];
                else if (y == h - 1) d -= py[i - w];
                else d += py[i] - py[i - w];
                div[i] = d;
            }
        }
        // p <- (p + step * grad(div p - x/w)) / (1 + step * |grad(...)|)
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                const std::size_t i = static_cast<std::size_t>(y) * w + xx;
                const double v = div[i] - x[i] / weight;
                const double gx =
                    (xx < w - 1) ? (div[i + 1] - x[i + 1] / weight) - v : 0.0;
                const double gy =
                    (y < h - 1) ? (div[i + w] - x[i + w] / weight) - v : 0.0;
                const double mag = std::sqrt(gx * gx + gy * gy);
                const double denom = 1.0 + step * mag;
                px[i] = (px[i] + step * gx) / denom;
                py[i] = (py[i] + step * gy) / denom;
            }
        }
    }

    // u = x - w * div p
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            const std::size_t i = static_cast<std::size_t>(y) * w + xx;
            double d = 0.0;
            if (xx == 0) d += px[i];
            else if (xx == w - 1) d -= px[i - 1];
            else d += px[i] - px[i - 1];
            if (y == 0) d += py[i];
            else if (y == h - 1) d -= py[i - w];
            else d += py[i] - py[i - w];
            out[i] = x[i] - weight * d;
        }
    }
    return out;
}

// Hard thresholding of orthonormal DCT-II coefficients; the DC coefficient is
// kept so constant images are fixed points.
Image denoise_dct(const Image& x, double threshold) {
    Fft2D& fft = Fft2D::shared(x.width(), x.height());
    std::vector<double> coef(x.size());
    fft.dct2(x.data(), coef.data());
    for (std::size_t i = 1; i < coef.size(); ++i) {
        if (std::abs(coef[i]) < threshold) coef[i] = 0.0;
    }
    Image out(x.width(), x.height());
    fft.idct2(coef.data(), out.data());
    return out;
}

Image denoise_median(const Image& x, int half) {
    const int w = x.width(), h = x.height();
    Image out(w, h);
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(2 * half + 1) * (2 * half + 1));
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            window.clear();
            for (int dy = -half; dy <= half; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -half; dx <= half; ++dx) {
                    const int xc = std::clamp(xx + dx, 0, w - 1);
                    window.push_back(x.at(xc, yy));
                }
            }
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out.at(xx, y) = *mid;
        }
    }
    return out;
}

// Separable circular convolution with a truncated Gaussian. Linear with an
// exactly symmetric (circulant) matrix, which is what the rho_RED gradient
// identity relies on. The radius is capped so the kernel fits the image.
Image denoise_gaussian(const Image& x, double sigma) {
    const int w = x.width(), h = x.height();
    auto kernel = [sigma](int n) {
        int r = static_cast<int>(std::ceil(4.0 * sigma));
        r = std::min(r, (n - 1) / 2);
        std::vector<double> k(2 * r + 1, 1.0);
        if (r > 0) {
            double sum = 0.0;
            for (int i = -r; i <= r; ++i) {
                k[i + r] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
                sum += k[i + r];
            }
            for (double& v : k) v /= sum;
        }
        return k;
    };
    const std::vector<double> kx = kernel(w);
    const std::vector<double> ky = kernel(h);
    const int rx = (static_cast<int>(kx.size()) - 1) / 2;
    const int ry = (static_cast<int>(ky.size()) - 1) / 2;

    Image tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int d = -rx; d <= rx; ++d) {
                acc += kx[d + rx] * x.at(((xx - d) % w + w) % w, y);
            }
            tmp.at(xx, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int d = -ry; d <= ry; ++d) {
                acc += ky[d + ry] * tmp.at(xx, ((y - d) % h + h) % h);
            }
            out.at(xx, y) = acc;
        }
    }
    return out;
}

}  // namespace

Image denoise(const DenoiserSpec& spec, const Image& x) {
    spec.validate();
    if (x.empty()) throw std::invalid_argument("denoise: empty image");
    switch (spec.kind) {
        case DenoiserKind::tv_rof: return denoise_tv(x, spec.strength);
        case DenoiserKind::dct_threshold: return denoise_dct(x, spec.strength);
        case DenoiserKind::median: return denoise_median(x, static_cast<int>(spec.strength));
        case DenoiserKind::gaussian_smooth: return denoise_gaussian(x, spec.strength);
    }
    throw std::logic_error("denoise: unreachable");
}

double rho_red(const DenoiserSpec& spec, const Image& x) {
    const Image fx = denoise(spec, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * (x[i] - fx[i]);
    return 0.5 * acc;
}

double total_variation(const Image& x) {
    const int w = x.width(), h = x.height();
    double tv = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            const double gx = (xx < w - 1) ? x.at(xx + 1, y) - x.at(xx, y) : 0.0;
            const double gy = (y < h - 1) ? x.at(xx, y + 1) - x.at(xx, y) : 0.0;
            tv += std::sqrt(gx * gx + gy * gy);
        }
    }
    return tv;
}

DenoiserPresets DenoiserPresets::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open denoiser presets '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("denoiser presets '" + path + "': " + e.what());
    }
    DenoiserPresets presets;
    for (const auto& [kind_name, levels] : doc.items()) {
        denoiser_kind_from_string(kind_name);  // validates the key
        if (!levels.is_object()) {
            throw ParseError("denoiser presets: '" + kind_name + "' must map levels to strengths");
        }
        for (const auto& [level, value] : levels.items()) {
            if (!value.is_number()) {
                throw ParseError("denoiser presets: strength for " + kind_name + "/" + level +
                                 " must be a number");
            }
            presets.table_[{kind_name, level}] = value.get<double>();
        }
    }
    return presets;
}

double DenoiserPresets::strength(DenoiserKind kind, const std::string& level) const {
    auto it = table_.find({to_string(kind), level});
    if (it == table_.end()) {
        throw std::invalid_argument(std::string("no preset '") + level + "' for denoiser " +
                                    to_string(kind));
    }
    return it->second;
}

DenoiserSpec DenoiserPresets::spec(DenoiserKind kind, const std::string& level) const {
    DenoiserSpec s{kind, strength(kind, level)};
    s.validate();
    return s;
}

}  // namespace cred
