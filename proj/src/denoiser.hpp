#pragma once

#include <map>
#include <string>
#include <string_view>

#include "image.hpp"

namespace cred {

enum class DenoiserKind { tv_rof, dct_threshold, median, gaussian_smooth };

const char* to_string(DenoiserKind kind);
DenoiserKind denoiser_kind_from_string(std::string_view name);

// Strength is interpreted per kind: TV regularization weight, DCT hard
// threshold (orthonormal-coefficient units), median window half-size, or
// Gaussian smoothing sigma in pixels.
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::tv_rof;
    double strength = 1.0;

    void validate() const;
};

// Deterministic: identical inputs give bit-identical outputs.
Image denoise(const DenoiserSpec& spec, const Image& x);

// rho_RED(x) = 1/2 * x^T (x - f(x)).
double rho_red(const DenoiserSpec& spec, const Image& x);

// Anisotropic-free discrete total variation (forward differences); used by the
// solvers' diagnostics and the TV-reduction tests.
double total_variation(const Image& x);

// Named strength presets per kind ("level-1"/"level-2"), loaded from a JSON
// file shipped with the harness configuration.
class DenoiserPresets {
public:
    static DenoiserPresets load(const std::string& path);

    double strength(DenoiserKind kind, const std::string& level) const;
    DenoiserSpec spec(DenoiserKind kind, const std::string& level) const;

private:
    std::map<std::pair<std::string, std::string>, double> table_;
};

}  // namespace cred
