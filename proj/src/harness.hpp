#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "blur_operator.hpp"
#include "denoiser.hpp"
#include "image.hpp"
#include "solvers.hpp"

namespace cred::harness {

// Input image reference: either a file path or a named synthetic phantom.
// Serialized as "path" or "phantom:<name>:<size>" in configs and CSV rows.
struct ImageSpec {
    std::string path;
    std::string phantom;
    int size = 0;

    std::string id() const;
    static ImageSpec from_id(const std::string& id);
    Image load() const;
};

enum class Scenario { idealized, realistic };
const char* to_string(Scenario s);
Scenario scenario_from_string(std::string_view name);

enum class SolverKind { cred, red, redpro };
const char* to_string(SolverKind s);
SolverKind solver_from_string(std::string_view name);

struct Degradation {
    double sigma_a = 1.0;
    double sigma_eta = 25.0;
};

struct SweepSpec {
    enum class Type { single, tau, penalties, baselines };
    Type type = Type::single;
    std::vector<double> tau_values;
    std::vector<double> gamma_values;
    std::vector<double> beta_values;  // grid axis shared by beta_r0 and beta_t0
    std::vector<double> lambda_values;
    std::vector<double> alpha_values;
    std::vector<double> mu_values;
    std::vector<SolverKind> solvers;
    bool auto_tune = true;

    void fill_defaults();
};

const char* to_string(SweepSpec::Type t);

struct ExperimentConfig {
    std::vector<ImageSpec> images;
    std::vector<Degradation> degradations;
    std::uint64_t seed = 1;
    std::vector<Scenario> scenarios;
    DenoiserSpec denoiser{DenoiserKind::tv_rof, 16.0};
    std::string denoiser_level;  // informational, resolved against the presets file
    CredConfig cred;
    RedConfig red;
    RedProConfig redpro;
    SweepSpec sweep;
    std::string output_dir = "out";
    int threads = 1;
    bool write_images = false;

    // dir_hint: directory of the config file, used to resolve relative paths
    // (presets file, image paths are left untouched).
    static ExperimentConfig from_json_text(const std::string& text, const std::string& dir_hint);
    static ExperimentConfig from_json_file(const std::string& path);
    void validate() const;
};

// One sweep point: the parameter columns double as the replay recipe, the
// result columns as the metrics record. Unused numeric parameters are NaN and
// serialize as empty CSV cells.
struct RunRow {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    int row = -1;
    std::string image_id;
    std::string solver;
    std::string denoiser;
    double denoiser_strength = kUnset;
    std::string scenario;
    double sigma_a = kUnset;
    double sigma_eta_true = kUnset;
    double sigma_eta_used = kUnset;
    std::uint64_t seed = 0;
    double tau = kUnset, gamma = kUnset, beta_r0 = kUnset, beta_t0 = kUnset;
    double lambda = kUnset, beta = kUnset;
    int inner_steps = 0;
    double alpha = kUnset, mu = kUnset, decay = kUnset;
    double tol = kUnset;
    int max_iter = 0;
    // results
    int iterations = 0;
    std::string stop_reason;
    double residual = kUnset, sigma_xstar = kUnset;
    double psnr_input = kUnset, psnr = kUnset, ssim = kUnset, re_sigma = kUnset;
    std::string error;
};

struct SweepResult {
    SweepSpec::Type type = SweepSpec::Type::single;
    std::vector<RunRow> rows;
};

// b = A(gt) + eta with eta ~ N(0, sigma_eta^2) from the deterministic sampler.
std::pair<Image, BlurOperator> simulate(const Image& gt, double sigma_a, double sigma_eta,
                                        std::uint64_t seed);

// Raw float64 image container, used to persist noise realizations exactly.
void save_raw_f64(const Image& img, const std::string& path);
Image load_raw_f64(const std::string& path);

// Executes a single run described by the parameter columns of `request`,
// filling the result columns. Never throws for per-run failures; those land in
// the error column. If image_out is non-empty the restored image is saved there.
RunRow execute_run(const RunRow& request, const std::string& image_out = "");

SweepResult sweep_tau(const ExperimentConfig& cfg);
SweepResult sweep_penalties(const ExperimentConfig& cfg);
SweepResult sweep_baselines(const ExperimentConfig& cfg);
SweepResult sweep_single(const ExperimentConfig& cfg);
// Dispatch on cfg.sweep.type.
SweepResult run_sweep(const ExperimentConfig& cfg);

// CSV serialization (byte-stable shortest round-trip float formatting).
std::string csv_header();
std::string to_csv_row(const RunRow& row);
RunRow parse_csv_row(const std::string& line);
std::vector<RunRow> read_csv(const std::string& path);
// NaN-aware field-by-field equality.
bool rows_equal(const RunRow& a, const RunRow& b);
// True iff the result columns (the MetricsRecord part) serialize identically.
bool metrics_identical(const RunRow& a, const RunRow& b);

// Writes runs.csv, summary.json and plot-data files into out_dir; restored
// images were already written by the sweep when cfg.write_images is set.
void write_report(const SweepResult& result, const ExperimentConfig& cfg,
                  const std::string& out_dir);

struct ReplayResult {
    RunRow original;
    RunRow replayed;
    bool identical = false;
};

// Re-executes row `row_index` of a previously written runs.csv. When out_dir
// is non-empty writes replay_row<k>.csv (and the restored image) there.
ReplayResult replay_row(const std::string& csv_path, int row_index,
                        const std::string& out_dir = "");

// Shortest round-trip decimal formatting used for all CSV/plot numbers.
std::string format_double(double v);

// Minimal worker pool: calls fn(0..n-1), `threads` at a time, order-independent.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace cred::harness
