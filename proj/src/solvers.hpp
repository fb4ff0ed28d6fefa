#pragma once

#include <cstddef>
#include <vector>

#include "blur_operator.hpp"
#include "denoiser.hpp"
#include "image.hpp"

namespace cred {

enum class StopReason { tolerance, max_iter };
const char* to_string(StopReason reason);

struct TracePoint {
    double rel_change;
    double residual;
};

struct RunReport {
    int iterations = 0;
    StopReason stop_reason = StopReason::max_iter;
    // ||A x* - b||_2 at exit.
    double final_residual = 0.0;
    // final_residual / sqrt(n - 1), the discrepancy estimate of sigma_eta.
    double sigma_xstar = 0.0;
    // ADMM feasibility gaps at exit (CRED only, 0 otherwise):
    // ||A x - b - r|| and ||x - t||.
    double primal_gap_r = 0.0;
    double primal_gap_t = 0.0;
    std::vector<TracePoint> trace;  // filled when cfg.record_trace
};

// Constrained solver configuration. delta() = tau * sqrt(n) * sigma_eta is the
// radius of the residual ball ||A x - b||_2 <= delta.
struct CredConfig {
    double tau = 0.98;
    double sigma_eta = 0.0;
    double gamma = 1.01;
    double beta_r0 = 1.0;
    double beta_t0 = 1.0;
    double tol = 1e-4;
    int max_iter = 200;
    bool record_trace = false;

    double delta(std::size_t n) const;
    void validate() const;
};

struct RedConfig {
    double lambda = 1.0;
    double beta = 1.0;
    int inner_denoise_steps = 1;
    double tol = 1e-4;
    int max_iter = 200;
    bool record_trace = false;

    void validate() const;
};

struct RedProConfig {
    double alpha = 0.5;
    double mu = 0.5;
    double decay = 1.0;
    double tol = 1e-4;
    int max_iter = 200;
    bool record_trace = false;

    void validate() const;
};

struct SolveResult {
    Image x;
    RunReport report;
};

// Euclidean projection onto the ball of radius delta centered at the origin.
Image project_ball(const Image& v, double delta);

// True iff ||x_new - x_old|| / ||x_old|| < tol (absolute when ||x_old|| == 0).
bool stopping_check(const Image& x_new, const Image& x_old, double tol);

// ADMM for: minimize rho_RED(x) subject to ||A x - b||_2 <= delta.
SolveResult cred_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                       const CredConfig& cfg, const Image* x0 = nullptr);

// ADMM for the unconstrained formulation 1/2 ||A x - b||^2 + lambda rho_RED(t).
SolveResult red_admm_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                           const RedConfig& cfg, const Image* x0 = nullptr);

// Hybrid steepest descent through the relaxed denoiser
// f_alpha = (1 - alpha) Id + alpha f, step mu / (k+1)^decay.
SolveResult red_pro_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                          const RedProConfig& cfg, const Image* x0 = nullptr);

}  // namespace cred
