#include "solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace cred {

const char* to_string(StopReason reason) {
    return reason == StopReason::tolerance ? "tolerance" : "max_iter";
}

double CredConfig::delta(std::size_t n) const {
    return tau * std::sqrt(static_cast<double>(n)) * sigma_eta;
}

void CredConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("CredConfig: tau must be in [0,1]");
    if (!(sigma_eta >= 0.0) || !std::isfinite(sigma_eta)) {
        throw std::invalid_argument("CredConfig: sigma_eta must be finite and >= 0");
    }
    if (!(gamma >= 1.0)) throw std::invalid_argument("CredConfig: gamma must be >= 1");
    if (!(beta_r0 > 0.0) || !(beta_t0 > 0.0)) {
        throw std::invalid_argument("CredConfig: penalties must be > 0");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("CredConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("CredConfig: max_iter must be >= 1");
}

void RedConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("RedConfig: lambda must be finite and >= 0");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("RedConfig: beta must be > 0");
    if (inner_denoise_steps < 1) {
        throw std::invalid_argument("RedConfig: inner_denoise_steps must be >= 1");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("RedConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("RedConfig: max_iter must be >= 1");
}

void RedProConfig::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("RedProConfig: alpha must be in [0,1)");
    }
    if (!(mu > 0.0)) throw std::invalid_argument("RedProConfig: mu must be > 0");
    if (!(decay >= 0.0)) throw std::invalid_argument("RedProConfig: decay must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("RedProConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("RedProConfig: max_iter must be >= 1");
}

Image project_ball(const Image& v, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("project_ball: delta must be >= 0");
    const double norm = norm2(v);
    // The relative guard absorbs the rounding of a previous rescale so the
    // projection is bitwise idempotent; the slack is orders of magnitude below
    // the 1e-9 feasibility budget.
    if (norm <= delta * (1.0 + 1024.0 * std::numeric_limits<double>::epsilon())) return v;
    if (norm == 0.0) return v;
    return scale(v, delta / norm);
}

bool stopping_check(const Image& x_new, const Image& x_old, double tol) {
    require_same_shape(x_new, x_old, "stopping_check");
    const double denom = norm2(x_old);
    const double change = norm2(sub(x_new, x_old));
    if (denom == 0.0) return change < tol;
    return change / denom < tol;
}

namespace {

void check_finite(const Image& x, int iteration) {
    if (!x.all_finite()) throw DivergenceError(iteration);
}

void finish_report(const BlurOperator& op, const Image& x, const Image& b, RunReport& report) {
    report.final_residual = norm2(sub(op.apply(x), b));
    report.sigma_xstar =
        report.final_residual / std::sqrt(static_cast<double>(x.size()) - 1.0);
}

}  // namespace

SolveResult cred_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                       const CredConfig& cfg, const Image* x0) {
    cfg.validate();
    f.validate();
    if (op.width() != b.width() || op.height() != b.height()) {
        throw ShapeError("cred_solve: operator/data shape mismatch");
    }
    const double delta = cfg.delta(b.size());

    Image x = x0 ? *x0 : b;
    require_same_shape(x, b, "cred_solve x0");
    Image t = x;
    Image r = project_ball(sub(op.apply(x), b), delta);
    Image u_r(b.width(), b.height(), 0.0);  // scaled duals, lambda / beta
    Image u_t(b.width(), b.height(), 0.0);
    double beta_r = cfg.beta_r0;
    double beta_t = cfg.beta_t0;

    RunReport report;
    for (int k = 0; k < cfg.max_iter; ++k) {
        const double c = beta_r / beta_t;

        // x^{k+1} = ((beta_r/beta_t) A^T A + I)^{-1}
        //           [ (beta_r/beta_t) A^T (b + r - u_r) + (t - u_t) ]
        Image rhs = add(b, sub(r, u_r));
        Image x_half = add(scale(op.apply_adjoint(rhs), c), sub(t, u_t));
        Image x_new = op.solve_regularized_normal(x_half, c);

        // t^{k+1} = [ f(t^k) + beta_t (x^{k+1} + u_t) ] / (1 + beta_t)
        Image t_old = t;
        Image ft = denoise(f, t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = (ft[i] + beta_t * (x_new[i] + u_t[i])) / (1.0 + beta_t);
        }

        // r^{k+1} = proj_{B_delta}(A x^{k+1} - b + u_r)
        Image ax = op.apply(x_new);
        r = project_ball(add(sub(ax, b), u_r), delta);

        // Scaled dual ascent.
        for (std::size_t i = 0; i < u_r.size(); ++i) u_r[i] += ax[i] - b[i] - r[i];
        for (std::size_t i = 0; i < u_t.size(); ++i) u_t[i] += x_new[i] - t[i];

        beta_r *= cfg.gamma;
        beta_t *= cfg.gamma;

        check_finite(x_new, k + 1);
        // Both primal iterates must settle: with a feasible starting point the
        // x-update alone can be stationary on the very first sweep while t and
        // the duals are still moving.
        const bool converged =
            stopping_check(x_new, x, cfg.tol) && stopping_check(t, t_old, cfg.tol);
        report.iterations = k + 1;
        if (cfg.record_trace) {
            const double denom = norm2(x);
            const double change = norm2(sub(x_new, x));
            report.trace.push_back({denom == 0.0 ? change : change / denom,
                                    norm2(sub(ax, b))});
        }
        x = std::move(x_new);
        if (converged) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    report.primal_gap_r = norm2(sub(sub(op.apply(x), b), r));
    report.primal_gap_t = norm2(sub(x, t));
    finish_report(op, x, b, report);
    return {std::move(x), std::move(report)};
}

SolveResult red_admm_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                           const RedConfig& cfg, const Image* x0) {
    cfg.validate();
    f.validate();
    if (op.width() != b.width() || op.height() != b.height()) {
        throw ShapeError("red_admm_solve: operator/data shape mismatch");
    }

    Image x = x0 ? *x0 : b;
    require_same_shape(x, b, "red_admm_solve x0");
    Image t = x;
    Image u(b.width(), b.height(), 0.0);
    const Image atb = op.apply_adjoint(b);

    RunReport report;
    for (int k = 0; k < cfg.max_iter; ++k) {
        // x-update: (A^T A + beta I) x = A^T b + beta (t - u), solved as
        // ((1/beta) A^T A + I) x = rhs / beta.
        Image rhs(b.width(), b.height());
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            rhs[i] = (atb[i] + cfg.beta * (t[i] - u[i])) / cfg.beta;
        }
        Image x_new = op.solve_regularized_normal(rhs, 1.0 / cfg.beta);

        // t-update by the RED fixed-point rule, one or more passes.
        Image t_old = t;
        for (int j = 0; j < cfg.inner_denoise_steps; ++j) {
            Image ft = denoise(f, t);
            for (std::size_t i = 0; i < t.size(); ++i) {
                t[i] = (cfg.lambda * ft[i] + cfg.beta * (x_new[i] + u[i])) /
                       (cfg.lambda + cfg.beta);
            }
        }

        for (std::size_t i = 0; i < u.size(); ++i) u[i] += x_new[i] - t[i];

        check_finite(x_new, k + 1);
        const bool converged =
            stopping_check(x_new, x, cfg.tol) && stopping_check(t, t_old, cfg.tol);
        report.iterations = k + 1;
        if (cfg.record_trace) {
            const double denom = norm2(x);
            const double change = norm2(sub(x_new, x));
            report.trace.push_back({denom == 0.0 ? change : change / denom,
                                    norm2(sub(op.apply(x_new), b))});
        }
        x = std::move(x_new);
        if (converged) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    finish_report(op, x, b, report);
    return {std::move(x), std::move(report)};
}

SolveResult red_pro_solve(const BlurOperator& op, const Image& b, const DenoiserSpec& f,
                          const RedProConfig& cfg, const Image* x0) {
    cfg.validate();
    f.validate();
    if (op.width() != b.width() || op.height() != b.height()) {
        throw ShapeError("red_pro_solve: operator/data shape mismatch");
    }

    Image x = x0 ? *x0 : b;
    require_same_shape(x, b, "red_pro_solve x0");

    RunReport report;
    for (int k = 0; k < cfg.max_iter; ++k) {
        const double mu_k = cfg.mu / std::pow(static_cast<double>(k + 1), cfg.decay);
        Image grad = op.apply_adjoint(sub(op.apply(x), b));
        Image y = x;
        axpy(-mu_k, grad, y);
        check_finite(y, k + 1);

        Image x_new = y;
        if (cfg.alpha > 0.0) {
            Image fy = denoise(f, y);
            for (std::size_t i = 0; i < x_new.size(); ++i) {
                x_new[i] = (1.0 - cfg.alpha) * y[i] + cfg.alpha * fy[i];
            }
        }

        check_finite(x_new, k + 1);
        const bool converged = stopping_check(x_new, x, cfg.tol);
        report.iterations = k + 1;
        if (cfg.record_trace) {
            const double denom = norm2(x);
            const double change = norm2(sub(x_new, x));
            report.trace.push_back({denom == 0.0 ? change : change / denom,
                                    norm2(sub(op.apply(x_new), b))});
        }
        x = std::move(x_new);
        if (converged) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    finish_report(op, x, b, report);
    return {std::move(x), std::move(report)};
}

}  // namespace cred
