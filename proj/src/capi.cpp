#include "cred/cred.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "blur_operator.hpp"
#include "denoiser.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "noise_estimation.hpp"
#include "phantoms.hpp"
#include "solvers.hpp"

struct cred_image {
    cred::Image img;
};

struct cred_blur {
    explicit cred_blur(cred::BlurOperator o) : op(std::move(o)) {}
    cred::BlurOperator op;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Maps C++ exceptions from the core onto C status codes.
template <typename Fn>
cred_status guarded(Fn&& fn) {
    try {
        fn();
        return CRED_OK;
    } catch (const cred::ShapeError& e) {
        set_error(e.what());
        return CRED_ERR_SHAPE_MISMATCH;
    } catch (const cred::ParseError& e) {
        set_error(e.what());
        return CRED_ERR_PARSE;
    } catch (const cred::IoError& e) {
        set_error(e.what());
        return CRED_ERR_IO;
    } catch (const cred::DivergenceError& e) {
        set_error(e.what());
        return CRED_ERR_DIVERGED;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return CRED_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return CRED_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return CRED_ERR_INTERNAL;
    }
}

cred_status require(bool ok, const char* msg) {
    if (ok) return CRED_OK;
    set_error(msg);
    return CRED_ERR_INVALID_ARGUMENT;
}

cred::DenoiserKind to_kind(cred_denoiser_kind kind) {
    switch (kind) {
        case CRED_DENOISER_TV_ROF: return cred::DenoiserKind::tv_rof;
        case CRED_DENOISER_DCT_THRESHOLD: return cred::DenoiserKind::dct_threshold;
        case CRED_DENOISER_MEDIAN: return cred::DenoiserKind::median;
        case CRED_DENOISER_GAUSSIAN_SMOOTH: return cred::DenoiserKind::gaussian_smooth;
    }
    throw std::invalid_argument("unknown denoiser kind code");
}

}  // namespace

extern "C" {

const char* cred_status_name(cred_status status) {
    switch (status) {
        case CRED_OK: return "ok";
        case CRED_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case CRED_ERR_SHAPE_MISMATCH: return "shape_mismatch";
        case CRED_ERR_PARSE: return "parse_error";
        case CRED_ERR_IO: return "io_error";
        case CRED_ERR_DIVERGED: return "diverged";
        case CRED_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* cred_last_error(void) { return g_last_error.c_str(); }

const char* cred_version(void) { return "0.1.0"; }

cred_status cred_image_create(int width, int height, const double* data, cred_image** out) {
    if (cred_status s = require(out != nullptr, "cred_image_create: out is null")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        if (data) {
            std::vector<double> v(data, data + static_cast<std::size_t>(width) * height);
            img->img = cred::Image(width, height, std::move(v));
        } else {
            img->img = cred::Image(width, height, 0.0);
        }
        *out = img.release();
    });
}

cred_status cred_image_load_pgm(const char* path, cred_image** out) {
    if (cred_status s = require(path && out, "cred_image_load_pgm: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = cred::load_pgm(path);
        *out = img.release();
    });
}

cred_status cred_image_save_pgm(const cred_image* img, const char* path) {
    if (cred_status s = require(img && path, "cred_image_save_pgm: null argument")) return s;
    return guarded([&] { cred::save_pgm(img->img, path); });
}

cred_status cred_image_save_raw(const cred_image* img, const char* path) {
    if (cred_status s = require(img && path, "cred_image_save_raw: null argument")) return s;
    return guarded([&] { cred::harness::save_raw_f64(img->img, path); });
}

cred_status cred_image_load_raw(const char* path, cred_image** out) {
    if (cred_status s = require(path && out, "cred_image_load_raw: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = cred::harness::load_raw_f64(path);
        *out = img.release();
    });
}

void cred_image_free(cred_image* img) { delete img; }

int cred_image_width(const cred_image* img) { return img ? img->img.width() : 0; }
int cred_image_height(const cred_image* img) { return img ? img->img.height() : 0; }
const double* cred_image_data(const cred_image* img) { return img ? img->img.data() : nullptr; }

cred_status cred_phantom(const char* name, int size, cred_image** out) {
    if (cred_status s = require(name && out, "cred_phantom: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = cred::make_phantom(name, size);
        *out = img.release();
    });
}

cred_status cred_blur_create(double sigma_a, int width, int height, cred_blur** out) {
    if (cred_status s = require(out != nullptr, "cred_blur_create: out is null")) return s;
    return guarded([&] {
        auto op = std::make_unique<cred_blur>(cred::BlurOperator::build(sigma_a, width, height));
        *out = op.release();
    });
}

void cred_blur_free(cred_blur* op) { delete op; }

cred_status cred_blur_apply(const cred_blur* op, const cred_image* x, cred_image** out) {
    if (cred_status s = require(op && x && out, "cred_blur_apply: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = op->op.apply(x->img);
        *out = img.release();
    });
}

cred_status cred_blur_apply_adjoint(const cred_blur* op, const cred_image* y, cred_image** out) {
    if (cred_status s = require(op && y && out, "cred_blur_apply_adjoint: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = op->op.apply_adjoint(y->img);
        *out = img.release();
    });
}

cred_status cred_blur_solve(const cred_blur* op, const cred_image* rhs, double c,
                            cred_image** out) {
    if (cred_status s = require(op && rhs && out, "cred_blur_solve: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = op->op.solve_regularized_normal(rhs->img, c);
        *out = img.release();
    });
}

cred_status cred_denoise(cred_denoiser_kind kind, double strength, const cred_image* x,
                         cred_image** out) {
    if (cred_status s = require(x && out, "cred_denoise: null argument")) return s;
    return guarded([&] {
        auto img = std::make_unique<cred_image>();
        img->img = cred::denoise({to_kind(kind), strength}, x->img);
        *out = img.release();
    });
}

cred_status cred_rho_red(cred_denoiser_kind kind, double strength, const cred_image* x,
                         double* out) {
    if (cred_status s = require(x && out, "cred_rho_red: null argument")) return s;
    return guarded([&] { *out = cred::rho_red({to_kind(kind), strength}, x->img); });
}

cred_status cred_denoiser_preset(const char* presets_path, cred_denoiser_kind kind,
                                 const char* level, double* strength_out) {
    if (cred_status s =
            require(presets_path && level && strength_out, "cred_denoiser_preset: null argument")) {
        return s;
    }
    return guarded([&] {
        *strength_out = cred::DenoiserPresets::load(presets_path).strength(to_kind(kind), level);
    });
}

cred_status cred_estimate_sigma(const cred_image* b, double* sigma_out) {
    if (cred_status s = require(b && sigma_out, "cred_estimate_sigma: null argument")) return s;
    return guarded([&] { *sigma_out = cred::estimate_sigma(b->img).sigma; });
}

cred_status cred_sigma_discrepancy(const cred_blur* op, const cred_image* x, const cred_image* b,
                                   double* out) {
    if (cred_status s = require(op && x && b && out, "cred_sigma_discrepancy: null argument")) {
        return s;
    }
    return guarded([&] { *out = cred::sigma_discrepancy(op->op, x->img, b->img); });
}

cred_status cred_psnr(const cred_image* x, const cred_image* ref, double peak, double* out) {
    if (cred_status s = require(x && ref && out, "cred_psnr: null argument")) return s;
    return guarded([&] { *out = cred::psnr(x->img, ref->img, peak); });
}

cred_status cred_ssim(const cred_image* x, const cred_image* ref, double* out) {
    if (cred_status s = require(x && ref && out, "cred_ssim: null argument")) return s;
    return guarded([&] { *out = cred::ssim(x->img, ref->img); });
}

void cred_solver_params_init(cred_solver_params* params) {
    if (!params) return;
    std::memset(params, 0, sizeof(*params));
    params->solver = CRED_SOLVER_CRED;
    params->denoiser = CRED_DENOISER_TV_ROF;
    params->denoiser_strength = 16.0;
    params->tau = 0.98;
    params->sigma_eta = 0.0;
    params->gamma = 1.01;
    params->beta_r0 = 1.0;
    params->beta_t0 = 1.0;
    params->lambda = 1.0;
    params->beta = 1.0;
    params->inner_steps = 1;
    params->alpha = 0.5;
    params->mu = 0.5;
    params->decay = 1.0;
    params->tol = 1e-4;
    params->max_iter = 200;
}

cred_status cred_restore(const cred_blur* op, const cred_image* b,
                         const cred_solver_params* params, const cred_image* x0,
                         cred_image** x_out, cred_run_report* report) {
    if (cred_status s = require(op && b && params && x_out, "cred_restore: null argument")) {
        return s;
    }
    return guarded([&] {
        const cred::DenoiserSpec f{to_kind(params->denoiser), params->denoiser_strength};
        const cred::Image* start = x0 ? &x0->img : nullptr;
        cred::SolveResult res;
        switch (params->solver) {
            case CRED_SOLVER_CRED: {
                cred::CredConfig cfg;
                cfg.tau = params->tau;
                cfg.sigma_eta = params->sigma_eta;
                cfg.gamma = params->gamma;
                cfg.beta_r0 = params->beta_r0;
                cfg.beta_t0 = params->beta_t0;
                cfg.tol = params->tol;
                cfg.max_iter = params->max_iter;
                res = cred::cred_solve(op->op, b->img, f, cfg, start);
                break;
            }
            case CRED_SOLVER_RED: {
                cred::RedConfig cfg;
                cfg.lambda = params->lambda;
                cfg.beta = params->beta;
                cfg.inner_denoise_steps = params->inner_steps;
                cfg.tol = params->tol;
                cfg.max_iter = params->max_iter;
                res = cred::red_admm_solve(op->op, b->img, f, cfg, start);
                break;
            }
            case CRED_SOLVER_REDPRO: {
                cred::RedProConfig cfg;
                cfg.alpha = params->alpha;
                cfg.mu = params->mu;
                cfg.decay = params->decay;
                cfg.tol = params->tol;
                cfg.max_iter = params->max_iter;
                res = cred::red_pro_solve(op->op, b->img, f, cfg, start);
                break;
            }
            default: throw std::invalid_argument("cred_restore: unknown solver code");
        }
        if (report) {
            report->iterations = res.report.iterations;
            report->stopped_by_tolerance =
                res.report.stop_reason == cred::StopReason::tolerance ? 1 : 0;
            report->final_residual = res.report.final_residual;
            report->sigma_xstar = res.report.sigma_xstar;
        }
        auto img = std::make_unique<cred_image>();
        img->img = std::move(res.x);
        *x_out = img.release();
    });
}

cred_status cred_simulate(const cred_image* gt, double sigma_a, double sigma_eta, uint64_t seed,
                          cred_image** b_out, cred_blur** op_out) {
    if (cred_status s = require(gt && b_out, "cred_simulate: null argument")) return s;
    return guarded([&] {
        auto [b, op] = cred::harness::simulate(gt->img, sigma_a, sigma_eta, seed);
        auto img = std::make_unique<cred_image>();
        img->img = std::move(b);
        if (op_out) {
            auto blur = std::make_unique<cred_blur>(std::move(op));
            *op_out = blur.release();
        }
        *b_out = img.release();
    });
}

cred_status cred_sweep_run(const char* config_path, const char* output_dir_override) {
    if (cred_status s = require(config_path != nullptr, "cred_sweep_run: config_path is null")) {
        return s;
    }
    return guarded([&] {
        cred::harness::ExperimentConfig cfg =
            cred::harness::ExperimentConfig::from_json_file(config_path);
        if (output_dir_override && *output_dir_override) cfg.output_dir = output_dir_override;
        const cred::harness::SweepResult result = cred::harness::run_sweep(cfg);
        cred::harness::write_report(result, cfg, cfg.output_dir);
    });
}

cred_status cred_replay_row(const char* csv_path, int row_index, const char* out_dir,
                            int* identical_out) {
    if (cred_status s = require(csv_path != nullptr, "cred_replay_row: csv_path is null")) {
        return s;
    }
    return guarded([&] {
        const cred::harness::ReplayResult res =
            cred::harness::replay_row(csv_path, row_index, out_dir ? out_dir : "");
        if (identical_out) *identical_out = res.identical ? 1 : 0;
    });
}

}  // extern "C"
