/* C API for the CRED image-restoration library.
 *
 * All objects are opaque handles created by cred_*_create/load functions and
 * released with the matching cred_*_free. Functions return CRED_OK on success;
 * on failure they return an error code and leave a diagnostic retrievable via
 * cred_last_error() (thread-local). Output parameters are untouched on error.
 */
#ifndef CRED_CRED_H
#define CRED_CRED_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cred_status {
    CRED_OK = 0,
    CRED_ERR_INVALID_ARGUMENT = 1,
    CRED_ERR_SHAPE_MISMATCH = 2,
    CRED_ERR_PARSE = 3,
    CRED_ERR_IO = 4,
    CRED_ERR_DIVERGED = 5,
    CRED_ERR_INTERNAL = 6
} cred_status;

const char* cred_status_name(cred_status status);
/* Message describing the most recent failure on the calling thread. */
const char* cred_last_error(void);
const char* cred_version(void);

/* ---- images ------------------------------------------------------------ */

typedef struct cred_image cred_image;

/* data may be NULL (zero fill); otherwise row-major width*height doubles. */
cred_status cred_image_create(int width, int height, const double* data, cred_image** out);
cred_status cred_image_load_pgm(const char* path, cred_image** out);
cred_status cred_image_save_pgm(const cred_image* img, const char* path);
/* Lossless float64 container (PGM quantizes); used to persist exact noise
 * realizations and intermediate iterates. */
cred_status cred_image_save_raw(const cred_image* img, const char* path);
cred_status cred_image_load_raw(const char* path, cred_image** out);
void cred_image_free(cred_image* img);

int cred_image_width(const cred_image* img);
int cred_image_height(const cred_image* img);
const double* cred_image_data(const cred_image* img);

/* Deterministic synthetic test image ("edges", "blobs", "bars", "checker",
 * "texture"). */
cred_status cred_phantom(const char* name, int size, cred_image** out);

/* ---- Gaussian blur operator --------------------------------------------- */

typedef struct cred_blur cred_blur;

cred_status cred_blur_create(double sigma_a, int width, int height, cred_blur** out);
void cred_blur_free(cred_blur* op);

cred_status cred_blur_apply(const cred_blur* op, const cred_image* x, cred_image** out);
cred_status cred_blur_apply_adjoint(const cred_blur* op, const cred_image* y, cred_image** out);
/* Solves (c * A^T A + I) x = rhs exactly under periodic boundary conditions. */
cred_status cred_blur_solve(const cred_blur* op, const cred_image* rhs, double c,
                            cred_image** out);

/* ---- denoisers ----------------------------------------------------------- */

typedef enum cred_denoiser_kind {
    CRED_DENOISER_TV_ROF = 0,
    CRED_DENOISER_DCT_THRESHOLD = 1,
    CRED_DENOISER_MEDIAN = 2,
    CRED_DENOISER_GAUSSIAN_SMOOTH = 3
} cred_denoiser_kind;

cred_status cred_denoise(cred_denoiser_kind kind, double strength, const cred_image* x,
                         cred_image** out);
/* rho_RED(x) = 1/2 x^T (x - f(x)). */
cred_status cred_rho_red(cred_denoiser_kind kind, double strength, const cred_image* x,
                         double* out);
/* Looks up a named strength preset ("level-1", "level-2") from a presets file. */
cred_status cred_denoiser_preset(const char* presets_path, cred_denoiser_kind kind,
                                 const char* level, double* strength_out);

/* ---- noise estimation & metrics ------------------------------------------ */

cred_status cred_estimate_sigma(const cred_image* b, double* sigma_out);
cred_status cred_sigma_discrepancy(const cred_blur* op, const cred_image* x, const cred_image* b,
                                   double* out);
cred_status cred_psnr(const cred_image* x, const cred_image* ref, double peak, double* out);
cred_status cred_ssim(const cred_image* x, const cred_image* ref, double* out);

/* ---- restoration ---------------------------------------------------------- */

typedef enum cred_solver_kind {
    CRED_SOLVER_CRED = 0,
    CRED_SOLVER_RED = 1,
    CRED_SOLVER_REDPRO = 2
} cred_solver_kind;

typedef struct cred_solver_params {
    cred_solver_kind solver;
    cred_denoiser_kind denoiser;
    double denoiser_strength;
    /* CRED */
    double tau;       /* delta = tau * sqrt(n) * sigma_eta */
    double sigma_eta; /* known or estimated noise level */
    double gamma;     /* per-iteration penalty growth */
    double beta_r0;
    double beta_t0;
    /* RED */
    double lambda;
    double beta;
    int inner_steps;
    /* RED-PRO */
    double alpha;
    double mu;
    double decay;
    /* shared stopping rule */
    double tol;
    int max_iter;
} cred_solver_params;

/* Fills the standard defaults: tau 0.98, gamma 1.01, beta_r0 = beta_t0 = 1,
 * tol 1e-4, max_iter 200, tv_rof strength 16. */
void cred_solver_params_init(cred_solver_params* params);

typedef struct cred_run_report {
    int iterations;
    int stopped_by_tolerance; /* 1 = tolerance, 0 = max_iter */
    double final_residual;    /* ||A x* - b||_2 */
    double sigma_xstar;       /* final_residual / sqrt(n-1) */
} cred_run_report;

/* x0 may be NULL (defaults to b). report may be NULL. */
cred_status cred_restore(const cred_blur* op, const cred_image* b,
                         const cred_solver_params* params, const cred_image* x0,
                         cred_image** x_out, cred_run_report* report);

/* b = A(gt) + eta with a deterministic seeded Gaussian stream. op_out may be
 * NULL if only the data is needed. */
cred_status cred_simulate(const cred_image* gt, double sigma_a, double sigma_eta, uint64_t seed,
                          cred_image** b_out, cred_blur** op_out);

/* ---- experiment harness --------------------------------------------------- */

/* Runs the sweep described by a JSON experiment config; writes runs.csv,
 * summary.json and plot-data files into the configured (or overridden) output
 * directory. */
cred_status cred_sweep_run(const char* config_path, const char* output_dir_override);

/* Re-executes one row of a previously written runs.csv. identical_out (may be
 * NULL) receives 1 iff the metrics record reproduced byte-identically. When
 * out_dir is non-NULL the replayed row and restored image are written there. */
cred_status cred_replay_row(const char* csv_path, int row_index, const char* out_dir,
                            int* identical_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CRED_CRED_H */
