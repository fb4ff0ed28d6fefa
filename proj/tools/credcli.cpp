// Command-line front end for the CRED restoration library. Talks to the core
// exclusively through the C API in cred/cred.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cred/cred.h"

namespace {

int fail(cred_status status, const char* what) {
    std::fprintf(stderr, "error: %s: %s (%s)\n", what, cred_last_error(),
                 cred_status_name(status));
    return 1;
}

struct ImageHandle {
    cred_image* ptr = nullptr;
    ~ImageHandle() { cred_image_free(ptr); }
};

struct BlurHandle {
    cred_blur* ptr = nullptr;
    ~BlurHandle() { cred_blur_free(ptr); }
};

// --input path | --phantom name --size N
int load_input(const std::string& input, const std::string& phantom, int size, ImageHandle& out,
               const char* what) {
    cred_status s;
    if (!input.empty()) {
        s = cred_image_load_pgm(input.c_str(), &out.ptr);
    } else if (!phantom.empty()) {
        s = cred_phantom(phantom.c_str(), size, &out.ptr);
    } else {
        std::fprintf(stderr, "error: %s: provide --input or --phantom\n", what);
        return 1;
    }
    return s == CRED_OK ? 0 : fail(s, what);
}

bool parse_denoiser_kind(const std::string& name, cred_denoiser_kind& kind) {
    if (name == "tv_rof") kind = CRED_DENOISER_TV_ROF;
    else if (name == "dct_threshold") kind = CRED_DENOISER_DCT_THRESHOLD;
    else if (name == "median") kind = CRED_DENOISER_MEDIAN;
    else if (name == "gaussian_smooth") kind = CRED_DENOISER_GAUSSIAN_SMOOTH;
    else return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CRED: constrained regularization-by-denoising image restoration"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cred_version()));

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Degrade an image: b = A(gt) + noise");
    std::string sim_input, sim_phantom, sim_output, sim_save_gt, sim_save_noise;
    int sim_size = 128;
    double sim_sigma_a = 1.0, sim_sigma_eta = 25.0;
    std::uint64_t sim_seed = 1;
    sim->add_option("--input", sim_input, "ground-truth PGM file");
    sim->add_option("--phantom", sim_phantom, "synthetic phantom name instead of --input");
    sim->add_option("--size", sim_size, "phantom size in pixels");
    sim->add_option("--sigma-a", sim_sigma_a, "blur standard deviation");
    sim->add_option("--sigma-eta", sim_sigma_eta, "noise standard deviation");
    sim->add_option("--seed", sim_seed, "noise seed");
    sim->add_option("--output", sim_output, "output PGM for the degraded image")->required();
    sim->add_option("--save-gt", sim_save_gt, "also save the ground truth as PGM");
    sim->add_option("--save-noise", sim_save_noise, "persist the exact noise (raw f64)");

    // ---- restore ----
    auto* res = app.add_subcommand("restore", "Restore a degraded image");
    std::string res_input, res_output, res_gt, res_solver = "cred";
    std::string res_denoiser = "tv_rof", res_level = "level-1", res_scenario = "idealized";
    std::string res_presets = "config/denoisers.json";
    double res_strength = -1.0;
    cred_solver_params p;
    cred_solver_params_init(&p);
    std::uint64_t res_seed = 0;
    res->add_option("--input", res_input, "degraded PGM file")->required();
    res->add_option("--output", res_output, "restored-image PGM path")->required();
    res->add_option("--gt", res_gt, "ground truth for PSNR/SSIM reporting");
    res->add_option("--solver", res_solver, "cred|red|redpro");
    res->add_option("--denoiser", res_denoiser,
                    "tv_rof|dct_threshold|median|gaussian_smooth");
    res->add_option("--level", res_level, "denoiser preset level (level-1|level-2)");
    res->add_option("--strength", res_strength, "explicit denoiser strength (overrides --level)");
    res->add_option("--presets", res_presets, "denoiser presets JSON");
    res->add_option("--scenario", res_scenario,
                    "idealized (known --sigma-eta) | realistic (estimated)");
    double res_sigma_a = 1.0, res_sigma_eta = 0.0;
    res->add_option("--sigma-a", res_sigma_a, "blur standard deviation of the forward model");
    res->add_option("--sigma-eta", res_sigma_eta, "noise level (idealized scenario)");
    res->add_option("--tau", p.tau, "constraint radius factor, delta = tau sqrt(n) sigma");
    res->add_option("--gamma", p.gamma, "penalty growth per iteration");
    res->add_option("--beta-r0", p.beta_r0, "initial residual penalty");
    res->add_option("--beta-t0", p.beta_t0, "initial splitting penalty");
    res->add_option("--lambda", p.lambda, "RED regularization weight");
    res->add_option("--beta", p.beta, "RED ADMM penalty");
    res->add_option("--alpha", p.alpha, "RED-PRO denoiser relaxation");
    res->add_option("--mu", p.mu, "RED-PRO starting steplength");
    res->add_option("--decay", p.decay, "RED-PRO steplength decay exponent");
    res->add_option("--tol", p.tol, "relative-change stopping tolerance");
    res->add_option("--max-iter", p.max_iter, "iteration cap");
    res->add_option("--seed", res_seed, "recorded for provenance (restore itself is deterministic)");

    // ---- sweep ----
    auto* sw = app.add_subcommand("sweep", "Run an experiment sweep from a JSON config");
    std::string sw_config, sw_outdir;
    sw->add_option("--config", sw_config, "experiment config JSON")->required();
    sw->add_option("--output-dir", sw_outdir, "override the config's output directory");

    // ---- replay ----
    auto* rp = app.add_subcommand("replay", "Re-execute one row of a sweep's runs.csv");
    std::string rp_csv, rp_outdir;
    int rp_row = 0;
    rp->add_option("--csv", rp_csv, "runs.csv produced by sweep")->required();
    rp->add_option("--row", rp_row, "row id to replay")->required();
    rp->add_option("--output-dir", rp_outdir, "where to write the replayed row/image");

    // ---- metrics ----
    auto* mx = app.add_subcommand("metrics", "PSNR/SSIM between two images");
    std::string mx_image, mx_ref, mx_blurred;
    double mx_sigma_a = 0.0;
    mx->add_option("--image", mx_image, "image under test (PGM)")->required();
    mx->add_option("--ref", mx_ref, "reference image (PGM)")->required();
    mx->add_option("--blurred", mx_blurred,
                   "degraded data; adds the sigma_x discrepancy estimate (needs --sigma-a)");
    mx->add_option("--sigma-a", mx_sigma_a, "blur standard deviation for --blurred");

    // ---- phantom ----
    auto* ph = app.add_subcommand("phantom", "Write a bundled synthetic test image");
    std::string ph_name = "edges", ph_output;
    int ph_size = 128;
    ph->add_option("--name", ph_name, "edges|blobs|bars|checker|texture");
    ph->add_option("--size", ph_size, "image size in pixels");
    ph->add_option("--output", ph_output, "output PGM path")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        ImageHandle gt;
        if (int rc = load_input(sim_input, sim_phantom, sim_size, gt, "simulate")) return rc;
        ImageHandle b;
        if (cred_status s = cred_simulate(gt.ptr, sim_sigma_a, sim_sigma_eta, sim_seed, &b.ptr,
                                          nullptr)) {
            return fail(s, "simulate");
        }
        if (cred_status s = cred_image_save_pgm(b.ptr, sim_output.c_str())) {
            return fail(s, "simulate: save");
        }
        if (!sim_save_gt.empty()) {
            if (cred_status s = cred_image_save_pgm(gt.ptr, sim_save_gt.c_str())) {
                return fail(s, "simulate: save gt");
            }
        }
        if (!sim_save_noise.empty()) {
            // noise = b - A(gt), reconstructed exactly
            BlurHandle op;
            if (cred_status s = cred_blur_create(sim_sigma_a, cred_image_width(gt.ptr),
                                                 cred_image_height(gt.ptr), &op.ptr)) {
                return fail(s, "simulate: operator");
            }
            ImageHandle blurred;
            if (cred_status s = cred_blur_apply(op.ptr, gt.ptr, &blurred.ptr)) {
                return fail(s, "simulate: blur");
            }
            const int w = cred_image_width(b.ptr), h = cred_image_height(b.ptr);
            std::vector<double> diff(static_cast<size_t>(w) * h);
            const double* bd = cred_image_data(b.ptr);
            const double* ad = cred_image_data(blurred.ptr);
            for (size_t i = 0; i < diff.size(); ++i) diff[i] = bd[i] - ad[i];
            ImageHandle noise;
            if (cred_status s = cred_image_create(w, h, diff.data(), &noise.ptr)) {
                return fail(s, "simulate: noise image");
            }
            if (cred_status s = cred_image_save_raw(noise.ptr, sim_save_noise.c_str())) {
                return fail(s, "simulate: save noise");
            }
        }
        std::printf("wrote %s (%dx%d, sigma_a=%g, sigma_eta=%g, seed=%llu)\n", sim_output.c_str(),
                    cred_image_width(b.ptr), cred_image_height(b.ptr), sim_sigma_a, sim_sigma_eta,
                    static_cast<unsigned long long>(sim_seed));
        return 0;
    }

    if (res->parsed()) {
        if (!parse_denoiser_kind(res_denoiser, p.denoiser)) {
            std::fprintf(stderr, "error: unknown denoiser '%s'\n", res_denoiser.c_str());
            return 1;
        }
        if (res_solver == "cred") p.solver = CRED_SOLVER_CRED;
        else if (res_solver == "red") p.solver = CRED_SOLVER_RED;
        else if (res_solver == "redpro") p.solver = CRED_SOLVER_REDPRO;
        else {
            std::fprintf(stderr, "error: unknown solver '%s'\n", res_solver.c_str());
            return 1;
        }

        ImageHandle b;
        if (cred_status s = cred_image_load_pgm(res_input.c_str(), &b.ptr)) {
            return fail(s, "restore: load");
        }

        if (res_strength >= 0.0) {
            p.denoiser_strength = res_strength;
        } else {
            if (cred_status s = cred_denoiser_preset(res_presets.c_str(), p.denoiser,
                                                     res_level.c_str(), &p.denoiser_strength)) {
                return fail(s, "restore: presets");
            }
        }

        if (res_scenario == "realistic") {
            if (cred_status s = cred_estimate_sigma(b.ptr, &p.sigma_eta)) {
                return fail(s, "restore: estimate sigma");
            }
        } else if (res_scenario == "idealized") {
            p.sigma_eta = res_sigma_eta;
        } else {
            std::fprintf(stderr, "error: unknown scenario '%s'\n", res_scenario.c_str());
            return 1;
        }
        if (p.solver == CRED_SOLVER_CRED && !(p.sigma_eta > 0.0)) {
            std::fprintf(stderr,
                         "error: cred needs a noise level; pass --sigma-eta or use "
                         "--scenario realistic\n");
            return 1;
        }

        BlurHandle op;
        if (cred_status s = cred_blur_create(res_sigma_a, cred_image_width(b.ptr),
                                             cred_image_height(b.ptr), &op.ptr)) {
            return fail(s, "restore: operator");
        }

        ImageHandle x;
        cred_run_report report;
        if (cred_status s = cred_restore(op.ptr, b.ptr, &p, nullptr, &x.ptr, &report)) {
            return fail(s, "restore");
        }
        if (cred_status s = cred_image_save_pgm(x.ptr, res_output.c_str())) {
            return fail(s, "restore: save");
        }

        std::printf("{\n  \"solver\": \"%s\",\n  \"denoiser\": \"%s\",\n", res_solver.c_str(),
                    res_denoiser.c_str());
        std::printf("  \"scenario\": \"%s\",\n  \"sigma_eta_used\": %.17g,\n",
                    res_scenario.c_str(), p.sigma_eta);
        std::printf("  \"seed\": %llu,\n", static_cast<unsigned long long>(res_seed));
        std::printf("  \"iterations\": %d,\n  \"stop_reason\": \"%s\",\n", report.iterations,
                    report.stopped_by_tolerance ? "tolerance" : "max_iter");
        std::printf("  \"residual\": %.17g,\n  \"sigma_xstar\": %.17g", report.final_residual,
                    report.sigma_xstar);
        if (!res_gt.empty()) {
            ImageHandle gt;
            if (cred_status s = cred_image_load_pgm(res_gt.c_str(), &gt.ptr)) {
                return fail(s, "restore: load gt");
            }
            double v_psnr = 0.0, v_ssim = 0.0, p_in = 0.0;
            if (cred_status s = cred_psnr(x.ptr, gt.ptr, 255.0, &v_psnr)) return fail(s, "psnr");
            if (cred_status s = cred_psnr(b.ptr, gt.ptr, 255.0, &p_in)) return fail(s, "psnr");
            if (cred_status s = cred_ssim(x.ptr, gt.ptr, &v_ssim)) return fail(s, "ssim");
            std::printf(",\n  \"psnr_input\": %.17g,\n  \"psnr\": %.17g,\n  \"ssim\": %.17g",
                        p_in, v_psnr, v_ssim);
        }
        std::printf("\n}\n");
        return 0;
    }

    if (sw->parsed()) {
        if (cred_status s = cred_sweep_run(sw_config.c_str(),
                                           sw_outdir.empty() ? nullptr : sw_outdir.c_str())) {
            return fail(s, "sweep");
        }
        std::printf("sweep complete: %s\n", sw_outdir.empty() ? "(config output_dir)"
                                                              : sw_outdir.c_str());
        return 0;
    }

    if (rp->parsed()) {
        int identical = 0;
        if (cred_status s = cred_replay_row(rp_csv.c_str(), rp_row,
                                            rp_outdir.empty() ? nullptr : rp_outdir.c_str(),
                                            &identical)) {
            return fail(s, "replay");
        }
        std::printf("replay row %d: metrics %s\n", rp_row,
                    identical ? "reproduced byte-identically" : "DIFFER from the recorded row");
        return identical ? 0 : 1;
    }

    if (mx->parsed()) {
        ImageHandle img, ref;
        if (cred_status s = cred_image_load_pgm(mx_image.c_str(), &img.ptr)) {
            return fail(s, "metrics: load image");
        }
        if (cred_status s = cred_image_load_pgm(mx_ref.c_str(), &ref.ptr)) {
            return fail(s, "metrics: load ref");
        }
        double v_psnr = 0.0, v_ssim = 0.0;
        if (cred_status s = cred_psnr(img.ptr, ref.ptr, 255.0, &v_psnr)) return fail(s, "psnr");
        if (cred_status s = cred_ssim(img.ptr, ref.ptr, &v_ssim)) return fail(s, "ssim");
        std::printf("{\n  \"psnr\": %.17g,\n  \"ssim\": %.17g", v_psnr, v_ssim);
        if (!mx_blurred.empty()) {
            ImageHandle blurred;
            if (cred_status s = cred_image_load_pgm(mx_blurred.c_str(), &blurred.ptr)) {
                return fail(s, "metrics: load blurred");
            }
            BlurHandle op;
            if (cred_status s = cred_blur_create(mx_sigma_a, cred_image_width(img.ptr),
                                                 cred_image_height(img.ptr), &op.ptr)) {
                return fail(s, "metrics: operator");
            }
            double sigma_x = 0.0;
            if (cred_status s = cred_sigma_discrepancy(op.ptr, img.ptr, blurred.ptr, &sigma_x)) {
                return fail(s, "metrics: sigma_x");
            }
            std::printf(",\n  \"sigma_x\": %.17g", sigma_x);
        }
        std::printf("\n}\n");
        return 0;
    }

    if (ph->parsed()) {
        ImageHandle img;
        if (cred_status s = cred_phantom(ph_name.c_str(), ph_size, &img.ptr)) {
            return fail(s, "phantom");
        }
        if (cred_status s = cred_image_save_pgm(img.ptr, ph_output.c_str())) {
            return fail(s, "phantom: save");
        }
        std::printf("wrote %s (%s, %dx%d)\n", ph_output.c_str(), ph_name.c_str(), ph_size,
                    ph_size);
        return 0;
    }

    return 0;
}
