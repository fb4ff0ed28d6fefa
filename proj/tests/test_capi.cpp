// Exercises the shared-library surface exactly as an external consumer would:
// only the public C header, no internal C++ headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cred/cred.h"

#ifndef CRED_SOURCE_DIR
#define CRED_SOURCE_DIR "."
#endif

namespace {

struct Img {
    cred_image* p = nullptr;
    ~Img() { cred_image_free(p); }
};

struct Blur {
    cred_blur* p = nullptr;
    ~Blur() { cred_blur_free(p); }
};

}  // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(cred_status_name(CRED_OK)) == "ok");
    CHECK(std::string(cred_status_name(CRED_ERR_PARSE)) == "parse_error");
    CHECK(std::string(cred_version()).size() >= 5);
}

TEST_CASE("image lifecycle and accessors") {
    const std::vector<double> data{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    Img img;
    REQUIRE(cred_image_create(3, 2, data.data(), &img.p) == CRED_OK);
    CHECK(cred_image_width(img.p) == 3);
    CHECK(cred_image_height(img.p) == 2);
    CHECK(std::memcmp(cred_image_data(img.p), data.data(), data.size() * sizeof(double)) == 0);

    Img zeros;
    REQUIRE(cred_image_create(4, 4, nullptr, &zeros.p) == CRED_OK);
    CHECK(cred_image_data(zeros.p)[7] == 0.0);

    Img bad;
    const double nan_data[4] = {1.0, NAN, 3.0, 4.0};
    CHECK(cred_image_create(2, 2, nan_data, &bad.p) == CRED_ERR_INVALID_ARGUMENT);
    CHECK(std::string(cred_last_error()).find("finite") != std::string::npos);
    CHECK(cred_image_create(0, 2, nullptr, &bad.p) == CRED_ERR_INVALID_ARGUMENT);
}

TEST_CASE("error codes map onto failure classes") {
    Img img;
    CHECK(cred_image_load_pgm("missing_file.pgm", &img.p) == CRED_ERR_IO);

    std::ofstream("capi_ascii.pgm") << "P2\n2 2\n255\n0 1 2 3\n";
    CHECK(cred_image_load_pgm("capi_ascii.pgm", &img.p) == CRED_ERR_PARSE);
    CHECK(std::string(cred_last_error()).find("P2") != std::string::npos);
    std::remove("capi_ascii.pgm");

    Blur op;
    REQUIRE(cred_blur_create(1.0, 16, 16, &op.p) == CRED_OK);
    Img small;
    REQUIRE(cred_image_create(8, 8, nullptr, &small.p) == CRED_OK);
    Img out;
    CHECK(cred_blur_apply(op.p, small.p, &out.p) == CRED_ERR_SHAPE_MISMATCH);

    Blur bad_op;
    CHECK(cred_blur_create(8.0, 8, 8, &bad_op.p) == CRED_ERR_INVALID_ARGUMENT);

    Img ph;
    CHECK(cred_phantom("mystery", 32, &ph.p) == CRED_ERR_INVALID_ARGUMENT);
}

TEST_CASE("raw f64 round trip through the C API") {
    Img ph;
    REQUIRE(cred_phantom("texture", 32, &ph.p) == CRED_OK);
    REQUIRE(cred_image_save_raw(ph.p, "capi_tex.f64") == CRED_OK);
    Img back;
    REQUIRE(cred_image_load_raw("capi_tex.f64", &back.p) == CRED_OK);
    CHECK(std::memcmp(cred_image_data(back.p), cred_image_data(ph.p),
                      32 * 32 * sizeof(double)) == 0);
    std::remove("capi_tex.f64");
    Img bad;
    CHECK(cred_image_load_raw("capi_tex.f64", &bad.p) == CRED_ERR_IO);
}

TEST_CASE("pgm round trip through the C API") {
    Img ph;
    REQUIRE(cred_phantom("checker", 32, &ph.p) == CRED_OK);
    REQUIRE(cred_image_save_pgm(ph.p, "capi_checker.pgm") == CRED_OK);
    Img back;
    REQUIRE(cred_image_load_pgm("capi_checker.pgm", &back.p) == CRED_OK);
    CHECK(cred_image_width(back.p) == 32);
    CHECK(std::memcmp(cred_image_data(back.p), cred_image_data(ph.p),
                      32 * 32 * sizeof(double)) == 0);  // checker is integer-valued
    std::remove("capi_checker.pgm");
}

TEST_CASE("blur apply keeps constants and solve inverts the normal system") {
    Blur op;
    REQUIRE(cred_blur_create(1.0, 16, 16, &op.p) == CRED_OK);
    Img c;
    std::vector<double> data(256, 55.0);
    REQUIRE(cred_image_create(16, 16, data.data(), &c.p) == CRED_OK);
    Img blurred;
    REQUIRE(cred_blur_apply(op.p, c.p, &blurred.p) == CRED_OK);
    for (int i = 0; i < 256; ++i) {
        CHECK(std::abs(cred_image_data(blurred.p)[i] - 55.0) < 1e-9);
    }

    Img solved;
    REQUIRE(cred_blur_solve(op.p, c.p, 0.0, &solved.p) == CRED_OK);
    for (int i = 0; i < 256; ++i) {
        CHECK(std::abs(cred_image_data(solved.p)[i] - 55.0) < 1e-9);
    }
}

TEST_CASE("denoisers and rho_red through the C API") {
    std::vector<double> data(9, 10.0);
    data[4] = 255.0;
    Img img;
    REQUIRE(cred_image_create(3, 3, data.data(), &img.p) == CRED_OK);
    Img out;
    REQUIRE(cred_denoise(CRED_DENOISER_MEDIAN, 1.0, img.p, &out.p) == CRED_OK);
    CHECK(cred_image_data(out.p)[4] == 10.0);

    double rho = -1.0;
    std::vector<double> flat(64, 33.0);
    Img c;
    REQUIRE(cred_image_create(8, 8, flat.data(), &c.p) == CRED_OK);
    REQUIRE(cred_rho_red(CRED_DENOISER_GAUSSIAN_SMOOTH, 1.0, c.p, &rho) == CRED_OK);
    CHECK(std::abs(rho) < 1e-8);

    CHECK(cred_denoise(CRED_DENOISER_MEDIAN, 2.5, img.p, &out.p) ==
          CRED_ERR_INVALID_ARGUMENT);
}

TEST_CASE("preset lookup") {
    double strength = 0.0;
    REQUIRE(cred_denoiser_preset(CRED_SOURCE_DIR "/config/denoisers.json",
                                 CRED_DENOISER_TV_ROF, "level-1", &strength) == CRED_OK);
    CHECK(strength == 16.0);
    CHECK(cred_denoiser_preset(CRED_SOURCE_DIR "/config/denoisers.json", CRED_DENOISER_TV_ROF,
                               "level-7", &strength) == CRED_ERR_INVALID_ARGUMENT);
    CHECK(cred_denoiser_preset("nowhere.json", CRED_DENOISER_TV_ROF, "level-1", &strength) ==
          CRED_ERR_IO);
}

TEST_CASE("simulate is deterministic and restore improves the data") {
    Img gt;
    REQUIRE(cred_phantom("edges", 64, &gt.p) == CRED_OK);

    Img b1, b2;
    Blur op;
    REQUIRE(cred_simulate(gt.p, 1.0, 25.0, 7, &b1.p, &op.p) == CRED_OK);
    REQUIRE(cred_simulate(gt.p, 1.0, 25.0, 7, &b2.p, nullptr) == CRED_OK);
    CHECK(std::memcmp(cred_image_data(b1.p), cred_image_data(b2.p),
                      64 * 64 * sizeof(double)) == 0);

    cred_solver_params params;
    cred_solver_params_init(&params);
    CHECK(params.tau == 0.98);
    CHECK(params.max_iter == 200);
    params.sigma_eta = 25.0;

    Img x;
    cred_run_report report;
    REQUIRE(cred_restore(op.p, b1.p, &params, nullptr, &x.p, &report) == CRED_OK);
    CHECK(report.iterations >= 2);
    CHECK(report.sigma_xstar > 0.0);

    double psnr_in = 0.0, psnr_out = 0.0;
    REQUIRE(cred_psnr(b1.p, gt.p, 255.0, &psnr_in) == CRED_OK);
    REQUIRE(cred_psnr(x.p, gt.p, 255.0, &psnr_out) == CRED_OK);
    CHECK(psnr_out > psnr_in + 2.0);

    double s = 0.0;
    REQUIRE(cred_ssim(x.p, gt.p, &s) == CRED_OK);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);

    double sigma_x = 0.0;
    REQUIRE(cred_sigma_discrepancy(op.p, x.p, b1.p, &sigma_x) == CRED_OK);
    CHECK(sigma_x == doctest::Approx(report.sigma_xstar).epsilon(1e-12));

    double sigma_est = 0.0;
    REQUIRE(cred_estimate_sigma(b1.p, &sigma_est) == CRED_OK);
    CHECK(sigma_est > 15.0);
    CHECK(sigma_est < 40.0);
}

TEST_CASE("null arguments are rejected, not crashed on") {
    CHECK(cred_image_load_pgm(nullptr, nullptr) == CRED_ERR_INVALID_ARGUMENT);
    CHECK(cred_estimate_sigma(nullptr, nullptr) == CRED_ERR_INVALID_ARGUMENT);
    CHECK(cred_sweep_run(nullptr, nullptr) == CRED_ERR_INVALID_ARGUMENT);
    cred_image_free(nullptr);  // must be a no-op
    cred_blur_free(nullptr);
}
