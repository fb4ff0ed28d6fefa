#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "harness.hpp"
#include "json.hpp"
#include "noise_estimation.hpp"
#include "phantoms.hpp"
#include "rng.hpp"

using namespace cred;
using namespace cred::harness;
namespace fs = std::filesystem;

#ifndef CRED_SOURCE_DIR
#define CRED_SOURCE_DIR "."
#endif

namespace {

ExperimentConfig tiny_tau_config() {
    const std::string text = R"({
        "images": [{"phantom": "blobs", "size": 32}],
        "sigma_a": 1.0, "sigma_eta": 20.0, "seed": 5,
        "scenario": "idealized",
        "denoiser": {"kind": "tv_rof", "strength": 16.0},
        "solvers": {"cred": {"max_iter": 60}},
        "sweep": {"type": "tau", "tau_values": [0.5, 0.9]},
        "threads": 1
    })";
    return ExperimentConfig::from_json_text(text, "");
}

}  // namespace

TEST_CASE("simulate: noiseless data equals the blurred ground truth exactly") {
    const Image gt = make_phantom("edges", 32);
    auto [b, op] = simulate(gt, 1.0, 0.0, 1);
    const Image blurred = op.apply(gt);
    REQUIRE(b.size() == blurred.size());
    CHECK(std::memcmp(b.data(), blurred.data(), b.size() * sizeof(double)) == 0);
}

TEST_CASE("simulate: injected noise has the requested standard deviation") {
    const Image gt = make_phantom("texture", 256);
    auto [b, op] = simulate(gt, 1.0, 25.0, 11);
    const Image clean = op.apply(gt);
    double mean = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) mean += b[i] - clean[i];
    mean /= static_cast<double>(b.size());
    double var = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = b[i] - clean[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(b.size() - 1);
    CHECK(std::abs(std::sqrt(var) - 25.0) / 25.0 < 0.03);
}

TEST_CASE("simulate: the same seed reproduces bit-identical data") {
    const Image gt = make_phantom("bars", 48);
    auto [b1, op1] = simulate(gt, 1.2, 30.0, 21);
    auto [b2, op2] = simulate(gt, 1.2, 30.0, 21);
    CHECK(std::memcmp(b1.data(), b2.data(), b1.size() * sizeof(double)) == 0);
}

TEST_CASE("image spec ids round trip") {
    ImageSpec file;
    file.path = "data/some image.pgm";
    CHECK(ImageSpec::from_id(file.id()).path == file.path);

    ImageSpec ph;
    ph.phantom = "edges";
    ph.size = 96;
    const ImageSpec back = ImageSpec::from_id(ph.id());
    CHECK(back.phantom == "edges");
    CHECK(back.size == 96);
    CHECK(back.path.empty());
}

TEST_CASE("raw f64 image round trip is exact") {
    const Image noise = gaussian_noise(17, 9, 25.0, 3);
    save_raw_f64(noise, "noise_rt.f64");
    const Image back = load_raw_f64("noise_rt.f64");
    REQUIRE(back.same_shape(noise));
    CHECK(std::memcmp(back.data(), noise.data(), noise.size() * sizeof(double)) == 0);
    fs::remove("noise_rt.f64");
}

TEST_CASE("csv rows round trip, including quoting and unset fields") {
    RunRow r;
    r.row = 3;
    r.image_id = "phantom:edges:64";
    r.solver = "cred";
    r.denoiser = "tv_rof";
    r.denoiser_strength = 16.0;
    r.scenario = "idealized";
    r.sigma_a = 1.0;
    r.sigma_eta_true = 25.0;
    r.sigma_eta_used = 25.0;
    r.seed = 1234567890123ULL;
    r.tau = 0.98;
    r.gamma = 1.01;
    r.beta_r0 = 1.0;
    r.beta_t0 = 1.0;
    r.tol = 1e-4;
    r.max_iter = 200;
    r.iterations = 81;
    r.stop_reason = "tolerance";
    r.residual = 1564.0329999999999;
    r.sigma_xstar = 24.440899999999999;
    r.psnr_input = 18.61;
    r.psnr = 25.65;
    r.ssim = 0.83;
    r.re_sigma = 0.0224;
    r.error = "contains, comma and \"quotes\"";

    const RunRow back = parse_csv_row(to_csv_row(r));
    CHECK(rows_equal(back, r));

    RunRow sparse;
    sparse.row = 0;
    sparse.image_id = "a.pgm";
    sparse.solver = "red";
    sparse.denoiser = "median";
    sparse.denoiser_strength = 1.0;
    sparse.scenario = "realistic";
    sparse.lambda = 2.5;
    sparse.beta = 1.0;
    sparse.inner_steps = 1;
    const RunRow sback = parse_csv_row(to_csv_row(sparse));
    CHECK(rows_equal(sback, sparse));
    CHECK(std::isnan(sback.tau));
}

TEST_CASE("config parsing applies defaults, presets and validation") {
    const std::string text = R"({
        "images": [{"phantom": "edges", "size": 48}, "some/file.pgm"],
        "sigma_a": 1.2, "sigma_eta": 30.0, "seed": 9,
        "scenario": "both",
        "denoiser": {"kind": "dct_threshold", "level": "level-2"},
        "solvers": {"cred": {"tau": 0.9, "max_iter": 150}, "red": {"lambda": 2.0}},
        "sweep": {"type": "penalties", "gamma_values": [1.0, 1.05]},
        "output_dir": "outdir",
        "threads": 2
    })";
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(text, CRED_SOURCE_DIR);
    CHECK(cfg.images.size() == 2);
    CHECK(cfg.images[0].phantom == "edges");
    CHECK(cfg.images[1].path == "some/file.pgm");
    CHECK(cfg.degradations.size() == 1);
    CHECK(cfg.degradations[0].sigma_a == 1.2);
    CHECK(cfg.scenarios.size() == 2);
    CHECK(cfg.denoiser.kind == DenoiserKind::dct_threshold);
    CHECK(cfg.denoiser.strength == 90.0);  // level-2 from the shipped presets
    CHECK(cfg.cred.tau == 0.9);
    CHECK(cfg.cred.max_iter == 150);
    CHECK(cfg.red.lambda == 2.0);
    CHECK(cfg.sweep.type == SweepSpec::Type::penalties);
    CHECK(cfg.sweep.gamma_values == std::vector<double>{1.0, 1.05});
    CHECK(cfg.sweep.beta_values.size() == 5);  // filled default grid

    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{not json", ""), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"images": []})", ""),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text(
            R"({"images": ["x.pgm"], "sweep": {"type": "upside-down"}})", ""),
        ParseError);
}

TEST_CASE("tau sweep produces one deterministically ordered row per grid point") {
    const ExperimentConfig cfg = tiny_tau_config();
    const SweepResult r1 = run_sweep(cfg);
    REQUIRE(r1.rows.size() == 2);
    CHECK(r1.rows[0].tau == 0.5);
    CHECK(r1.rows[1].tau == 0.9);
    CHECK(r1.rows[0].row == 0);
    CHECK(r1.rows[1].row == 1);
    for (const RunRow& row : r1.rows) {
        CHECK(row.error.empty());
        CHECK(row.iterations >= 1);
        CHECK(row.seed != 0);
        CHECK(row.stop_reason != "");
    }

    // end-to-end determinism: identical config -> byte-identical rows
    const SweepResult r2 = run_sweep(cfg);
    REQUIRE(r2.rows.size() == r1.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(to_csv_row(r1.rows[i]) == to_csv_row(r2.rows[i]));
    }

    // worker-pool execution must not change the output ordering or bytes
    ExperimentConfig pooled = cfg;
    pooled.threads = 2;
    const SweepResult r3 = run_sweep(pooled);
    REQUIRE(r3.rows.size() == r1.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(to_csv_row(r3.rows[i]) == to_csv_row(r1.rows[i]));
    }
}

TEST_CASE("a failing image becomes an error row without aborting the sweep") {
    ExperimentConfig cfg = tiny_tau_config();
    ImageSpec missing;
    missing.path = "no/such/file.pgm";
    cfg.images.push_back(missing);
    cfg.sweep.tau_values = {0.9};
    const SweepResult res = run_sweep(cfg);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.rows[0].error.empty());
    CHECK_FALSE(res.rows[1].error.empty());
    CHECK(std::isnan(res.rows[1].psnr));
}

TEST_CASE("realistic scenario records the estimated noise level") {
    ExperimentConfig cfg = tiny_tau_config();
    cfg.scenarios = {Scenario::realistic};
    cfg.sweep.tau_values = {0.9};
    const SweepResult res = run_sweep(cfg);
    REQUIRE(res.rows.size() == 1);
    const RunRow& row = res.rows[0];

    const Image gt = make_phantom("blobs", 32);
    auto [b, op] = simulate(gt, row.sigma_a, row.sigma_eta_true, row.seed);
    CHECK(row.sigma_eta_used == estimate_sigma(b).sigma);
    CHECK(row.sigma_eta_used != row.sigma_eta_true);
}

TEST_CASE("write_report emits csv, json summary and plot data") {
    const ExperimentConfig cfg = tiny_tau_config();
    const SweepResult res = run_sweep(cfg);
    const std::string dir = "report_out";
    fs::remove_all(dir);
    write_report(res, cfg, dir);

    REQUIRE(fs::exists(fs::path(dir) / "runs.csv"));
    REQUIRE(fs::exists(fs::path(dir) / "summary.json"));
    REQUIRE(fs::exists(fs::path(dir) / "tau_sigma_idealized.dat"));
    REQUIRE(fs::exists(fs::path(dir) / "tau_psnr_idealized.dat"));

    const std::vector<RunRow> parsed = read_csv((fs::path(dir) / "runs.csv").string());
    REQUIRE(parsed.size() == res.rows.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(rows_equal(parsed[i], res.rows[i]));

    std::ifstream in(fs::path(dir) / "summary.json");
    nlohmann::json summary;
    in >> summary;
    CHECK(summary["sweep_type"] == "tau");
    CHECK(summary["groups"].size() == 2);  // one group per tau value

    fs::remove_all(dir);
}

TEST_CASE("replay reproduces a recorded row byte-identically") {
    const ExperimentConfig cfg = tiny_tau_config();
    const SweepResult res = run_sweep(cfg);
    const std::string dir = "replay_out";
    fs::remove_all(dir);
    write_report(res, cfg, dir);

    for (const RunRow& row : res.rows) {
        const ReplayResult rep = replay_row((fs::path(dir) / "runs.csv").string(), row.row);
        CHECK(rep.identical);
        CHECK(rows_equal(rep.replayed, row));
    }
    CHECK_THROWS_AS(replay_row((fs::path(dir) / "runs.csv").string(), 99),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("baselines sweep covers the requested grids and supports selection") {
    const std::string text = R"({
        "images": [{"phantom": "edges", "size": 32}],
        "sigma_a": 1.0, "sigma_eta": 20.0, "seed": 6,
        "scenario": "idealized",
        "denoiser": {"kind": "tv_rof", "strength": 16.0},
        "solvers": {"cred": {"max_iter": 40}, "red": {"max_iter": 40}, "redpro": {"max_iter": 40}},
        "sweep": {"type": "baselines",
                  "lambda_values": [0.5, 1.0],
                  "alpha_values": [0.4], "mu_values": [0.4, 0.6],
                  "beta_values": [0.5, 1.0]},
        "threads": 1
    })";
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(text, "");
    const SweepResult res = run_sweep(cfg);
    // red: 2 lambdas, redpro: 1x2 (alpha,mu), cred: 2x2 betas
    REQUIRE(res.rows.size() == 2 + 2 + 4);

    const std::string dir = "baselines_out";
    fs::remove_all(dir);
    write_report(res, cfg, dir);
    std::ifstream in(fs::path(dir) / "summary.json");
    nlohmann::json summary;
    in >> summary;
    REQUIRE(summary.contains("selection"));
    CHECK(summary["selection"].size() == 3);  // one per solver
    REQUIRE(summary.contains("table3"));
    CHECK(summary["table3"].size() == 3);
    CHECK(fs::exists(fs::path(dir) / "red_lambda_psnr.dat"));
    CHECK(fs::exists(fs::path(dir) / "redpro_alpha_psnr.dat"));
    CHECK(fs::exists(fs::path(dir) / "cred_beta_psnr.dat"));
    fs::remove_all(dir);
}

TEST_CASE("single-point sweep with write_images saves restored PGMs") {
    ExperimentConfig cfg = tiny_tau_config();
    cfg.sweep.type = SweepSpec::Type::single;
    cfg.sweep.solvers = {SolverKind::cred};
    cfg.write_images = true;
    cfg.output_dir = "single_out";
    fs::remove_all(cfg.output_dir);
    const SweepResult res = run_sweep(cfg);
    REQUIRE(res.rows.size() == 1);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "images" / "row0_cred.pgm"));
    fs::remove_all(cfg.output_dir);
}
