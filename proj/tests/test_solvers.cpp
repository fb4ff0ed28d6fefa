#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>

#include "errors.hpp"
#include "harness.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "phantoms.hpp"
#include "solvers.hpp"

using namespace cred;

namespace {

// gaussian_smooth with vanishing sigma degenerates to the exact identity map.
const DenoiserSpec kIdentityDenoiser{DenoiserKind::gaussian_smooth, 1e-12};

}  // namespace

TEST_CASE("project_ball basics") {
    Image v(4, 4, 0.75);  // norm 3
    CHECK(norm2(v) == doctest::Approx(3.0));
    const Image same = project_ball(v, 5.0);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(same[i] == v[i]);

    Image w(4, 4, 2.5);  // norm 10
    const Image scaled = project_ball(w, 5.0);
    CHECK(norm2(scaled) == doctest::Approx(5.0).epsilon(1e-12));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(scaled[i] == doctest::Approx(1.25));

    CHECK_THROWS_AS(project_ball(v, -1.0), std::invalid_argument);
}

TEST_CASE("project_ball is idempotent and 1-Lipschitz") {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 7);
        const Image u = oracle::random_image(n, n, gen, -100.0, 100.0);
        const Image v = oracle::random_image(n, n, gen, -100.0, 100.0);
        const double delta = (gen() % 2 == 0) ? 0.0 : static_cast<double>(gen() % 1000) / 10.0;

        const Image pu = project_ball(u, delta);
        const Image ppu = project_ball(pu, delta);
        REQUIRE(std::memcmp(pu.data(), ppu.data(), pu.size() * sizeof(double)) == 0);

        const Image pv = project_ball(v, delta);
        CHECK(norm2(sub(pu, pv)) <= norm2(sub(u, v)) + 1e-12);
    }
}

TEST_CASE("stopping_check") {
    const Image a(8, 8, 10.0);
    CHECK(stopping_check(a, a, 1e-12));

    Image b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 10.0 * 1e-3 / 8.0;  // rel change 1e-3
    CHECK_FALSE(stopping_check(b, a, 1e-4));
    CHECK(stopping_check(b, a, 1e-2));

    const Image zeros(8, 8, 0.0);
    CHECK(stopping_check(zeros, zeros, 1e-4));  // absolute fallback
}

TEST_CASE("cred: delta 0 with the identity operator pins x to b") {
    const Image gt = make_phantom("blobs", 32);
    auto [b, op] = harness::simulate(gt, 0.0, 10.0, 3);
    CredConfig cfg;
    cfg.tau = 0.0;  // delta = 0
    cfg.sigma_eta = 10.0;
    const SolveResult res = cred_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    CHECK(norm2(sub(res.x, b)) / norm2(b) < 1e-3);
}

TEST_CASE("cred: inactive constraint converges with residual below delta") {
    const Image gt = make_phantom("blobs", 32);
    const BlurOperator op = BlurOperator::build(1.0, 32, 32);
    const Image b = op.apply(gt);  // noiseless
    CredConfig cfg;
    cfg.sigma_eta = 1e6;  // huge ball: constraint never active
    const SolveResult res = cred_solve(op, b, {DenoiserKind::gaussian_smooth, 1.0}, cfg);
    CHECK(res.report.final_residual < cfg.delta(b.size()));
    CHECK(res.report.iterations <= cfg.max_iter);
}

TEST_CASE("cred: seeded instance hits the constraint boundary and improves PSNR") {
    const Image gt = make_phantom("edges", 64);
    auto [b, op] = harness::simulate(gt, 1.0, 25.0, 7);
    CredConfig cfg;
    cfg.sigma_eta = 25.0;
    const SolveResult res = cred_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    const double delta = cfg.delta(b.size());
    CHECK(res.report.final_residual >= 0.95 * delta);
    CHECK(res.report.final_residual <= 1.05 * delta);
    CHECK(psnr(res.x, gt) > psnr(b, gt) + 2.0);

    // primal consistency at convergence
    CHECK(res.report.primal_gap_r / std::max(1.0, norm2(b)) < 10.0 * cfg.tol);
    CHECK(res.report.primal_gap_t / std::max(1.0, norm2(res.x)) < 10.0 * cfg.tol);
    // feasibility of the r iterate is structural; the residual itself obeys
    // the ball radius up to the primal gap
    CHECK(res.report.final_residual <= delta + res.report.primal_gap_r + 1e-9);
}

TEST_CASE("cred: gamma 1 with the identity denoiser terminates feasibly") {
    const Image gt = make_phantom("checker", 32);
    auto [b, op] = harness::simulate(gt, 1.0, 15.0, 5);
    CredConfig cfg;
    cfg.sigma_eta = 15.0;
    cfg.gamma = 1.0;
    const SolveResult res = cred_solve(op, b, kIdentityDenoiser, cfg);
    const double delta = cfg.delta(b.size());
    CHECK(res.report.final_residual <= delta * (1.0 + 1e-6) + res.report.primal_gap_r);
    CHECK(res.report.iterations <= cfg.max_iter);
}

TEST_CASE("cred: identical inputs give bit-identical outputs") {
    const Image gt = make_phantom("edges", 32);
    auto [b, op] = harness::simulate(gt, 1.0, 25.0, 9);
    CredConfig cfg;
    cfg.sigma_eta = 25.0;
    const SolveResult r1 = cred_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    const SolveResult r2 = cred_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    REQUIRE(r1.report.iterations == r2.report.iterations);
    REQUIRE(r1.report.final_residual == r2.report.final_residual);
    REQUIRE(std::memcmp(r1.x.data(), r2.x.data(), r1.x.size() * sizeof(double)) == 0);
}

TEST_CASE("red: lambda 0 collapses to least squares") {
    const Image gt = make_phantom("blobs", 64);
    auto [b, op] = harness::simulate(gt, 0.5, 10.0, 4);
    RedConfig cfg;
    cfg.lambda = 0.0;
    cfg.beta = 0.05;
    cfg.tol = 1e-10;
    cfg.max_iter = 400;
    const SolveResult res = red_admm_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    CHECK(res.report.final_residual / norm2(b) < 1e-6);
}

TEST_CASE("red: very large lambda drives x toward a denoiser fixed point") {
    const Image gt = make_phantom("blobs", 32);
    auto [b, op] = harness::simulate(gt, 1.0, 10.0, 6);
    RedConfig cfg;
    cfg.lambda = 1e4;
    cfg.beta = 1.0;
    const DenoiserSpec f{DenoiserKind::gaussian_smooth, 1.0};
    const SolveResult res = red_admm_solve(op, b, f, cfg);
    const Image fx = denoise(f, res.x);
    CHECK(norm2(sub(res.x, fx)) / norm2(res.x) < 1e-2);
}

TEST_CASE("redpro: alpha 0 is plain diminishing-step gradient descent") {
    const Image gt = make_phantom("edges", 32);
    auto [b, op] = harness::simulate(gt, 1.0, 20.0, 8);
    RedProConfig cfg;
    cfg.alpha = 0.0;
    cfg.mu = 0.5;  // below 1/||A||^2 = 1
    cfg.record_trace = true;
    cfg.max_iter = 50;
    const SolveResult res = red_pro_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
    REQUIRE(res.report.trace.size() >= 10);
    for (std::size_t k = 1; k < 10; ++k) {
        CHECK(res.report.trace[k].residual <= res.report.trace[k - 1].residual * (1.0 + 1e-12));
    }
}

TEST_CASE("redpro: a noiseless constant instance stops immediately") {
    const Image gt(32, 32, 99.0);
    const BlurOperator op = BlurOperator::build(1.0, 32, 32);
    const Image b = op.apply(gt);  // constants are fixed points of A
    RedProConfig cfg;
    cfg.alpha = 0.5;
    cfg.mu = 0.5;
    const SolveResult res = red_pro_solve(op, b, {DenoiserKind::median, 1.0}, cfg, &gt);
    CHECK(res.report.iterations == 1);
    CHECK(res.report.stop_reason == StopReason::tolerance);
}

TEST_CASE("redpro: an absurd steplength raises DivergenceError naming the iteration") {
    const Image gt = make_phantom("edges", 32);
    auto [b, op] = harness::simulate(gt, 1.0, 25.0, 2);
    RedProConfig cfg;
    cfg.alpha = 0.0;
    cfg.mu = 1e150;
    try {
        (void)red_pro_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration >= 1);
        CHECK(std::string(e.what()).find("iteration") != std::string::npos);
    }
}

TEST_CASE("solvers reject shape mismatches") {
    const BlurOperator op = BlurOperator::build(1.0, 16, 16);
    const Image b(8, 8, 1.0);
    CredConfig cfg;
    cfg.sigma_eta = 1.0;
    CHECK_THROWS_AS((void)cred_solve(op, b, {DenoiserKind::tv_rof, 16.0}, cfg), ShapeError);
    const Image good(16, 16, 1.0);
    const Image bad_x0(8, 8, 1.0);
    CHECK_THROWS_AS((void)cred_solve(op, good, {DenoiserKind::tv_rof, 16.0}, cfg, &bad_x0),
                    ShapeError);
}

TEST_CASE("config validation") {
    CredConfig c;
    c.tau = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    RedConfig r;
    r.lambda = -1.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.lambda = 0.0;  // explicitly allowed (pure least squares)
    CHECK_NOTHROW(r.validate());
    RedProConfig p;
    p.alpha = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
