#include "harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "json.hpp"
#include "metrics.hpp"
#include "noise_estimation.hpp"
#include "phantoms.hpp"
#include "rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cred::harness {

// ---------------------------------------------------------------------------
// enums & specs
// ---------------------------------------------------------------------------

const char* to_string(Scenario s) { return s == Scenario::idealized ? "idealized" : "realistic"; }

Scenario scenario_from_string(std::string_view name) {
    if (name == "idealized") return Scenario::idealized;
    if (name == "realistic") return Scenario::realistic;
    throw ParseError("unknown scenario '" + std::string(name) + "'");
}

const char* to_string(SolverKind s) {
    switch (s) {
        case SolverKind::cred: return "cred";
        case SolverKind::red: return "red";
        case SolverKind::redpro: return "redpro";
    }
    return "?";
}

SolverKind solver_from_string(std::string_view name) {
    if (name == "cred") return SolverKind::cred;
    if (name == "red") return SolverKind::red;
    if (name == "redpro") return SolverKind::redpro;
    throw ParseError("unknown solver '" + std::string(name) + "'");
}

const char* to_string(SweepSpec::Type t) {
    switch (t) {
        case SweepSpec::Type::single: return "single";
        case SweepSpec::Type::tau: return "tau";
        case SweepSpec::Type::penalties: return "penalties";
        case SweepSpec::Type::baselines: return "baselines";
    }
    return "?";
}

std::string ImageSpec::id() const {
    if (!path.empty()) return path;
    return "phantom:" + phantom + ":" + std::to_string(size);
}

ImageSpec ImageSpec::from_id(const std::string& id) {
    ImageSpec spec;
    if (id.rfind("phantom:", 0) == 0) {
        const std::string rest = id.substr(8);
        const std::size_t colon = rest.rfind(':');
        if (colon == std::string::npos) throw ParseError("bad phantom id '" + id + "'");
        spec.phantom = rest.substr(0, colon);
        try {
            spec.size = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParseError("bad phantom size in id '" + id + "'");
        }
    } else {
        spec.path = id;
    }
    return spec;
}

Image ImageSpec::load() const {
    if (!path.empty()) return load_pgm(path);
    return make_phantom(phantom, size);
}

void SweepSpec::fill_defaults() {
    if (type == Type::tau && tau_values.empty()) {
        for (int i = 0; i <= 10; ++i) tau_values.push_back(i / 10.0);
    }
    if (type == Type::penalties) {
        if (beta_values.empty()) beta_values = {0.2, 0.4, 0.6, 0.8, 1.0};
        if (gamma_values.empty()) gamma_values = {1.0, 1.01, 1.05};
    }
    if (type == Type::baselines) {
        if (solvers.empty()) solvers = {SolverKind::red, SolverKind::redpro, SolverKind::cred};
        if (lambda_values.empty()) {
            for (int i = 0; i < 25; ++i) lambda_values.push_back(0.5 + 4.5 * i / 24.0);
        }
        if (alpha_values.empty()) alpha_values = {0.3, 0.4, 0.5, 0.6, 0.7};
        if (mu_values.empty()) mu_values = {0.3, 0.4, 0.5, 0.6, 0.7};
        if (beta_values.empty()) beta_values = {0.2, 0.4, 0.6, 0.8, 1.0};
    }
    if (type == Type::single && solvers.empty()) solvers = {SolverKind::cred};
}

void ExperimentConfig::validate() const {
    if (images.empty()) throw std::invalid_argument("ExperimentConfig: no input images");
    if (degradations.empty()) throw std::invalid_argument("ExperimentConfig: no degradations");
    if (scenarios.empty()) throw std::invalid_argument("ExperimentConfig: no scenarios");
    denoiser.validate();
    cred.validate();
    red.validate();
    redpro.validate();
    for (const auto& d : degradations) {
        if (!(d.sigma_a >= 0.0) || !(d.sigma_eta >= 0.0)) {
            throw std::invalid_argument("ExperimentConfig: degradations must be non-negative");
        }
    }
}

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

namespace {

std::vector<double> json_doubles(const json& j, const char* key) {
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

void parse_cred_block(const json& j, CredConfig& c) {
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("beta_r0")) c.beta_r0 = j["beta_r0"].get<double>();
    if (j.contains("beta_t0")) c.beta_t0 = j["beta_t0"].get<double>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
}

void parse_red_block(const json& j, RedConfig& c) {
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("inner_steps")) c.inner_denoise_steps = j["inner_steps"].get<int>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
}

void parse_redpro_block(const json& j, RedProConfig& c) {
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("decay")) c.decay = j["decay"].get<double>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& dir_hint) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }

    ExperimentConfig cfg;
    try {
        if (doc.contains("images")) {
            for (const auto& item : doc["images"]) {
                ImageSpec spec;
                if (item.is_string()) {
                    spec.path = item.get<std::string>();
                } else {
                    if (item.contains("path")) spec.path = item["path"].get<std::string>();
                    if (item.contains("phantom")) spec.phantom = item["phantom"].get<std::string>();
                    if (item.contains("size")) spec.size = item["size"].get<int>();
                }
                cfg.images.push_back(std::move(spec));
            }
        }

        if (doc.contains("degradations")) {
            for (const auto& item : doc["degradations"]) {
                cfg.degradations.push_back(
                    {item.at("sigma_a").get<double>(), item.at("sigma_eta").get<double>()});
            }
        } else {
            Degradation d;
            if (doc.contains("sigma_a")) d.sigma_a = doc["sigma_a"].get<double>();
            if (doc.contains("sigma_eta")) d.sigma_eta = doc["sigma_eta"].get<double>();
            cfg.degradations.push_back(d);
        }

        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();

        if (doc.contains("scenarios")) {
            for (const auto& s : doc["scenarios"]) {
                cfg.scenarios.push_back(scenario_from_string(s.get<std::string>()));
            }
        } else if (doc.contains("scenario")) {
            const std::string s = doc["scenario"].get<std::string>();
            if (s == "both") {
                cfg.scenarios = {Scenario::idealized, Scenario::realistic};
            } else {
                cfg.scenarios = {scenario_from_string(s)};
            }
        } else {
            cfg.scenarios = {Scenario::idealized};
        }

        if (doc.contains("denoiser")) {
            const json& d = doc["denoiser"];
            cfg.denoiser.kind = denoiser_kind_from_string(d.at("kind").get<std::string>());
            if (d.contains("strength")) {
                cfg.denoiser.strength = d["strength"].get<double>();
            } else if (d.contains("level")) {
                cfg.denoiser_level = d["level"].get<std::string>();
                std::string presets_path =
                    doc.value("presets", std::string("config/denoisers.json"));
                if (!dir_hint.empty() && !fs::path(presets_path).is_absolute() &&
                    !fs::exists(presets_path) && fs::exists(fs::path(dir_hint) / presets_path)) {
                    presets_path = (fs::path(dir_hint) / presets_path).string();
                }
                cfg.denoiser.strength =
                    DenoiserPresets::load(presets_path).strength(cfg.denoiser.kind,
                                                                 cfg.denoiser_level);
            }
        }

        if (doc.contains("solvers") && doc["solvers"].is_object()) {
            const json& s = doc["solvers"];
            if (s.contains("cred")) parse_cred_block(s["cred"], cfg.cred);
            if (s.contains("red")) parse_red_block(s["red"], cfg.red);
            if (s.contains("redpro")) parse_redpro_block(s["redpro"], cfg.redpro);
        }

        if (doc.contains("sweep")) {
            const json& s = doc["sweep"];
            const std::string type = s.value("type", std::string("single"));
            if (type == "single") cfg.sweep.type = SweepSpec::Type::single;
            else if (type == "tau") cfg.sweep.type = SweepSpec::Type::tau;
            else if (type == "penalties") cfg.sweep.type = SweepSpec::Type::penalties;
            else if (type == "baselines") cfg.sweep.type = SweepSpec::Type::baselines;
            else throw ParseError("unknown sweep type '" + type + "'");
            if (s.contains("tau_values")) cfg.sweep.tau_values = json_doubles(s, "tau_values");
            if (s.contains("gamma_values")) cfg.sweep.gamma_values = json_doubles(s, "gamma_values");
            if (s.contains("beta_values")) cfg.sweep.beta_values = json_doubles(s, "beta_values");
            if (s.contains("lambda_values")) {
                cfg.sweep.lambda_values = json_doubles(s, "lambda_values");
            }
            if (s.contains("alpha_values")) cfg.sweep.alpha_values = json_doubles(s, "alpha_values");
            if (s.contains("mu_values")) cfg.sweep.mu_values = json_doubles(s, "mu_values");
            if (s.contains("solvers")) {
                for (const auto& v : s["solvers"]) {
                    cfg.sweep.solvers.push_back(solver_from_string(v.get<std::string>()));
                }
            }
            if (s.contains("auto_tune")) cfg.sweep.auto_tune = s["auto_tune"].get<bool>();
        }

        if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
        if (doc.contains("write_images")) cfg.write_images = doc["write_images"].get<bool>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }

    cfg.sweep.fill_defaults();
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// simulation
// ---------------------------------------------------------------------------

std::pair<Image, BlurOperator> simulate(const Image& gt, double sigma_a, double sigma_eta,
                                        std::uint64_t seed) {
    BlurOperator op = BlurOperator::build(sigma_a, gt.width(), gt.height());
    Image b = op.apply(gt);
    if (sigma_eta > 0.0) {
        const Image eta = gaussian_noise(gt.width(), gt.height(), sigma_eta, seed);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += eta[i];
    }
    return {std::move(b), std::move(op)};
}

void save_raw_f64(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "CREDF64\n" << img.width() << " " << img.height() << "\n";
    out.write(reinterpret_cast<const char*>(img.data()),
              static_cast<std::streamsize>(img.size() * sizeof(double)));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Image load_raw_f64(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string magic;
    std::getline(in, magic);
    if (magic != "CREDF64") throw ParseError("'" + path + "' is not a CREDF64 file");
    int w = 0, h = 0;
    in >> w >> h;
    in.get();  // newline
    if (w < 1 || h < 1) throw ParseError("CREDF64: bad dimensions");
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != data.size() * sizeof(double)) {
        throw ParseError("CREDF64: truncated payload");
    }
    return Image(w, h, std::move(data));
}

// ---------------------------------------------------------------------------
// single-run execution
// ---------------------------------------------------------------------------

namespace {

void clear_results(RunRow& row) {
    row.iterations = 0;
    row.stop_reason.clear();
    row.residual = RunRow::kUnset;
    row.sigma_xstar = RunRow::kUnset;
    row.psnr_input = RunRow::kUnset;
    row.psnr = RunRow::kUnset;
    row.ssim = RunRow::kUnset;
    row.re_sigma = RunRow::kUnset;
}

}  // namespace

RunRow execute_run(const RunRow& request, const std::string& image_out) {
    RunRow row = request;
    clear_results(row);
    row.error.clear();
    try {
        const ImageSpec spec = ImageSpec::from_id(row.image_id);
        const Image gt = spec.load();
        auto [b, op] = simulate(gt, row.sigma_a, row.sigma_eta_true, row.seed);

        const Scenario sc = scenario_from_string(row.scenario);
        row.sigma_eta_used =
            sc == Scenario::realistic ? estimate_sigma(b).sigma : row.sigma_eta_true;

        const DenoiserSpec f{denoiser_kind_from_string(row.denoiser), row.denoiser_strength};
        const SolverKind solver = solver_from_string(row.solver);

        SolveResult res;
        switch (solver) {
            case SolverKind::cred: {
                CredConfig c;
                c.tau = row.tau;
                c.sigma_eta = row.sigma_eta_used;
                c.gamma = row.gamma;
                c.beta_r0 = row.beta_r0;
                c.beta_t0 = row.beta_t0;
                c.tol = row.tol;
                c.max_iter = row.max_iter;
                res = cred_solve(op, b, f, c);
                break;
            }
            case SolverKind::red: {
                RedConfig c;
                c.lambda = row.lambda;
                c.beta = row.beta;
                c.inner_denoise_steps = row.inner_steps;
                c.tol = row.tol;
                c.max_iter = row.max_iter;
                res = red_admm_solve(op, b, f, c);
                break;
            }
            case SolverKind::redpro: {
                RedProConfig c;
                c.alpha = row.alpha;
                c.mu = row.mu;
                c.decay = row.decay;
                c.tol = row.tol;
                c.max_iter = row.max_iter;
                res = red_pro_solve(op, b, f, c);
                break;
            }
        }

        row.iterations = res.report.iterations;
        row.stop_reason = to_string(res.report.stop_reason);
        row.residual = res.report.final_residual;
        row.sigma_xstar = res.report.sigma_xstar;
        row.psnr_input = psnr(b, gt);
        row.psnr = psnr(res.x, gt);
        if (std::min(gt.width(), gt.height()) >= 11) row.ssim = ssim(res.x, gt);
        if (row.sigma_eta_true > 0.0) {
            row.re_sigma = relative_error(row.sigma_eta_true, row.sigma_xstar);
        }
        if (!image_out.empty()) save_pgm(res.x, image_out);
    } catch (const std::exception& e) {
        clear_results(row);
        row.error = e.what();
    }
    return row;
}

// ---------------------------------------------------------------------------
// sweep enumeration
// ---------------------------------------------------------------------------

namespace {

RunRow base_row(const ExperimentConfig& cfg, std::size_t image_idx, std::size_t deg_idx,
                Scenario sc) {
    RunRow r;
    r.image_id = cfg.images[image_idx].id();
    r.denoiser = to_string(cfg.denoiser.kind);
    r.denoiser_strength = cfg.denoiser.strength;
    r.scenario = to_string(sc);
    r.sigma_a = cfg.degradations[deg_idx].sigma_a;
    r.sigma_eta_true = cfg.degradations[deg_idx].sigma_eta;
    // One simulated instance per (image, degradation): the whole parameter
    // grid sees the same noise realization.
    r.seed = mix_seed(cfg.seed, image_idx * 1009 + deg_idx);
    return r;
}

void set_cred_params(RunRow& r, const CredConfig& c) {
    r.solver = "cred";
    r.tau = c.tau;
    r.gamma = c.gamma;
    r.beta_r0 = c.beta_r0;
    r.beta_t0 = c.beta_t0;
    r.tol = c.tol;
    r.max_iter = c.max_iter;
}

void set_red_params(RunRow& r, const RedConfig& c) {
    r.solver = "red";
    r.lambda = c.lambda;
    r.beta = c.beta;
    r.inner_steps = c.inner_denoise_steps;
    r.tol = c.tol;
    r.max_iter = c.max_iter;
}

void set_redpro_params(RunRow& r, const RedProConfig& c) {
    r.solver = "redpro";
    r.alpha = c.alpha;
    r.mu = c.mu;
    r.decay = c.decay;
    r.tol = c.tol;
    r.max_iter = c.max_iter;
}

SweepResult execute_all(const ExperimentConfig& cfg, SweepSpec::Type type,
                        std::vector<RunRow> requests) {
    SweepResult result;
    result.type = type;
    result.rows.resize(requests.size());
    std::string image_dir;
    if (cfg.write_images) {
        image_dir = (fs::path(cfg.output_dir) / "images").string();
        fs::create_directories(image_dir);
    }
    for (std::size_t i = 0; i < requests.size(); ++i) requests[i].row = static_cast<int>(i);
    const int threads =
        cfg.threads > 0 ? cfg.threads
                        : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    parallel_for(static_cast<int>(requests.size()), threads, [&](int i) {
        std::string out_path;
        if (!image_dir.empty()) {
            out_path = (fs::path(image_dir) /
                        ("row" + std::to_string(i) + "_" + requests[i].solver + ".pgm"))
                           .string();
        }
        result.rows[i] = execute_run(requests[i], out_path);
    });
    return result;
}

}  // namespace

SweepResult sweep_tau(const ExperimentConfig& cfg) {
    std::vector<RunRow> requests;
    for (Scenario sc : cfg.scenarios) {
        for (std::size_t ii = 0; ii < cfg.images.size(); ++ii) {
            for (std::size_t di = 0; di < cfg.degradations.size(); ++di) {
                for (double tau : cfg.sweep.tau_values) {
                    RunRow r = base_row(cfg, ii, di, sc);
                    CredConfig c = cfg.cred;
                    c.tau = tau;
                    set_cred_params(r, c);
                    requests.push_back(std::move(r));
                }
            }
        }
    }
    return execute_all(cfg, SweepSpec::Type::tau, std::move(requests));
}

SweepResult sweep_penalties(const ExperimentConfig& cfg) {
    std::vector<RunRow> requests;
    for (Scenario sc : cfg.scenarios) {
        for (std::size_t ii = 0; ii < cfg.images.size(); ++ii) {
            for (std::size_t di = 0; di < cfg.degradations.size(); ++di) {
                for (double gamma : cfg.sweep.gamma_values) {
                    for (double beta_r : cfg.sweep.beta_values) {
                        for (double beta_t : cfg.sweep.beta_values) {
                            RunRow r = base_row(cfg, ii, di, sc);
                            CredConfig c = cfg.cred;
                            c.gamma = gamma;
                            c.beta_r0 = beta_r;
                            c.beta_t0 = beta_t;
                            set_cred_params(r, c);
                            requests.push_back(std::move(r));
                        }
                    }
                }
            }
        }
    }
    return execute_all(cfg, SweepSpec::Type::penalties, std::move(requests));
}

SweepResult sweep_baselines(const ExperimentConfig& cfg) {
    std::vector<RunRow> requests;
    for (Scenario sc : cfg.scenarios) {
        for (std::size_t ii = 0; ii < cfg.images.size(); ++ii) {
            for (std::size_t di = 0; di < cfg.degradations.size(); ++di) {
                for (SolverKind solver : cfg.sweep.solvers) {
                    switch (solver) {
                        case SolverKind::red:
                            for (double lambda : cfg.sweep.lambda_values) {
                                RunRow r = base_row(cfg, ii, di, sc);
                                RedConfig c = cfg.red;
                                c.lambda = lambda;
                                set_red_params(r, c);
                                requests.push_back(std::move(r));
                            }
                            break;
                        case SolverKind::redpro:
                            for (double alpha : cfg.sweep.alpha_values) {
                                for (double mu : cfg.sweep.mu_values) {
                                    RunRow r = base_row(cfg, ii, di, sc);
                                    RedProConfig c = cfg.redpro;
                                    c.alpha = alpha;
                                    c.mu = mu;
                                    set_redpro_params(r, c);
                                    requests.push_back(std::move(r));
                                }
                            }
                            break;
                        case SolverKind::cred:
                            for (double beta_r : cfg.sweep.beta_values) {
                                for (double beta_t : cfg.sweep.beta_values) {
                                    RunRow r = base_row(cfg, ii, di, sc);
                                    CredConfig c = cfg.cred;
                                    c.beta_r0 = beta_r;
                                    c.beta_t0 = beta_t;
                                    set_cred_params(r, c);
                                    requests.push_back(std::move(r));
                                }
                            }
                            break;
                    }
                }
            }
        }
    }
    return execute_all(cfg, SweepSpec::Type::baselines, std::move(requests));
}

SweepResult sweep_single(const ExperimentConfig& cfg) {
    std::vector<RunRow> requests;
    for (Scenario sc : cfg.scenarios) {
        for (std::size_t ii = 0; ii < cfg.images.size(); ++ii) {
            for (std::size_t di = 0; di < cfg.degradations.size(); ++di) {
                for (SolverKind solver : cfg.sweep.solvers) {
                    RunRow r = base_row(cfg, ii, di, sc);
                    if (solver == SolverKind::cred) set_cred_params(r, cfg.cred);
                    else if (solver == SolverKind::red) set_red_params(r, cfg.red);
                    else set_redpro_params(r, cfg.redpro);
                    requests.push_back(std::move(r));
                }
            }
        }
    }
    return execute_all(cfg, SweepSpec::Type::single, std::move(requests));
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    switch (cfg.sweep.type) {
        case SweepSpec::Type::single: return sweep_single(cfg);
        case SweepSpec::Type::tau: return sweep_tau(cfg);
        case SweepSpec::Type::penalties: return sweep_penalties(cfg);
        case SweepSpec::Type::baselines: return sweep_baselines(cfg);
    }
    throw std::logic_error("run_sweep: unreachable");
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double_field(const std::string& s) {
    if (s.empty()) return RunRow::kUnset;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("bad numeric CSV field '" + s + "'");
    }
    return v;
}

long long parse_int_field(const std::string& s) {
    if (s.empty()) return 0;
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("bad integer CSV field '" + s + "'");
    }
    return v;
}

std::uint64_t parse_uint_field(const std::string& s) {
    if (s.empty()) return 0;
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("bad unsigned CSV field '" + s + "'");
    }
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

std::string csv_header() {
    return "row,image,solver,denoiser,denoiser_strength,scenario,sigma_a,sigma_eta_true,"
           "sigma_eta_used,seed,tau,gamma,beta_r0,beta_t0,lambda,beta,inner_steps,alpha,mu,decay,"
           "tol,max_iter,iterations,stop_reason,residual,sigma_xstar,psnr_input,psnr,ssim,"
           "re_sigma,error";
}

std::string to_csv_row(const RunRow& r) {
    std::ostringstream oss;
    oss << r.row << ',' << csv_escape(r.image_id) << ',' << r.solver << ',' << r.denoiser << ','
        << format_double(r.denoiser_strength) << ',' << r.scenario << ','
        << format_double(r.sigma_a) << ',' << format_double(r.sigma_eta_true) << ','
        << format_double(r.sigma_eta_used) << ',' << r.seed << ',' << format_double(r.tau) << ','
        << format_double(r.gamma) << ',' << format_double(r.beta_r0) << ','
        << format_double(r.beta_t0) << ',' << format_double(r.lambda) << ','
        << format_double(r.beta) << ',' << r.inner_steps << ',' << format_double(r.alpha) << ','
        << format_double(r.mu) << ',' << format_double(r.decay) << ',' << format_double(r.tol)
        << ',' << r.max_iter << ',' << r.iterations << ',' << r.stop_reason << ','
        << format_double(r.residual) << ',' << format_double(r.sigma_xstar) << ','
        << format_double(r.psnr_input) << ',' << format_double(r.psnr) << ','
        << format_double(r.ssim) << ',' << format_double(r.re_sigma) << ','
        << csv_escape(r.error);
    return oss.str();
}

RunRow parse_csv_row(const std::string& line) {
    const std::vector<std::string> f = csv_split(line);
    if (f.size() != 31) {
        throw ParseError("CSV row has " + std::to_string(f.size()) + " fields, expected 31");
    }
    RunRow r;
    int i = 0;
    r.row = static_cast<int>(parse_int_field(f[i++]));
    r.image_id = f[i++];
    r.solver = f[i++];
    r.denoiser = f[i++];
    r.denoiser_strength = parse_double_field(f[i++]);
    r.scenario = f[i++];
    r.sigma_a = parse_double_field(f[i++]);
    r.sigma_eta_true = parse_double_field(f[i++]);
    r.sigma_eta_used = parse_double_field(f[i++]);
    r.seed = parse_uint_field(f[i++]);
    r.tau = parse_double_field(f[i++]);
    r.gamma = parse_double_field(f[i++]);
    r.beta_r0 = parse_double_field(f[i++]);
    r.beta_t0 = parse_double_field(f[i++]);
    r.lambda = parse_double_field(f[i++]);
    r.beta = parse_double_field(f[i++]);
    r.inner_steps = static_cast<int>(parse_int_field(f[i++]));
    r.alpha = parse_double_field(f[i++]);
    r.mu = parse_double_field(f[i++]);
    r.decay = parse_double_field(f[i++]);
    r.tol = parse_double_field(f[i++]);
    r.max_iter = static_cast<int>(parse_int_field(f[i++]));
    r.iterations = static_cast<int>(parse_int_field(f[i++]));
    r.stop_reason = f[i++];
    r.residual = parse_double_field(f[i++]);
    r.sigma_xstar = parse_double_field(f[i++]);
    r.psnr_input = parse_double_field(f[i++]);
    r.psnr = parse_double_field(f[i++]);
    r.ssim = parse_double_field(f[i++]);
    r.re_sigma = parse_double_field(f[i++]);
    r.error = f[i++];
    return r;
}

std::vector<RunRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV '" + path + "'");
    if (line != csv_header()) throw ParseError("unexpected CSV header in '" + path + "'");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line));
    }
    return rows;
}

namespace {

bool double_eq(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return a == b;
}

}  // namespace

bool rows_equal(const RunRow& a, const RunRow& b) {
    return a.row == b.row && a.image_id == b.image_id && a.solver == b.solver &&
           a.denoiser == b.denoiser && double_eq(a.denoiser_strength, b.denoiser_strength) &&
           a.scenario == b.scenario && double_eq(a.sigma_a, b.sigma_a) &&
           double_eq(a.sigma_eta_true, b.sigma_eta_true) &&
           double_eq(a.sigma_eta_used, b.sigma_eta_used) && a.seed == b.seed &&
           double_eq(a.tau, b.tau) && double_eq(a.gamma, b.gamma) &&
           double_eq(a.beta_r0, b.beta_r0) && double_eq(a.beta_t0, b.beta_t0) &&
           double_eq(a.lambda, b.lambda) && double_eq(a.beta, b.beta) &&
           a.inner_steps == b.inner_steps && double_eq(a.alpha, b.alpha) &&
           double_eq(a.mu, b.mu) && double_eq(a.decay, b.decay) && double_eq(a.tol, b.tol) &&
           a.max_iter == b.max_iter && a.iterations == b.iterations &&
           a.stop_reason == b.stop_reason && double_eq(a.residual, b.residual) &&
           double_eq(a.sigma_xstar, b.sigma_xstar) && double_eq(a.psnr_input, b.psnr_input) &&
           double_eq(a.psnr, b.psnr) && double_eq(a.ssim, b.ssim) &&
           double_eq(a.re_sigma, b.re_sigma) && a.error == b.error;
}

namespace {

std::string metrics_fingerprint(const RunRow& r) {
    std::ostringstream oss;
    oss << r.iterations << '|' << r.stop_reason << '|' << format_double(r.residual) << '|'
        << format_double(r.sigma_xstar) << '|' << format_double(r.sigma_eta_used) << '|'
        << format_double(r.psnr_input) << '|' << format_double(r.psnr) << '|'
        << format_double(r.ssim) << '|' << format_double(r.re_sigma);
    return oss.str();
}

}  // namespace

bool metrics_identical(const RunRow& a, const RunRow& b) {
    return metrics_fingerprint(a) == metrics_fingerprint(b);
}

// ---------------------------------------------------------------------------
// reporting
// ---------------------------------------------------------------------------

namespace {

struct Stats {
    double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
    std::size_t n = 0;
};

Stats compute_stats(const std::vector<double>& values) {
    Stats s;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = values[0];
    s.max = values[0];
    for (double v : values) {
        s.mean += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(values.size()));
    return s;
}

json stats_json(const Stats& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}, {"min", s.min}, {"max", s.max},
                {"n", s.n}};
}

// Rows grouped by a string key, in first-seen order.
struct Groups {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunRow*>> by_key;

    void add(const std::string& key, const RunRow& row) {
        auto [it, inserted] = by_key.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&row);
    }
};

std::vector<double> collect(const std::vector<const RunRow*>& rows, double RunRow::*field) {
    std::vector<double> out;
    for (const RunRow* r : rows) {
        if (r->error.empty() && !std::isnan(r->*field)) out.push_back(r->*field);
    }
    return out;
}

std::string plot_value_tag(double v) {
    std::string s = format_double(v);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
    }
    return s;
}

void write_plot_file(const std::string& path, const std::string& comment,
                     const std::vector<std::array<double, 3>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open plot file '" + path + "'");
    out << "# " << comment << "\n";
    for (const auto& r : rows) {
        out << format_double(r[0]) << " " << format_double(r[1]) << " " << format_double(r[2])
            << "\n";
    }
}

}  // namespace

void write_report(const SweepResult& result, const ExperimentConfig& cfg,
                  const std::string& out_dir) {
    if (result.rows.empty()) throw std::invalid_argument("write_report: empty results");
    fs::create_directories(out_dir);

    // (a) raw CSV
    {
        std::ofstream out(fs::path(out_dir) / "runs.csv");
        if (!out) throw IoError("cannot open runs.csv in '" + out_dir + "'");
        out << csv_header() << "\n";
        for (const RunRow& r : result.rows) out << to_csv_row(r) << "\n";
    }

    json summary;
    summary["sweep_type"] = to_string(result.type);
    summary["seed"] = cfg.seed;
    summary["denoiser"] = {{"kind", to_string(cfg.denoiser.kind)},
                           {"strength", cfg.denoiser.strength}};
    if (!cfg.denoiser_level.empty()) summary["denoiser"]["level"] = cfg.denoiser_level;
    json groups = json::array();
    json warnings = json::array();

    auto group_stats = [&](const std::string& key, const std::vector<const RunRow*>& rows,
                           json extra) {
        const auto psnr_v = collect(rows, &RunRow::psnr);
        if (psnr_v.empty()) {
            warnings.push_back("group " + key + " omitted: no successful runs");
            return;
        }
        json g = std::move(extra);
        g["key"] = key;
        g["runs"] = rows.size();
        g["failed"] = rows.size() - psnr_v.size();
        g["psnr"] = stats_json(compute_stats(psnr_v));
        g["ssim"] = stats_json(compute_stats(collect(rows, &RunRow::ssim)));
        g["sigma_xstar"] = stats_json(compute_stats(collect(rows, &RunRow::sigma_xstar)));
        g["re_sigma"] = stats_json(compute_stats(collect(rows, &RunRow::re_sigma)));
        groups.push_back(std::move(g));
    };

    switch (result.type) {
        case SweepSpec::Type::tau: {
            Groups by;
            for (const RunRow& r : result.rows) {
                by.add(r.scenario + "|tau=" + format_double(r.tau), r);
            }
            for (const std::string& key : by.order) {
                const auto& rows = by.by_key[key];
                group_stats(key, rows,
                            json{{"scenario", rows.front()->scenario},
                                 {"tau", rows.front()->tau}});
            }
            // plot data per scenario: tau vs mean/std of sigma_xstar and psnr
            for (Scenario sc : cfg.scenarios) {
                std::vector<std::array<double, 3>> sig_rows, psnr_rows;
                for (const std::string& key : by.order) {
                    const auto& rows = by.by_key[key];
                    if (rows.front()->scenario != to_string(sc)) continue;
                    const Stats sig = compute_stats(collect(rows, &RunRow::sigma_xstar));
                    const Stats ps = compute_stats(collect(rows, &RunRow::psnr));
                    if (sig.n == 0) continue;
                    sig_rows.push_back({rows.front()->tau, sig.mean, sig.stddev});
                    psnr_rows.push_back({rows.front()->tau, ps.mean, ps.stddev});
                }
                const std::string tag = to_string(sc);
                write_plot_file((fs::path(out_dir) / ("tau_sigma_" + tag + ".dat")).string(),
                                "tau mean(sigma_xstar) std", sig_rows);
                write_plot_file((fs::path(out_dir) / ("tau_psnr_" + tag + ".dat")).string(),
                                "tau mean(psnr) std", psnr_rows);
            }
            break;
        }
        case SweepSpec::Type::penalties: {
            Groups by;
            for (const RunRow& r : result.rows) {
                by.add(r.scenario + "|gamma=" + format_double(r.gamma), r);
            }
            for (const std::string& key : by.order) {
                const auto& rows = by.by_key[key];
                group_stats(key, rows,
                            json{{"scenario", rows.front()->scenario},
                                 {"gamma", rows.front()->gamma}});
            }
            for (const std::string& key : by.order) {
                const auto& rows = by.by_key[key];
                // beta_r vs mean/std psnr over beta_t
                Groups by_br;
                for (const RunRow* r : rows) by_br.add(format_double(r->beta_r0), *r);
                std::vector<std::array<double, 3>> plot;
                for (const std::string& bk : by_br.order) {
                    const Stats ps = compute_stats(collect(by_br.by_key[bk], &RunRow::psnr));
                    if (ps.n == 0) continue;
                    plot.push_back({by_br.by_key[bk].front()->beta_r0, ps.mean, ps.stddev});
                }
                const std::string tag = rows.front()->scenario + "_gamma" +
                                        plot_value_tag(rows.front()->gamma);
                write_plot_file((fs::path(out_dir) / ("penalties_" + tag + ".dat")).string(),
                                "beta_r0 mean(psnr) std (over beta_t0)", plot);
            }
            break;
        }
        case SweepSpec::Type::baselines: {
            Groups by;
            for (const RunRow& r : result.rows) by.add(r.solver + "|" + r.scenario, r);
            for (const std::string& key : by.order) {
                const auto& rows = by.by_key[key];
                const Stats ps = compute_stats(collect(rows, &RunRow::psnr));
                group_stats(key, rows,
                            json{{"solver", rows.front()->solver},
                                 {"scenario", rows.front()->scenario},
                                 {"psnr_spread", ps.n > 0 ? ps.max - ps.min : 0.0}});
            }
            // Discrepancy-matching selection per (solver, scenario, image,
            // degradation): the grid point minimizing |sigma_xstar - sigma_eta_used|.
            if (cfg.sweep.auto_tune) {
                json selection = json::array();
                Groups by_inst;
                for (const RunRow& r : result.rows) {
                    by_inst.add(r.solver + "|" + r.scenario + "|" + r.image_id + "|" +
                                    format_double(r.sigma_a) + "|" +
                                    format_double(r.sigma_eta_true),
                                r);
                }
                std::map<std::string, std::vector<const RunRow*>> table3;
                std::vector<std::string> table3_order;
                for (const std::string& key : by_inst.order) {
                    const RunRow* best = nullptr;
                    for (const RunRow* r : by_inst.by_key[key]) {
                        if (!r->error.empty() || std::isnan(r->sigma_xstar)) continue;
                        if (!best || std::abs(r->sigma_xstar - r->sigma_eta_used) <
                                         std::abs(best->sigma_xstar - best->sigma_eta_used)) {
                            best = r;
                        }
                    }
                    if (!best) continue;
                    json sel{{"solver", best->solver},
                             {"scenario", best->scenario},
                             {"image", best->image_id},
                             {"sigma_a", best->sigma_a},
                             {"sigma_eta", best->sigma_eta_true},
                             {"row", best->row},
                             {"psnr", best->psnr},
                             {"ssim", best->ssim},
                             {"sigma_xstar", best->sigma_xstar}};
                    if (best->solver == "red") sel["lambda"] = best->lambda;
                    if (best->solver == "redpro") {
                        sel["alpha"] = best->alpha;
                        sel["mu"] = best->mu;
                    }
                    if (best->solver == "cred") {
                        sel["beta_r0"] = best->beta_r0;
                        sel["beta_t0"] = best->beta_t0;
                    }
                    selection.push_back(std::move(sel));
                    const std::string t3key = best->solver + "|" + format_double(best->sigma_a) +
                                              "|" + format_double(best->sigma_eta_true);
                    auto [it, inserted] = table3.try_emplace(t3key);
                    if (inserted) table3_order.push_back(t3key);
                    it->second.push_back(best);
                }
                summary["selection"] = std::move(selection);
                // Table-3 shape: mean PSNR/SSIM per solver per degradation over
                // images, at the discrepancy-selected hyperparameters.
                json t3 = json::array();
                for (const std::string& key : table3_order) {
                    const auto& rows = table3[key];
                    t3.push_back(json{{"solver", rows.front()->solver},
                                      {"sigma_a", rows.front()->sigma_a},
                                      {"sigma_eta", rows.front()->sigma_eta_true},
                                      {"images", rows.size()},
                                      {"psnr", stats_json(compute_stats(collect(rows, &RunRow::psnr)))},
                                      {"ssim", stats_json(compute_stats(collect(rows, &RunRow::ssim)))}});
                }
                summary["table3"] = std::move(t3);
            }
            // plot data
            {
                std::vector<std::array<double, 3>> red_rows;
                Groups by_lambda;
                for (const RunRow& r : result.rows) {
                    if (r.solver == "red") by_lambda.add(format_double(r.lambda), r);
                }
                for (const std::string& key : by_lambda.order) {
                    const Stats ps = compute_stats(collect(by_lambda.by_key[key], &RunRow::psnr));
                    if (ps.n == 0) continue;
                    red_rows.push_back({by_lambda.by_key[key].front()->lambda, ps.mean, ps.stddev});
                }
                if (!red_rows.empty()) {
                    write_plot_file((fs::path(out_dir) / "red_lambda_psnr.dat").string(),
                                    "lambda mean(psnr) std", red_rows);
                }

                std::vector<std::array<double, 3>> pro_rows;
                Groups by_alpha;
                for (const RunRow& r : result.rows) {
                    if (r.solver == "redpro") by_alpha.add(format_double(r.alpha), r);
                }
                for (const std::string& key : by_alpha.order) {
                    const Stats ps = compute_stats(collect(by_alpha.by_key[key], &RunRow::psnr));
                    if (ps.n == 0) continue;
                    pro_rows.push_back({by_alpha.by_key[key].front()->alpha, ps.mean, ps.stddev});
                }
                if (!pro_rows.empty()) {
                    write_plot_file((fs::path(out_dir) / "redpro_alpha_psnr.dat").string(),
                                    "alpha mean(psnr) std (over mu)", pro_rows);
                }

                std::vector<std::array<double, 3>> cred_rows;
                Groups by_br;
                for (const RunRow& r : result.rows) {
                    if (r.solver == "cred") by_br.add(format_double(r.beta_r0), r);
                }
                for (const std::string& key : by_br.order) {
                    const Stats ps = compute_stats(collect(by_br.by_key[key], &RunRow::psnr));
                    if (ps.n == 0) continue;
                    cred_rows.push_back({by_br.by_key[key].front()->beta_r0, ps.mean, ps.stddev});
                }
                if (!cred_rows.empty()) {
                    write_plot_file((fs::path(out_dir) / "cred_beta_psnr.dat").string(),
                                    "beta_r0 mean(psnr) std (over beta_t0)", cred_rows);
                }
            }
            break;
        }
        case SweepSpec::Type::single: {
            Groups by;
            for (const RunRow& r : result.rows) by.add(r.solver + "|" + r.scenario, r);
            for (const std::string& key : by.order) {
                const auto& rows = by.by_key[key];
                group_stats(key, rows,
                            json{{"solver", rows.front()->solver},
                                 {"scenario", rows.front()->scenario}});
            }
            break;
        }
    }

    summary["groups"] = std::move(groups);
    summary["warnings"] = std::move(warnings);

    std::ofstream out(fs::path(out_dir) / "summary.json");
    if (!out) throw IoError("cannot open summary.json in '" + out_dir + "'");
    out << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

ReplayResult replay_row(const std::string& csv_path, int row_index, const std::string& out_dir) {
    const std::vector<RunRow> rows = read_csv(csv_path);
    const RunRow* original = nullptr;
    for (const RunRow& r : rows) {
        if (r.row == row_index) {
            original = &r;
            break;
        }
    }
    if (!original) {
        throw std::invalid_argument("replay: no row " + std::to_string(row_index) + " in '" +
                                    csv_path + "'");
    }

    ReplayResult res;
    res.original = *original;
    std::string image_out;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        image_out =
            (fs::path(out_dir) / ("replay_row" + std::to_string(row_index) + ".pgm")).string();
    }
    res.replayed = execute_run(*original, image_out);
    res.identical = metrics_identical(res.original, res.replayed);
    if (!out_dir.empty()) {
        std::ofstream out(fs::path(out_dir) /
                          ("replay_row" + std::to_string(row_index) + ".csv"));
        out << csv_header() << "\n" << to_csv_row(res.replayed) << "\n";
    }
    return res;
}

}  // namespace cred::harness
