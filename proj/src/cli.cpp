#include "geoxray/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"

#include "geoxray/fft.hpp"
#include "geoxray/geodesic.hpp"
#include "geoxray/io.hpp"
#include "geoxray/lightray.hpp"
#include "geoxray/phantoms.hpp"
#include "geoxray/radon.hpp"
#include "geoxray/simplicity.hpp"
#include "geoxray/smfields.hpp"
#include "geoxray/xray.hpp"

#ifndef GEOXRAY_VERSION
#define GEOXRAY_VERSION "unknown"
#endif

namespace geoxray::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"radon",         "xray",       "invert",   "verify-sm",
                                               "verify-santalo", "verify-pestov", "simplicity", "demo-cap",
                                               "lightray",      "convergence"};
    return c;
}

namespace {

constexpr double kQuadStep = 0.005;
constexpr double kErrorFloor = 1e-14;

bool known_command(const std::string& c) {
    const auto& all = commands();
    return std::find(all.begin(), all.end(), c) != all.end();
}

std::string fan_string(int b, int a) { return std::to_string(b) + "x" + std::to_string(a); }

std::pair<int, int> parse_fan(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw ConfigError("fan must be written BxA, got '" + s + "'");
    try {
        std::size_t u1 = 0, u2 = 0;
        const int b = std::stoi(s.substr(0, x), &u1);
        const int a = std::stoi(s.substr(x + 1), &u2);
        if (u1 != x || u2 != s.size() - x - 1) throw std::invalid_argument(s);
        return {b, a};
    } catch (const std::logic_error&) {
        throw ConfigError("fan must be written BxA, got '" + s + "'");
    }
}

int get_int(const json& j, const char* key, int lo, int hi) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi)
        throw ConfigError(std::string("'") + key + "' = " + std::to_string(x) + " outside [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
}

double get_double(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be finite");
    return x;
}

std::string get_string(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

json RunConfig::to_json() const {
    return {{"command", command}, {"metric", metric},  {"phantom", phantom}, {"grid", grid},
            {"fan", fan_string(fan_beta, fan_alpha)},  {"tol", tol},         {"out", out},
            {"threads", threads}, {"seed", seed},      {"levels", levels},   {"check", check},
            {"ntheta", ntheta},   {"samples", samples}, {"angles", angles},  {"iters", iters},
            {"cases", cases},     {"width", width},    {"rho", rho},         {"shift", shift}};
}

json defaults(const std::string& command) {
    if (!known_command(command)) throw ConfigError("unknown command '" + command + "'");
    json d = {{"metric", "euclidean"}, {"phantom", "gaussian_bump"}, {"grid", 64},     {"fan", "90x90"},
              {"tol", 1e-6},          {"out", "geoxray_out"},       {"threads", 1},   {"seed", 1},
              {"levels", 3},          {"check", "exit"},            {"ntheta", 128},  {"samples", 256},
              {"angles", 360},        {"iters", 80},                {"cases", 1},     {"width", 0.05},
              {"rho", 2.0},           {"shift", 0.37}};
    if (command == "radon") d["grid"] = 128;
    if (command == "invert") d["phantom"] = "two_bump";
    if (command == "verify-sm" || command == "verify-santalo" || command == "verify-pestov") {
        d["phantom"] = "sm_mixture";
        d["grid"] = 65;
    }
    if (command == "simplicity") {
        d["metric"] = "cap:1.5";
        d["fan"] = "32x32";
    }
    if (command == "demo-cap") d["metric"] = "cap:1.2";
    if (command == "lightray") {
        d["phantom"] = "separable_spacetime:width=0.25,tc=0.5,tw=0.3";
        d["fan"] = "32x32";
        d["samples"] = 200;
    }
    return d;
}

RunConfig resolve(const std::string& command, const json& file, const json& flags) {
    json merged = defaults(command);
    for (const json* layer : {&file, &flags}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) throw ConfigError("configuration must be a JSON object");
        for (auto it = layer->begin(); it != layer->end(); ++it) {
            if (it.key() == "command") continue;
            if (!merged.contains(it.key())) throw ConfigError("unknown configuration key '" + it.key() + "'");
            merged[it.key()] = it.value();
        }
    }
    RunConfig c;
    c.command = command;
    c.metric = get_string(merged, "metric");
    c.phantom = get_string(merged, "phantom");
    c.grid = get_int(merged, "grid", 8, 2048);
    std::tie(c.fan_beta, c.fan_alpha) = parse_fan(get_string(merged, "fan"));
    if (c.fan_beta < 4 || c.fan_alpha < 4 || c.fan_beta > 4096 || c.fan_alpha > 4096)
        throw ConfigError("fan sizes must lie in [4, 4096]");
    c.tol = get_double(merged, "tol");
    if (!(c.tol > 0.0 && c.tol <= 1e-2)) throw ConfigError("'tol' must lie in (0, 1e-2]");
    c.out = get_string(merged, "out");
    if (c.out.empty()) throw ConfigError("'out' must not be empty");
    c.threads = get_int(merged, "threads", 1, 256);
    const json& seed = merged.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
        throw ConfigError("'seed' must be a non-negative integer");
    c.seed = seed.get<std::uint64_t>();
    c.levels = get_int(merged, "levels", 3, 8);
    c.check = get_string(merged, "check");
    c.ntheta = get_int(merged, "ntheta", 8, 4096);
    c.samples = get_int(merged, "samples", 2, 100000);
    c.angles = get_int(merged, "angles", 4, 100000);
    c.iters = get_int(merged, "iters", 1, 100000);
    c.cases = get_int(merged, "cases", 1, 1000);
    c.width = get_double(merged, "width");
    c.rho = get_double(merged, "rho");
    c.shift = get_double(merged, "shift");
    try {
        ConformalMetric::parse(c.metric);
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid metric: ") + e.what());
    }
    return c;
}

std::optional<RunConfig> parse_command_line(int argc, const char* const* argv) {
    CLI::App app{"Geodesic X-ray transform experiments", "geoxray"};
    std::string command, config, metric, phantom, fan, out, check;
    int grid = 0, threads = 0, levels = 0, ntheta = 0, samples = 0, angles = 0, iters = 0, cases = 0;
    std::uint64_t seed = 0;
    double width = 0.0, rho = 0.0, shift = 0.0, tolv = 0.0;
    std::string command_list;
    for (const auto& c : commands()) command_list += (command_list.empty() ? "" : ", ") + c;
    app.add_option("command", command, "one of: " + command_list);
    app.add_option("--config", config, "JSON file with default settings");
    auto* o_metric = app.add_option("--metric", metric, "euclidean, affine:c0,a,b, cap:k, hyperbolic[:R], bump:A,w[,cx,cy], grid:path");
    auto* o_phantom = app.add_option("--phantom", phantom, "kind[:key=value,...]");
    auto* o_grid = app.add_option("--grid", grid, "grid nodes per axis");
    auto* o_fan = app.add_option("--fan", fan, "fan size BxA");
    auto* o_tol = app.add_option("--tol", tolv, "integrator tolerance");
    auto* o_out = app.add_option("--out", out, "output directory");
    auto* o_threads = app.add_option("--threads", threads, "worker threads");
    auto* o_seed = app.add_option("--seed", seed, "base seed");
    auto* o_levels = app.add_option("--levels", levels, "convergence levels (>= 3)");
    auto* o_check = app.add_option("--check", check, "convergence check: exit, commutator, transport, fbp, zero");
    auto* o_ntheta = app.add_option("--ntheta", ntheta, "angles of SM grids");
    auto* o_samples = app.add_option("--samples", samples, "radon s-samples; lightray sigma samples");
    auto* o_angles = app.add_option("--angles", angles, "radon directions");
    auto* o_iters = app.add_option("--iters", iters, "inversion iteration cap");
    auto* o_cases = app.add_option("--cases", cases, "seeded repetitions");
    auto* o_width = app.add_option("--width", width, "demo-cap bump radius");
    auto* o_rho = app.add_option("--rho", rho, "lightray Fourier frequency");
    auto* o_shift = app.add_option("--shift", shift, "lightray time translation");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    json file;
    if (!config.empty()) {
        try {
            file = read_json(config);
        } catch (const std::exception& e) {
            throw ConfigError("cannot read config '" + config + "': " + e.what());
        }
        if (!file.is_object()) throw ConfigError("config '" + config + "' is not a JSON object");
        if (command.empty() && file.contains("command") && file["command"].is_string())
            command = file["command"].get<std::string>();
    }
    if (command.empty()) throw ConfigError("missing command (one of: " + command_list + ")");
    if (!known_command(command)) throw ConfigError("unknown command '" + command + "'");
    json flags = json::object();
    if (o_metric->count()) flags["metric"] = metric;
    if (o_phantom->count()) flags["phantom"] = phantom;
    if (o_grid->count()) flags["grid"] = grid;
    if (o_fan->count()) flags["fan"] = fan;
    if (o_tol->count()) flags["tol"] = tolv;
    if (o_out->count()) flags["out"] = out;
    if (o_threads->count()) flags["threads"] = threads;
    if (o_seed->count()) flags["seed"] = seed;
    if (o_levels->count()) flags["levels"] = levels;
    if (o_check->count()) flags["check"] = check;
    if (o_ntheta->count()) flags["ntheta"] = ntheta;
    if (o_samples->count()) flags["samples"] = samples;
    if (o_angles->count()) flags["angles"] = angles;
    if (o_iters->count()) flags["iters"] = iters;
    if (o_cases->count()) flags["cases"] = cases;
    if (o_width->count()) flags["width"] = width;
    if (o_rho->count()) flags["rho"] = rho;
    if (o_shift->count()) flags["shift"] = shift;
    return resolve(command, file, flags);
}

// ---------------------------------------------------------------------------

json ConvergenceTable::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"h", r.h},
                          {"error", r.error},
                          {"observed_order", r.observed_order ? json(*r.observed_order) : json("n/a")}});
    return {{"check", check}, {"rows", rows_j}, {"monotone", monotone}};
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& t) {
    std::ofstream out(path);
    if (!out) throw ParameterError("cannot open '" + path + "' for writing");
    out << "h,error,observed_order\n";
    for (const auto& r : t.rows)
        out << format_double(r.h) << ',' << format_double(r.error) << ','
            << (r.observed_order ? format_double(*r.observed_order) : std::string("n/a")) << '\n';
}

namespace {

SMFunction sm_phantom(const std::string& spec, std::uint64_t seed) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    if (head == "zero") return [](Vec2, double) { return 0.0; };
    if (head != "sm_mixture") throw ConfigError("SM phantoms are 'zero' or 'sm_mixture[:count=N,margin=m]'");
    int count = 3;
    double margin = 0.15;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("SM phantom parameter '" + item + "' is not key=value");
            const std::string key = item.substr(0, eq);
            const double v = std::strtod(item.c_str() + eq + 1, nullptr);
            if (key == "count") count = static_cast<int>(v);
            else if (key == "margin") margin = v;
            else throw ConfigError("unknown SM phantom parameter '" + key + "'");
        }
    }
    if (count < 1 || !(margin > 0.0 && margin < 0.6)) throw ConfigError("SM phantom needs count >= 1, margin in (0, 0.6)");
    return sm_bump_mixture(seed, count, margin);
}

double fan_rel_l2(const FanBeamData& a, const FanBeamData& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        if (a.mask[k] || ref.mask[k]) continue;
        num += std::pow(a.values[k] - ref.values[k], 2);
        den += ref.values[k] * ref.values[k];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void write_fan_pgm(const std::string& path, const FanBeamData& d) {
    write_pgm(path, d.values, d.fan.nalpha, d.fan.nbeta, 8);
}

class Runner {
public:
    explicit Runner(const RunConfig& cfg) : cfg_(cfg), out_(cfg.out) {}

    json manifest;

    void metric(const std::string& name, const json& v) { manifest["metrics"][name] = v; }

    void check_le(const std::string& name, double value, double limit) { record(name, value, "<=", limit, value <= limit); }
    void check_ge(const std::string& name, double value, double limit) { record(name, value, ">=", limit, value >= limit); }
    void check_true(const std::string& name, bool ok) { record(name, ok, "==", true, ok); }

    std::string path(const std::string& file) {
        manifest["artifacts"].push_back(file);
        return (out_ / file).string();
    }

    void seeds(const std::vector<std::uint64_t>& s) { manifest["seeds"]["derived"] = s; }

    bool failed() const { return !failed_.empty(); }
    const std::vector<std::string>& failures() const { return failed_; }

    void dispatch();

private:
    void record(const std::string& name, const json& value, const char* rel, const json& limit, bool ok) {
        manifest["metrics"][name] = value;
        manifest["assertions"].push_back(
            {{"name", name}, {"value", value}, {"relation", rel}, {"limit", limit}, {"passed", ok}});
        if (!ok) failed_.push_back(name);
    }

    XrayOptions xray_opt() const { return {cfg_.tol, kQuadStep, kDefaultTrapTime}; }
    FanGeometry fan() const { return {cfg_.fan_beta, cfg_.fan_alpha}; }
    ConformalMetric metric_() const { return ConformalMetric::parse(cfg_.metric); }

    void radon();
    void xray();
    void invert();
    void verify_sm();
    void verify_santalo();
    void verify_pestov();
    void simplicity();
    void demo_cap();
    void lightray();
    void convergence();

    const RunConfig& cfg_;
    fs::path out_;
    std::vector<std::string> failed_;
};

void Runner::radon() {
    PhantomSpec ps = PhantomSpec::parse(cfg_.phantom);
    ps.grid = Grid2D::square(cfg_.grid);
    const ScalarField truth = generate(ps);
    const Sinogram sino = radon_forward(truth, cfg_.samples, cfg_.angles, 0.5 * truth.grid().dx());
    const ScalarField rec = fbp_invert(sino, truth.grid());
    write_scalar_field(path("phantom.txt"), truth);
    write_field_pgm(path("phantom.pgm"), truth);
    write_sinogram(path("sinogram.txt"), sino);
    write_sinogram_pgm(path("sinogram.pgm"), sino);
    write_scalar_field(path("reconstruction.txt"), rec);
    write_field_pgm(path("reconstruction.pgm"), rec);
    write_field_pgm(path("reconstruction16.pgm"), rec, 16);
    write_field_csv(path("reconstruction.csv"), rec);
    check_le("fbp_rel_error", relative_l2_error(rec, truth, 1.0), 0.01);
    const FourierSliceReport fsr = fourier_slice_residual(truth, sino);
    check_le("fourier_slice_rel_error", fsr.rel_l2, 1e-3);
    const StabilityReport st = stability_residual(truth, cfg_.samples, cfg_.angles);
    metric("stability_lhs", st.lhs);
    metric("stability_rhs", st.rhs);
    check_true("stability_holds", st.holds);
}

void Runner::xray() {
    const ConformalMetric g = metric_();
    PhantomSpec ps = PhantomSpec::parse(cfg_.phantom);
    ps.grid = Grid2D::square(cfg_.grid);
    const FieldFunction f = phantom_function(ps);
    const XrayOptions xo = xray_opt();
    const FanBeamData d = xray_forward(g, f, fan(), xo);
    write_fan_data(path("xray.txt"), d);
    write_fan_pgm(path("xray.pgm"), d);
    metric("trapped", d.trapped);
    metric("failed", d.failed);
    if (g.name() == "euclidean") {
        const FanBeamData o = radon_fan_oracle(f, fan(), kQuadStep);
        check_le("radon_reduction_rel_error", fan_rel_l2(d, o), 1e-3);
    }
    // Adjoint pairing (If, h) = (f, I*h) with the traced backprojector.
    const Grid2D grid = Grid2D::square(cfg_.grid);
    const XrayBackprojector bp(g, grid, fan(), 2 * cfg_.fan_alpha, xo);
    double worst = 0.0;
    std::vector<std::uint64_t> used;
    for (int c = 0; c < cfg_.cases; ++c) {
        PhantomSpec pm;
        pm.kind = PhantomKind::BumpMixture;
        pm.seed = cfg_.seed + c;
        pm.grid = grid;
        const ScalarField fc = generate(pm);
        const FanBeamData h = sample_fan(fan_trig_mixture(cfg_.seed + 1000 + c), fan());
        const double a = fan_pairing(g, xray_forward(g, fc, fan(), xo), h);
        const double b = volume_pairing(g, fc, bp.apply(h));
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), kErrorFloor));
        used.push_back(pm.seed);
        used.push_back(cfg_.seed + 1000 + c);
    }
    seeds(used);
    check_le("adjoint_pairing_rel_error", worst, 0.02);
}

void Runner::invert() {
    const ConformalMetric g = metric_();
    PhantomSpec ps = PhantomSpec::parse(cfg_.phantom);
    ps.grid = Grid2D::square(cfg_.grid);
    const FieldFunction f = phantom_function(ps);
    const ScalarField truth = generate(ps);
    const XrayOptions xo = xray_opt();
    const FanBeamData d = xray_forward(g, f, fan(), xo);
    write_fan_data(path("data.txt"), d);
    InversionOptions io;
    io.max_iter = cfg_.iters;
    io.xray = xo;
    const InversionResult r = invert_normal_cg(g, d, truth.grid(), io);
    if (r.simplicity) manifest["simplicity"] = r.simplicity->to_json();
    write_scalar_field(path("reconstruction.txt"), r.f);
    write_field_pgm(path("reconstruction.pgm"), r.f);
    write_field_csv(path("reconstruction.csv"), r.f);
    write_scalar_field(path("phantom.txt"), truth);
    write_field_pgm(path("phantom.pgm"), truth);
    write_convergence_log(path("convergence_log.txt"), r.residuals);
    metric("iterations", r.iterations);
    metric("converged", r.converged);
    metric("stagnated", r.stagnated);
    metric("final_residual", r.residuals.empty() ? 0.0 : r.residuals.back());
    bool monotone = true;
    for (std::size_t k = 1; k < r.residuals.size(); ++k) monotone = monotone && r.residuals[k] <= r.residuals[k - 1];
    check_true("residuals_monotone", monotone);
    const double limit = g.name() == "euclidean" ? 0.05 : 0.08;
    check_le("reconstruction_rel_error", relative_l2_error(r.f, truth, 1.0), limit);
}

void Runner::verify_sm() {
    const ConformalMetric g = metric_();
    const SMGrid grid{cfg_.grid, cfg_.ntheta, 1.0};
    const SMCalculus c(g, grid);
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, sx = 0.0, sv = 0.0;
    std::vector<std::uint64_t> used;
    for (int k = 0; k < cfg_.cases; ++k) {
        const std::uint64_t s = cfg_.seed + 2 * k;
        const SMField u = SMField::from_function(grid, sm_phantom(cfg_.phantom, s));
        const SMField w = SMField::from_function(grid, sm_phantom(cfg_.phantom, s + 1));
        if (k == 0) write_sm_field(path("field.txt"), u);
        const CommutatorResiduals r = commutator_residuals(c, u);
        const SkewResiduals sk = skew_adjointness(c, u, w);
        r1 = std::max(r1, r.r1);
        r2 = std::max(r2, r.r2);
        r3 = std::max(r3, r.r3);
        sx = std::max(sx, sk.x);
        sv = std::max(sv, sk.v);
        used.push_back(s);
        used.push_back(s + 1);
    }
    seeds(used);
    check_le("commutator_xv", r1, 1e-3);
    check_le("commutator_vxperp", r2, 1e-3);
    check_le("commutator_xxperp", r3, 1e-3);
    check_le("skew_adjoint_x", sx, 1e-3);
    check_le("skew_adjoint_v", sv, 1e-3);
}

void Runner::verify_pestov() {
    const ConformalMetric g = metric_();
    const SMGrid grid{cfg_.grid, cfg_.ntheta, 1.0};
    const SMCalculus c(g, grid);
    double worst = 0.0;
    json reports = json::array();
    std::vector<std::uint64_t> used;
    for (int k = 0; k < cfg_.cases; ++k) {
        const std::uint64_t s = cfg_.seed + k;
        const SMField u = SMField::from_function(grid, sm_phantom(cfg_.phantom, s));
        if (k == 0) write_sm_field(path("field.txt"), u);
        const PestovReport p = pestov_residual(c, u);
        reports.push_back(p.to_json());
        worst = std::max(worst, p.rel_residual);
        used.push_back(s);
    }
    seeds(used);
    manifest["pestov"] = reports;
    check_le("pestov_rel_residual", worst, 1e-3);
}

void Runner::verify_santalo() {
    const ConformalMetric g = metric_();
    const SMGrid grid{cfg_.grid, cfg_.ntheta, 1.0};
    const SMField w = SMField::from_function(grid, sm_phantom(cfg_.phantom, cfg_.seed));
    write_sm_field(path("field.txt"), w);
    seeds({cfg_.seed});
    const SantaloReport r = santalo_residual(g, w, fan(), xray_opt());
    manifest["santalo"] = r.to_json();
    metric("trapped", r.trapped);
    check_le("santalo_rel_residual", r.rel_residual, 0.02);
}

void Runner::simplicity() {
    const ConformalMetric g = metric_();
    const SimplicityReport r = verify_simplicity(g, cfg_.fan_beta, cfg_.fan_alpha);
    const json rj = r.to_json();
    write_json(path("simplicity.json"), rj);
    manifest["report"] = rj;
    metric("simple", r.simple());
    metric("nontrapping", r.nontrapping);
    metric("strictly_convex", r.strictly_convex);
    metric("no_conjugate_points", r.no_conjugate_points);
}

void Runner::demo_cap() {
    const ConformalMetric g = metric_();
    if (g.name() != "cap" || !(g.params().at(0) > 1.0))
        throw ConfigError("demo-cap needs a sphere-cap metric cap:k with k > 1");
    const double k = g.params()[0];
    const CounterexampleReport cap = counterexample_demo(k, cfg_.width, fan(), std::nullopt, xray_opt());
    const CounterexampleReport flat =
        counterexample_demo(k, cfg_.width, fan(), ConformalMetric::euclidean(), xray_opt());
    manifest["cap"] = cap.to_json();
    manifest["euclidean"] = flat.to_json();
    write_json(path("counterexample.json"), {{"cap", cap.to_json()}, {"euclidean", flat.to_json()}});
    check_le("cap_cancellation_ratio", cap.ratio, 0.05);
    check_ge("euclidean_cancellation_ratio", flat.ratio, 0.5);
}

void Runner::lightray() {
    const ConformalMetric g = metric_();
    PhantomSpec ps = PhantomSpec::parse(cfg_.phantom);
    const SpacetimePotential q = generate_spacetime(ps);
    const XrayOptions xo = xray_opt();
    // Chord lengths: the transform of the constant 1.
    const FanBeamData chords = xray_forward(g, [](Vec2) { return 1.0; }, fan(), xo);
    double lmax = 0.0;
    for (std::size_t r = 0; r < chords.values.size(); ++r)
        if (!chords.mask[r]) lmax = std::max(lmax, chords.values[r]);
    SigmaGrid sigma = required_sigma_bounds(q, lmax, cfg_.samples);
    const double pad = 2.0 * (sigma.max - sigma.min) / (cfg_.samples - 1);
    sigma.min -= pad;
    sigma.max += pad;
    const LightRayData d = lightray_forward(g, q, sigma, fan(), xo);
    write_lightray_data(path("lightray.txt"), d);
    write_pgm(path("lightray.pgm"), d.values, sigma.n, static_cast<int>(fan().size()), 8);
    metric("trapped", d.trapped);
    const FubiniReport fub = sigma_fubini_check(g, q, fan(), sigma, xo);
    check_le("fubini_rel_residual", fub.residual, 1e-3);
    const std::vector<double> mom = sigma_integrals(d);
    const std::vector<Complex> f0 = sigma_fourier(d, 0.0);
    double diff = 0.0, scale = 0.0;
    for (std::size_t r = 0; r < mom.size(); ++r) {
        diff = std::max(diff, std::abs(f0[r] - mom[r]));
        scale = std::max(scale, std::abs(mom[r]));
    }
    check_le("rho0_consistency", scale > 0.0 ? diff / scale : diff, 1e-10);
    write_sigma_fourier(path("sigma_fourier.txt"), fan(), cfg_.rho, sigma_fourier(d, cfg_.rho));
    const TranslationReport tr = time_translation_check(g, q, fan(), sigma, cfg_.shift, xo);
    metric("translation_interpolation_bound", tr.interpolation_bound);
    check_le("translation_grid_shift_error", tr.grid_shift_error, 1e-12);
    check_le("translation_resample_error", tr.resample_error, tr.interpolation_bound);
}

void Runner::convergence() {
    const ConvergenceTable t = convergence_study(cfg_, cfg_.levels);
    write_convergence_csv(path("convergence.csv"), t);
    manifest["convergence"] = t.to_json();
    manifest["non_monotone"] = !t.monotone;
}

void Runner::dispatch() {
    const std::string& c = cfg_.command;
    fs::create_directories(out_);
    if (c == "radon") radon();
    else if (c == "xray") xray();
    else if (c == "invert") invert();
    else if (c == "verify-sm") verify_sm();
    else if (c == "verify-santalo") verify_santalo();
    else if (c == "verify-pestov") verify_pestov();
    else if (c == "simplicity") simplicity();
    else if (c == "demo-cap") demo_cap();
    else if (c == "lightray") lightray();
    else if (c == "convergence") convergence();
    else throw ConfigError("unknown command '" + c + "'");
}

json versions() {
    return {{"geoxray", GEOXRAY_VERSION},
            {"fftw", fft_library_version()},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"cli11", CLI11_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    set_thread_count(cfg.threads);
    Runner r(cfg);
    r.manifest = {{"schema", kManifestSchema},
                  {"command", cfg.command},
                  {"config", cfg.to_json()},
                  {"versions", versions()},
                  {"seeds", {{"base", cfg.seed}, {"derived", json::array()}}},
                  {"metrics", json::object()},
                  {"assertions", json::array()},
                  {"artifacts", json::array()}};
    RunResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.dispatch();
        res.status = r.failed() ? 1 : 0;
    } catch (const SimplicityError& e) {
        res.status = 1;
        res.message = e.what();
        r.manifest["failed"] = {"simplicity"};
    } catch (const ParameterError& e) {
        res.status = 2;
        res.message = e.what();
    } catch (const SupportError& e) {
        res.status = 2;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.status = 1;
        res.message = e.what();
        r.manifest["failed"] = {"error"};
    }
    if (res.status != 2 && !r.manifest.contains("failed")) r.manifest["failed"] = r.failures();
    r.manifest["status"] = res.status;
    if (!res.message.empty()) r.manifest["message"] = res.message;
    r.manifest["timing"] = {
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    res.manifest = r.manifest;
    std::error_code ec;
    if (fs::is_directory(cfg.out, ec)) {
        try {
            write_json((fs::path(cfg.out) / "manifest.json").string(), r.manifest);
        } catch (const std::exception& e) {
            res.status = 2;
            res.message = std::string("cannot write manifest: ") + e.what();
        }
    } else if (res.status != 2) {
        res.status = 2;
        res.message = "output directory '" + cfg.out + "' is not usable";
    }
    return res;
}

// ---------------------------------------------------------------------------

ConvergenceTable convergence_study(const RunConfig& cfg, int levels) {
    if (levels < 3) throw ConfigError("convergence studies need at least 3 levels");
    ConvergenceTable t;
    t.check = cfg.check;
    const ConformalMetric g = ConformalMetric::parse(cfg.metric);
    std::vector<std::pair<double, double>> he;  // (h, error)
    if (cfg.check == "exit") {
        // Exit time against a closed form: the chord for lambda = 0, the
        // radial chord 2 atan(k) from the center of cap:k.
        PhaseState start;
        double exact = 0.0;
        if (g.name() == "euclidean") {
            start = {{0.5, 0.0}, 2.0};
            const Vec2 u = unit(start.theta);
            const double b = dot(start.x, u), c = norm2(start.x) - 1.0;
            exact = -b + std::sqrt(b * b - c);
        } else if (g.name() == "cap") {
            start = {{0.0, 0.0}, 0.3};
            exact = 2.0 * std::atan(g.params()[0]);
        } else {
            throw ConfigError("the exit study needs a euclidean or cap metric (closed-form exit times)");
        }
        for (int i = 0; i < levels; ++i) {
            const double h = 0.1 / std::pow(2.0, i);
            const TraceOutcome o = trace_segments(g, start, kDefaultTrapTime, h, [](const FlowPoint&, const FlowPoint&) {});
            he.push_back({h, std::abs(o.exit_time - exact)});
        }
    } else if (cfg.check == "commutator") {
        for (int i = 0; i < levels; ++i) {
            const int n = 32 * (1 << i) + 1;
            const SMGrid grid{n, 64 * (1 << i), 1.0};
            const SMField u = SMField::from_function(grid, sm_phantom("sm_mixture", cfg.seed));
            const CommutatorResiduals r = commutator_residuals(g, u);
            he.push_back({grid.h(), std::max({r.r1, r.r2, r.r3})});
        }
    } else if (cfg.check == "transport") {
        PhantomSpec ps = PhantomSpec::parse(cfg.phantom);
        const FieldFunction f = phantom_function(ps);
        for (int i = 0; i < levels; ++i) {
            const SMGrid grid{24 * (1 << i) + 1, 45 * (1 << i), 1.0};
            const TransportReport r = primitive_and_transport_check(g, f, grid, {32, 32}, {cfg.tol, 0.0, kDefaultTrapTime});
            he.push_back({grid.h(), r.residual});
        }
    } else if (cfg.check == "fbp" || cfg.check == "zero") {
        PhantomSpec ps = PhantomSpec::parse(cfg.check == "zero" ? std::string("zero") : cfg.phantom);
        for (int i = 0; i < levels; ++i) {
            const int n = 32 * (1 << i);
            ps.grid = Grid2D::square(n);
            const ScalarField truth = generate(ps);
            const Sinogram s = radon_forward(truth, 2 * n, 90 * (1 << i), 0.5 * truth.grid().dx());
            he.push_back({truth.grid().dx(), relative_l2_error(fbp_invert(s, truth.grid()), truth, 1.0)});
        }
    } else {
        throw ConfigError("unknown convergence check '" + cfg.check + "' (exit, commutator, transport, fbp, zero)");
    }
    for (std::size_t i = 0; i < he.size(); ++i) {
        ConvergenceRow row{he[i].first, he[i].second, std::nullopt};
        if (i > 0) {
            const double e0 = he[i - 1].second, e1 = he[i].second;
            if (e0 > kErrorFloor && e1 > kErrorFloor) row.observed_order = std::log2(e0 / e1);
            if (!(e1 < e0) && !(e0 <= kErrorFloor && e1 <= kErrorFloor)) t.monotone = false;
        }
        t.rows.push_back(row);
    }
    return t;
}

int main_entry(int argc, const char* const* argv) {
    std::optional<RunConfig> cfg;
    try {
        cfg = parse_command_line(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "geoxray: " << e.what() << '\n';
        return 2;
    }
    if (!cfg) return 0;
    const RunResult r = run(*cfg);
    for (const auto& a : r.manifest["assertions"])
        std::cout << (a["passed"].get<bool>() ? "PASS " : "FAIL ") << a["name"].get<std::string>() << " = "
                  << a["value"].dump() << " (" << a["relation"].get<std::string>() << ' ' << a["limit"].dump()
                  << ")\n";
    if (!r.message.empty()) std::cerr << "geoxray: " << r.message << '\n';
    std::cout << "status " << r.status << ", manifest in " << cfg->out << "/manifest.json\n";
    return r.status;
}

}  // namespace geoxray::cli
