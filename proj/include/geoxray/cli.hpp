#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "geoxray/common.hpp"

namespace geoxray::cli {

inline constexpr const char* kManifestSchema = "geoxray.manifest/1";

// Invalid command line or configuration (exit status 2).
struct ConfigError : ParameterError {
    using ParameterError::ParameterError;
};

const std::vector<std::string>& commands();

// Fully resolved settings for one run. Precedence: command-line flags, then
// the --config file (JSON object with the same keys), then defaults().
struct RunConfig {
    std::string command;
    std::string metric;
    std::string phantom;
    int grid = 0;
    int fan_beta = 0;
    int fan_alpha = 0;
    double tol = 0.0;
    std::string out;
    int threads = 1;
    std::uint64_t seed = 1;
    int levels = 3;
    std::string check;     // convergence: exit, commutator, transport, fbp, zero
    int ntheta = 0;        // SM grids
    int samples = 0;       // radon: s-samples; lightray: sigma samples
    int angles = 0;        // radon: directions
    int iters = 0;         // invert: iteration cap
    int cases = 0;         // seeded repetitions (adjoint pairs, fields)
    double width = 0.0;    // demo-cap bump radius
    double rho = 0.0;      // lightray: Fourier frequency
    double shift = 0.0;    // lightray: time translation

    nlohmann::json to_json() const;
};

// Default table for a command: every key of RunConfig with its value.
nlohmann::json defaults(const std::string& command);

// Merges defaults <- file <- flags and checks types and ranges.
RunConfig resolve(const std::string& command, const nlohmann::json& file, const nlohmann::json& flags);

// Parses argv (argv[0] is the program name). Returns nullopt after printing
// help. Throws ConfigError.
std::optional<RunConfig> parse_command_line(int argc, const char* const* argv);

struct RunResult {
    int status = 0;  // 0 pass, 1 assertion failure, 2 invalid configuration
    nlohmann::json manifest;
    std::string message;
};

// Executes one command, writing artifacts and manifest.json into cfg.out.
RunResult run(const RunConfig& cfg);

struct ConvergenceRow {
    double h = 0.0;
    double error = 0.0;
    std::optional<double> observed_order;  // log2(e_i / e_{i+1}); none for the first row or zero errors
};

struct ConvergenceTable {
    std::string check;
    std::vector<ConvergenceRow> rows;
    bool monotone = true;
    nlohmann::json to_json() const;
};

// Reruns the configured check at `levels` resolutions, each halving h.
ConvergenceTable convergence_study(const RunConfig& cfg, int levels);
void write_convergence_csv(const std::string& path, const ConvergenceTable& t);

// Full command-line entry point; returns the process exit status.
int main_entry(int argc, const char* const* argv);

}  // namespace geoxray::cli
