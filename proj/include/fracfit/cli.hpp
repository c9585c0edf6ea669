#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fracfit/baseline.hpp"
#include "fracfit/fode.hpp"
#include "fracfit/pso.hpp"

namespace fracfit::cli {

/// Command-line flags. Set values win over the config file.
struct Overrides {
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> data;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
    std::optional<double> grid_step;
    std::optional<double> horizon;
};

struct SynthOptions {
    int n_trials = 7;
    double noise_sigma = 0.0;
    std::string name = "synthetic";
};

struct ValidateOptions {
    std::vector<int> counts{1, 2, 3, 4, 5, 6, 7, 8};
    double noise_sigma = 0.01;
    int heldout_trials = 4;
};

struct RunConfig {
    std::optional<FracTransferFunction> model;
    std::string model_label;
    std::optional<NonlinearParams> baseline;
    /// RK4 step of the baseline before resampling.
    double baseline_step = 1e-3;
    std::optional<double> grid_step;
    std::optional<double> horizon;
    double setpoint = 30.0;
    std::uint64_t seed = 0;
    PsoConfig pso{};
    StepResponseOptions response{};
    SynthOptions synth{};
    ValidateOptions validate{};
    std::optional<std::filesystem::path> data;
    std::filesystem::path out = "out";
};

/// Published parameter sets: "dragonskin20", "dragonskin-fxpro".
FracTransferFunction model_preset(const std::string& name);

/// Parses the JSON config text. Throws ConfigError.
RunConfig parse_run_config(const std::string& json_text);

/// Reads the config file (if any) and applies the overrides. Throws ConfigError.
RunConfig load_run_config(const Overrides& overrides);

/// Each command writes into config.out and throws on failure.
void cmd_simulate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_compare(const RunConfig& config);
void cmd_synth(const RunConfig& config);
void cmd_validate(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitData = 4;
inline constexpr int kExitOptimization = 5;

/// Loads the config, runs the named command and maps failures to exit codes,
/// printing one "error: ..." line on stderr.
int run_command(const std::string& command, const Overrides& overrides);

}  // namespace fracfit::cli
