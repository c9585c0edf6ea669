#include <iostream>

#include <CLI11.hpp>

#include "fracfit/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fractional-order step-response modeling and identification"};
    app.require_subcommand(1);
    app.fallthrough();

    fracfit::cli::Overrides o;
    std::string config, data, out, preset;
    std::uint64_t seed = 0;
    double grid_step = 0.0;
    double horizon = 0.0;
    auto* config_opt = app.add_option("--config", config, "JSON run configuration");
    auto* data_opt = app.add_option("--data", data, "dataset CSV file or directory of CSV files");
    auto* out_opt = app.add_option("--out", out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (u64)");
    auto* preset_opt = app.add_option("--preset", preset, "dragonskin20 | dragonskin-fxpro");
    auto* step_opt = app.add_option("--grid-step", grid_step, "output/data grid step [s]");
    auto* horizon_opt = app.add_option("--horizon", horizon, "grid horizon [s]");

    app.add_subcommand("simulate", "step response of a model or baseline");
    app.add_subcommand("fit", "identify the fractional model from data by PSO");
    app.add_subcommand("compare", "fractional model and baseline against averaged data");
    app.add_subcommand("synth", "synthetic step-response dataset");
    app.add_subcommand("validate", "fit quality versus number of datasets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return fracfit::cli::kExitConfig;
    }

    if (*config_opt) o.config = config;
    if (*data_opt) o.data = data;
    if (*out_opt) o.out = out;
    if (*seed_opt) o.seed = seed;
    if (*preset_opt) o.preset = preset;
    if (*step_opt) o.grid_step = grid_step;
    if (*horizon_opt) o.horizon = horizon;

    return fracfit::cli::run_command(app.get_subcommands().front()->get_name(), o);
}
