#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include <json.hpp>

#include "fracfit/cli.hpp"
#include "fracfit/dataset_io.hpp"
#include "fracfit/errors.hpp"
#include "fracfit/log.hpp"
#include "fracfit/numfmt.hpp"

namespace fracfit::cli {

namespace {

using nlohmann::json;

constexpr double kSimulateStep = 1e-3;
constexpr double kSimulateHorizon = 10.0;
constexpr double kDataStep = 0.2;
constexpr double kDataHorizon = 9.8;

constexpr const char* kParamNames[] = {"alpha2", "alpha1", "a1", "a0", "b0"};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

void prepare_out(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
}

json params_json(const ParamVector& x) {
    json j = json::object();
    for (std::size_t d = 0; d < x.size(); ++d) {
        j[kParamNames[d]] = x[d];
    }
    return j;
}

json metrics_json(const ErrorMetrics& m) {
    return {{"rmse_deg", m.rmse_deg}, {"rmse_percent", m.rmse_percent}, {"setpoint_deg", m.setpoint_deg}};
}

const FracTransferFunction& require_model(const RunConfig& cfg, const char* command) {
    if (!cfg.model) {
        throw ConfigError(std::string(command) + ": a model block or --preset is required");
    }
    return *cfg.model;
}

SimGrid grid_or(const RunConfig& cfg, double step, double horizon) {
    return SimGrid(cfg.horizon.value_or(horizon), cfg.grid_step.value_or(step));
}

std::vector<Dataset> load_normalized(const RunConfig& cfg, const char* command) {
    if (!cfg.data) {
        throw ConfigError(std::string(command) + ": --data or config.data is required");
    }
    std::vector<Dataset> out;
    for (const Dataset& ds : load_data_path(*cfg.data)) {
        out.push_back(ds.normalized() ? ds : normalize(ds));
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// Normalized pooled RMSE of a model over every sample of the datasets.
double pooled_rmse(const FracTransferFunction& tf, std::span<const Dataset> datasets,
                   const StepResponseOptions& options) {
    double sse = 0.0;
    std::size_t n = 0;
    for (const Dataset& ds : datasets) {
        for (const StepTrace& tr : ds.traces()) {
            const StepResponse r = step_response(tf, tr.times(), options);
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double d = r.values[i] - tr.values()[i];
                sse += d * d;
            }
            n += tr.size();
        }
    }
    return std::sqrt(sse / static_cast<double>(n));
}

}  // namespace

void cmd_simulate(const RunConfig& cfg) {
    if (cfg.model && cfg.baseline) {
        throw ConfigError("simulate: give exactly one model block (model or baseline), not both");
    }
    if (!cfg.model && !cfg.baseline) {
        throw ConfigError("simulate: a model block, baseline block or --preset is required");
    }
    const SimGrid grid = grid_or(cfg, kSimulateStep, kSimulateHorizon);
    prepare_out(cfg);

    std::vector<double> values;
    std::vector<std::string> paths;
    json summary = {{"command", "simulate"}, {"setpoint_deg", cfg.setpoint},
                    {"grid", {{"step", grid.step()}, {"horizon", grid.t_end()}, {"points", grid.n_points()}}}};
    double final_target = 0.0;
    if (cfg.model) {
        const FracTransferFunction& tf = *cfg.model;
        const StepResponse r = step_response(tf, grid, cfg.response);
        values = r.values;
        for (EvalPath p : r.paths) {
            paths.emplace_back(p == EvalPath::Series ? "series" : "gl");
        }
        final_target = dc_gain(tf);
        json model = params_json(tf.to_vector());
        model["label"] = cfg.model_label;
        summary["model"] = model;
        summary["dc_gain"] = final_target;
        summary["paths"] = {{"series", r.series_count()}, {"gl", r.gl_count()}};
    } else {
        const NonlinearParams& p = *cfg.baseline;
        const StepTrace trace = simulate_nonlinear(p, grid);
        values = trace.values();
        paths.assign(values.size(), "rk4");
        final_target = p.steady_state();
        summary["baseline"] = {{"m_eq", p.m_eq}, {"c_np", p.c_np}, {"k_np", p.k_np},
                               {"n_p", p.n_p}, {"delta_np", p.delta_np}, {"force", p.force}};
        summary["steady_state"] = final_target;
        summary["paths"] = {{"rk4", values.size()}};
    }
    const std::vector<double> times = grid.times();
    summary["final_value"] = values.back();
    const auto settle = settling_time(times, values, final_target, 0.02);
    summary["settling_time_s"] = settle ? json(*settle) : json(nullptr);

    std::string csv = "t_s,y_norm,theta_deg,path\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        csv += format_double(times[i]) + ',' + format_double(values[i]) + ',' +
               format_double(values[i] * cfg.setpoint) + ',' + paths[i] + '\n';
    }
    write_file(cfg.out / "trace.csv", csv);
    write_json(cfg.out / "summary.json", summary);
}

void cmd_fit(const RunConfig& cfg) {
    const std::vector<Dataset> datasets = load_normalized(cfg, "fit");
    prepare_out(cfg);
    const FitResult result = run_pso(cfg.pso, datasets);
    const FracTransferFunction tf = *FracTransferFunction::from_vector(result.best_position);

    std::string materials;
    for (const Dataset& ds : datasets) {
        materials += (materials.empty() ? "" : "+") + ds.material();
    }
    json table_row = {{"material", materials}};
    for (std::size_t d = 0; d < 5; ++d) {
        table_row[kParamNames[d]] = result.best_position[d];
    }

    json per_dataset = json::array();
    std::string csv =
        "material,trial_id,t_s,data_norm,model_norm,residual_norm,data_deg,model_deg,residual_deg\n";
    for (const Dataset& ds : datasets) {
        double sse = 0.0;
        std::size_t n = 0;
        for (const StepTrace& tr : ds.traces()) {
            const StepResponse r = step_response(tf, tr.times(), cfg.response);
            const double sp = tr.setpoint();
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double data = tr.values()[i];
                const double model = r.values[i];
                const double res = data - model;
                sse += res * res;
                csv += ds.material() + ',' + tr.trial_id() + ',' + format_double(tr.times()[i]) + ',' +
                       format_double(data) + ',' + format_double(model) + ',' + format_double(res) +
                       ',' + format_double(data * sp) + ',' + format_double(model * sp) + ',' +
                       format_double(res * sp) + '\n';
            }
            n += tr.size();
        }
        const double setpoint = ds.traces().front().setpoint();
        ErrorMetrics m;
        m.setpoint_deg = setpoint;
        m.rmse_deg = std::sqrt(sse / static_cast<double>(n)) * setpoint;
        m.rmse_percent = percent_of_setpoint(m.rmse_deg, setpoint);
        json entry = metrics_json(m);
        entry["material"] = ds.material();
        entry["traces"] = ds.size();
        per_dataset.push_back(entry);
    }

    json out = {{"command", "fit"},
                {"seed", cfg.pso.seed},
                {"best_fitness", result.best_fitness},
                {"best_position", params_json(result.best_position)},
                {"table", json::array({table_row})},
                {"history", result.history},
                {"evaluations", result.evaluations},
                {"warnings", result.warnings},
                {"metrics", per_dataset},
                {"model", params_json(result.best_position)}};
    write_json(cfg.out / "fit_result.json", out);
    write_file(cfg.out / "fitted_trace.csv", csv);
}

void cmd_compare(const RunConfig& cfg) {
    const FracTransferFunction& tf = require_model(cfg, "compare");
    if (!cfg.baseline) {
        throw ConfigError("compare: a baseline block is required");
    }
    const std::vector<Dataset> datasets = load_normalized(cfg, "compare");
    prepare_out(cfg);

    json reports = json::array();
    std::string csv =
        "material,t_s,data_norm,fractional_norm,baseline_norm,data_deg,fractional_deg,baseline_deg\n";
    for (const Dataset& ds : datasets) {
        double horizon = cfg.horizon.value_or(std::numeric_limits<double>::infinity());
        for (const StepTrace& tr : ds.traces()) {
            horizon = std::min(horizon, tr.back_time());
        }
        const StepTrace& first = ds.traces().front();
        if (!cfg.grid_step && first.size() < 2) {
            throw DataError("compare: trace '" + first.trial_id() + "' has fewer than two samples");
        }
        const double step = cfg.grid_step.value_or(first.times()[1] - first.times()[0]);
        const SimGrid grid(horizon, step);
        const StepTrace mean = average_traces(ds, grid);
        const double setpoint = mean.setpoint();

        const StepResponse frac = step_response(tf, mean.times(), cfg.response);
        const StepTrace frac_trace(mean.times(), frac.values, setpoint, "fractional", true);

        const SimGrid fine(horizon + cfg.baseline_step, cfg.baseline_step);
        const StepTrace raw_baseline = simulate_nonlinear(*cfg.baseline, fine);
        const StepTrace base_resampled = resample(raw_baseline, mean.times());
        const StepTrace base_trace(mean.times(), base_resampled.values(), setpoint, "baseline", true);

        json entry = {{"material", ds.material()},
                      {"traces", ds.size()},
                      {"setpoint_deg", setpoint},
                      {"points", mean.size()},
                      {"fractional", metrics_json(error_metrics(frac_trace, mean, setpoint))},
                      {"baseline", metrics_json(error_metrics(base_trace, mean, setpoint))}};
        reports.push_back(entry);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = mean.values()[i];
            const double f = frac_trace.values()[i];
            const double b = base_trace.values()[i];
            csv += ds.material() + ',' + format_double(mean.times()[i]) + ',' + format_double(d) + ',' +
                   format_double(f) + ',' + format_double(b) + ',' + format_double(d * setpoint) +
                   ',' + format_double(f * setpoint) + ',' + format_double(b * setpoint) + '\n';
        }
    }
    json out = {{"command", "compare"}, {"model", params_json(tf.to_vector())}, {"datasets", reports}};
    write_json(cfg.out / "compare.json", out);
    write_file(cfg.out / "compare.csv", csv);
}

void cmd_synth(const RunConfig& cfg) {
    const FracTransferFunction& tf = require_model(cfg, "synth");
    const SimGrid grid = grid_or(cfg, kDataStep, kDataHorizon);
    const Dataset ds = gen_synthetic(tf, grid, cfg.setpoint, cfg.synth.n_trials,
                                     cfg.synth.noise_sigma, cfg.seed, cfg.response);
    prepare_out(cfg);
    write_file(cfg.out / (cfg.synth.name + ".csv"), to_csv(ds));
    const Dataset norm = normalize(ds);
    std::string csv = "trial_id,t_s,y_norm\n";
    for (const StepTrace& tr : norm.traces()) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            csv += tr.trial_id() + ',' + format_double(tr.times()[i]) + ',' +
                   format_double(tr.values()[i]) + '\n';
        }
    }
    write_file(cfg.out / (cfg.synth.name + "_normalized.csv"), csv);
}

void cmd_validate(const RunConfig& cfg) {
    const FracTransferFunction& truth = require_model(cfg, "validate");
    const SimGrid grid = grid_or(cfg, kDataStep, kDataHorizon);
    const ValidateOptions& v = cfg.validate;
    prepare_out(cfg);

    const std::vector<Dataset> heldout{normalize(gen_synthetic(
        truth, grid, cfg.setpoint, v.heldout_trials, v.noise_sigma, derive_seed(cfg.seed, 0), cfg.response))};
    const std::vector<Dataset> noiseless{
        normalize(gen_synthetic(truth, grid, cfg.setpoint, 1, 0.0, 0, cfg.response))};
    const ParamVector truth_vec = truth.to_vector();

    json rows = json::array();
    for (const int count : v.counts) {
        const auto stream = static_cast<std::uint32_t>(count);
        const Dataset all = gen_synthetic(truth, grid, cfg.setpoint, count, v.noise_sigma,
                                          derive_seed(cfg.seed, stream), cfg.response);
        const std::vector<Dataset> training{normalize(all)};
        PsoConfig pso = cfg.pso;
        pso.seed = derive_seed(cfg.seed, 100 + stream);
        const FitResult fit = run_pso(pso, training);
        const FracTransferFunction fitted = *FracTransferFunction::from_vector(fit.best_position);

        json rel = json::object();
        double worst = 0.0;
        for (std::size_t d = 0; d < 5; ++d) {
            const double e = std::fabs(fit.best_position[d] - truth_vec[d]) / std::fabs(truth_vec[d]);
            rel[kParamNames[d]] = e;
            worst = std::max(worst, e);
        }
        const std::size_t points = all.total_points();
        rows.push_back({{"datasets", count},
                        {"points", points},
                        {"meets_minimum", count >= 4 && points >= 200},
                        {"best_fitness", fit.best_fitness},
                        {"parameters", params_json(fit.best_position)},
                        {"relative_error", rel},
                        {"max_relative_error", worst},
                        {"heldout_rmse", pooled_rmse(fitted, heldout, cfg.response)},
                        {"truth_rmse", pooled_rmse(fitted, noiseless, cfg.response)},
                        {"warnings", fit.warnings}});
    }
    json out = {{"command", "validate"},
                {"seed", cfg.seed},
                {"noise_sigma", v.noise_sigma},
                {"setpoint_deg", cfg.setpoint},
                {"points_per_trace", grid.n_points()},
                {"heldout_trials", v.heldout_trials},
                {"truth", params_json(truth_vec)},
                {"results", rows}};
    write_json(cfg.out / "validate.json", out);
}

int run_command(const std::string& command, const Overrides& overrides) {
    auto fail = [](int code, const std::string& message) {
        log_message(LogLevel::Error, message);
        return code;
    };
    try {
        const RunConfig cfg = load_run_config(overrides);
        if (command == "simulate") {
            cmd_simulate(cfg);
        } else if (command == "fit") {
            cmd_fit(cfg);
        } else if (command == "compare") {
            cmd_compare(cfg);
        } else if (command == "synth") {
            cmd_synth(cfg);
        } else if (command == "validate") {
            cmd_validate(cfg);
        } else {
            return fail(kExitConfig, "unknown command '" + command + "'");
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        return fail(kExitConfig, e.what());
    } catch (const DataError& e) {
        return fail(kExitData, e.what());
    } catch (const OptimizationError& e) {
        return fail(kExitOptimization, e.what());
    } catch (const ConvergenceError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const InstabilityError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const SingularityError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const GridTooCoarseError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const PoleError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const OverflowError& e) {
        return fail(kExitSimulation, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(kExitConfig, e.what());
    } catch (const std::exception& e) {
        return fail(kExitInternal, e.what());
    }
}

}  // namespace fracfit::cli
