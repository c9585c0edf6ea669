#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fracfit/cli.hpp"
#include "fracfit/errors.hpp"

namespace fracfit::cli {

namespace {

using nlohmann::json;

void check_keys(const json& block, const std::string& where, const std::set<std::string>& allowed) {
    if (!block.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, value] : block.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const json& block, const std::string& key, const std::string& where) {
    const json& v = block.at(key);
    if (!v.is_number()) {
        throw ConfigError(where + "." + key + ": expected a number");
    }
    return v.get<double>();
}

template <class T>
void read_number(const json& block, const std::string& key, const std::string& where, T& target) {
    if (!block.contains(key)) {
        return;
    }
    const json& v = block.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) {
            throw ConfigError(where + "." + key + ": expected an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && !v.is_number_unsigned()) {
                throw ConfigError(where + "." + key + ": expected a non-negative integer");
            }
        }
        target = v.get<T>();
    } else {
        target = get_number(block, key, where);
    }
}

void read_bool(const json& block, const std::string& key, const std::string& where, bool& target) {
    if (!block.contains(key)) {
        return;
    }
    if (!block.at(key).is_boolean()) {
        throw ConfigError(where + "." + key + ": expected true or false");
    }
    target = block.at(key).get<bool>();
}

ParamVector read_vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 5) {
        throw ConfigError(where + ": expected an array of 5 numbers");
    }
    ParamVector out{};
    for (std::size_t i = 0; i < 5; ++i) {
        if (!v[i].is_number()) {
            throw ConfigError(where + ": expected an array of 5 numbers");
        }
        out[i] = v[i].get<double>();
    }
    return out;
}

FracTransferFunction parse_model(const json& block, std::string& label) {
    if (block.is_object() && block.contains("preset")) {
        check_keys(block, "model", {"preset"});
        if (!block.at("preset").is_string()) {
            throw ConfigError("model.preset: expected a string");
        }
        label = block.at("preset").get<std::string>();
        return model_preset(label);
    }
    check_keys(block, "model", {"alpha2", "alpha1", "a1", "a0", "b0"});
    for (const char* key : {"alpha2", "alpha1", "a1", "a0", "b0"}) {
        if (!block.contains(key)) {
            throw ConfigError(std::string("model: missing '") + key + "'");
        }
    }
    label = "custom";
    try {
        return FracTransferFunction::make(
            get_number(block, "alpha2", "model"), get_number(block, "alpha1", "model"),
            get_number(block, "a1", "model"), get_number(block, "a0", "model"),
            get_number(block, "b0", "model"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

NonlinearParams parse_baseline(const json& block, double& step) {
    check_keys(block, "baseline",
               {"m_eq", "c_np", "k_np", "n_p", "delta_np", "force", "geometry", "step"});
    double k = 1.0;
    double n_p = 1.5;
    read_number(block, "n_p", "baseline", n_p);
    if (block.contains("k_np") && block.contains("geometry")) {
        throw ConfigError("baseline: give either k_np or geometry, not both");
    }
    try {
        if (block.contains("geometry")) {
            const json& g = block.at("geometry");
            check_keys(g, "baseline.geometry", {"young_modulus", "width", "thickness", "length0"});
            BeamGeometry geom;
            for (const char* key : {"young_modulus", "width", "thickness", "length0"}) {
                if (!g.contains(key)) {
                    throw ConfigError(std::string("baseline.geometry: missing '") + key + "'");
                }
            }
            geom.young_modulus = get_number(g, "young_modulus", "baseline.geometry");
            geom.width = get_number(g, "width", "baseline.geometry");
            geom.thickness = get_number(g, "thickness", "baseline.geometry");
            geom.length0 = get_number(g, "length0", "baseline.geometry");
            k = stiffness(geom, n_p);
        }
        read_number(block, "k_np", "baseline", k);
        NonlinearParams p = default_nonlinear_params(k > 0.0 ? k : 1.0);
        p.k_np = k;
        p.n_p = n_p;
        read_number(block, "m_eq", "baseline", p.m_eq);
        p.c_np = 0.8 * std::sqrt(std::max(k, 0.0) * std::max(p.m_eq, 0.0));
        read_number(block, "c_np", "baseline", p.c_np);
        read_number(block, "delta_np", "baseline", p.delta_np);
        read_number(block, "force", "baseline", p.force);
        read_number(block, "step", "baseline", step);
        p.validate();
        if (!(step > 0.0)) {
            throw ConfigError("baseline.step must be positive");
        }
        return p;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("baseline: ") + e.what());
    }
}

void parse_pso(const json& block, PsoConfig& pso) {
    check_keys(block, "pso",
               {"swarm_size", "iterations", "inertia", "cognitive", "social", "bounds",
                "velocity_cap", "per_dimension_random", "synchronous", "threads"});
    read_number(block, "swarm_size", "pso", pso.swarm_size);
    read_number(block, "iterations", "pso", pso.iterations);
    read_number(block, "inertia", "pso", pso.inertia);
    read_number(block, "cognitive", "pso", pso.cognitive);
    read_number(block, "social", "pso", pso.social);
    read_number(block, "threads", "pso", pso.threads);
    read_bool(block, "per_dimension_random", "pso", pso.per_dimension_random);
    read_bool(block, "synchronous", "pso", pso.synchronous);
    if (block.contains("bounds")) {
        const json& b = block.at("bounds");
        if (b.is_string()) {
            pso.bounds = ParamBounds::preset(b.get<std::string>());
        } else {
            check_keys(b, "pso.bounds", {"lower", "upper"});
            if (!b.contains("lower") || !b.contains("upper")) {
                throw ConfigError("pso.bounds: needs lower and upper");
            }
            pso.bounds.lower = read_vector(b.at("lower"), "pso.bounds.lower");
            pso.bounds.upper = read_vector(b.at("upper"), "pso.bounds.upper");
        }
    }
    if (block.contains("velocity_cap")) {
        pso.velocity_cap = read_vector(block.at("velocity_cap"), "pso.velocity_cap");
    }
}

void parse_grid(const json& block, RunConfig& cfg) {
    check_keys(block, "grid", {"step", "horizon", "gl_step"});
    if (block.contains("step")) {
        cfg.grid_step = get_number(block, "step", "grid");
    }
    if (block.contains("horizon")) {
        cfg.horizon = get_number(block, "horizon", "grid");
    }
    read_number(block, "gl_step", "grid", cfg.response.gl_step);
}

void parse_synth(const json& block, SynthOptions& synth) {
    check_keys(block, "synth", {"n_trials", "noise_sigma", "name"});
    read_number(block, "n_trials", "synth", synth.n_trials);
    read_number(block, "noise_sigma", "synth", synth.noise_sigma);
    if (block.contains("name")) {
        if (!block.at("name").is_string()) {
            throw ConfigError("synth.name: expected a string");
        }
        synth.name = block.at("name").get<std::string>();
    }
    if (synth.n_trials < 1) {
        throw ConfigError("synth.n_trials must be >= 1");
    }
    if (!(synth.noise_sigma >= 0.0)) {
        throw ConfigError("synth.noise_sigma must be >= 0");
    }
    if (synth.name.empty() || synth.name.find_first_of("/\\") != std::string::npos) {
        throw ConfigError("synth.name must be a plain file name");
    }
}

void parse_validate(const json& block, ValidateOptions& v) {
    check_keys(block, "validate", {"counts", "noise_sigma", "heldout_trials"});
    if (block.contains("counts")) {
        const json& c = block.at("counts");
        if (!c.is_array() || c.empty()) {
            throw ConfigError("validate.counts: expected a non-empty array of integers");
        }
        v.counts.clear();
        for (const json& n : c) {
            if (!n.is_number_integer()) {
                throw ConfigError("validate.counts: expected integers");
            }
            v.counts.push_back(n.get<int>());
        }
    }
    read_number(block, "noise_sigma", "validate", v.noise_sigma);
    read_number(block, "heldout_trials", "validate", v.heldout_trials);
}

void check_config(const RunConfig& cfg) {
    if (cfg.grid_step && !(*cfg.grid_step > 0.0)) {
        throw ConfigError("grid step must be positive");
    }
    if (cfg.horizon && !(*cfg.horizon > 0.0)) {
        throw ConfigError("horizon must be positive");
    }
    if (!(cfg.setpoint > 0.0)) {
        throw ConfigError("setpoint must be positive");
    }
    if (!(cfg.response.gl_step > 0.0 && cfg.response.gl_step <= kMaxGlStep)) {
        throw ConfigError("grid.gl_step must lie in (0, 0.05]");
    }
    for (int n : cfg.validate.counts) {
        if (n < 1 || n > 8) {
            throw ConfigError("validate.counts must lie in 1..8, got " + std::to_string(n));
        }
    }
    if (!(cfg.validate.noise_sigma >= 0.0) || cfg.validate.heldout_trials < 1) {
        throw ConfigError("validate: need noise_sigma >= 0 and heldout_trials >= 1");
    }
    if (cfg.data) {
        std::error_code ec;
        const auto in = std::filesystem::weakly_canonical(*cfg.data, ec);
        const auto out = std::filesystem::weakly_canonical(cfg.out, ec);
        if (!ec && in == out) {
            throw ConfigError("data path and output directory must differ");
        }
    }
    cfg.pso.validate();
}

}  // namespace

FracTransferFunction model_preset(const std::string& name) {
    if (name == "dragonskin20") {
        return FracTransferFunction::make(1.406, 1.196, 0.794, 1.638, 0.934);
    }
    if (name == "dragonskin-fxpro") {
        return FracTransferFunction::make(1.424, 1.170, 0.986, 2.103, 0.728);
    }
    throw ConfigError("unknown preset '" + name + "' (expected dragonskin20 or dragonskin-fxpro)");
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        check_keys(root, "config",
                   {"model", "baseline", "grid", "pso", "synth", "validate", "seed", "setpoint",
                    "data", "out"});
        if (root.contains("model")) {
            cfg.model = parse_model(root.at("model"), cfg.model_label);
        }
        if (root.contains("baseline")) {
            cfg.baseline = parse_baseline(root.at("baseline"), cfg.baseline_step);
        }
        if (root.contains("grid")) {
            parse_grid(root.at("grid"), cfg);
        }
        if (root.contains("pso")) {
            parse_pso(root.at("pso"), cfg.pso);
        }
        if (root.contains("synth")) {
            parse_synth(root.at("synth"), cfg.synth);
        }
        if (root.contains("validate")) {
            parse_validate(root.at("validate"), cfg.validate);
        }
        read_number(root, "seed", "config", cfg.seed);
        read_number(root, "setpoint", "config", cfg.setpoint);
        for (const char* key : {"data", "out"}) {
            if (root.contains(key) && !root.at(key).is_string()) {
                throw ConfigError(std::string("config.") + key + ": expected a path string");
            }
        }
        if (root.contains("data")) {
            cfg.data = root.at("data").get<std::string>();
        }
        if (root.contains("out")) {
            cfg.out = root.at("out").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.pso.seed = cfg.seed;
    check_config(cfg);
    return cfg;
}

RunConfig load_run_config(const Overrides& o) {
    RunConfig cfg;
    if (o.config) {
        std::ifstream in(*o.config, std::ios::binary);
        if (!in) {
            throw ConfigError("cannot read config file " + o.config->string());
        }
        std::ostringstream text;
        text << in.rdbuf();
        cfg = parse_run_config(text.str());
        // Relative paths in the file are taken relative to the file.
        const auto base = o.config->parent_path();
        if (cfg.data && cfg.data->is_relative()) {
            cfg.data = base / *cfg.data;
        }
        if (cfg.out.is_relative() && !o.out) {
            cfg.out = base / cfg.out;
        }
    }
    if (o.preset) {
        cfg.model = model_preset(*o.preset);
        cfg.model_label = *o.preset;
    }
    if (o.data) cfg.data = *o.data;
    if (o.out) cfg.out = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.grid_step) cfg.grid_step = *o.grid_step;
    if (o.horizon) cfg.horizon = *o.horizon;
    cfg.pso.seed = cfg.seed;
    cfg.pso.response = cfg.response;
    check_config(cfg);
    return cfg;
}

}  // namespace fracfit::cli
