#include "fracfit/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "fracfit/dataset_io.hpp"
#include "fracfit/errors.hpp"
#include "fracfit/log.hpp"

namespace fracfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kOrderResampleAttempts = 100;

ParamVector width_of(const ParamBounds& b) {
    ParamVector w{};
    for (std::size_t d = 0; d < w.size(); ++d) {
        w[d] = b.upper[d] - b.lower[d];
    }
    return w;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) {
        return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> evaluate_positions(const std::vector<Particle>& swarm,
                                       const FitnessFunction& fitness, unsigned threads) {
    std::vector<double> out(swarm.size(), kInf);
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(swarm.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < swarm.size(); ++i) {
            out[i] = fitness(swarm[i].position);
        }
        return out;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < swarm.size(); i += threads) {
                out[i] = fitness(swarm[i].position);
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    return out;
}

std::size_t best_index(const std::vector<Particle>& swarm) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < swarm.size(); ++i) {
        if (swarm[i].best_fitness < swarm[best].best_fitness) {
            best = i;
        }
    }
    return best;
}

std::vector<std::mt19937_64> make_streams(const PsoConfig& config) {
    std::vector<std::mt19937_64> rngs;
    rngs.reserve(static_cast<std::size_t>(config.swarm_size));
    for (int i = 0; i < config.swarm_size; ++i) {
        rngs.push_back(particle_rng(config.seed, static_cast<std::size_t>(i)));
    }
    return rngs;
}

std::vector<Particle> init_swarm_with(const PsoConfig& config, const FitnessFunction& fitness,
                                      std::vector<std::mt19937_64>& rngs) {
    std::vector<Particle> swarm;
    swarm.reserve(rngs.size());
    for (auto& rng : rngs) {
        swarm.push_back(init_particle(config, rng));
    }
    const std::vector<double> f = evaluate_positions(swarm, fitness, config.threads);
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        swarm[i].best_fitness = f[i];
    }
    return swarm;
}

}  // namespace

ParamBounds ParamBounds::widened() {
    return {{1.1, 1.0, 0.3, 0.8, 0.5}, {1.9, 1.5, 1.2, 2.5, 2.0}};
}

ParamBounds ParamBounds::narrow() {
    return {{1.1, 1.0, 0.5, 1.0, 1.0}, {1.9, 1.5, 1.0, 2.0, 2.0}};
}

ParamBounds ParamBounds::preset(const std::string& name) {
    if (name == "widened") {
        return widened();
    }
    if (name == "narrow") {
        return narrow();
    }
    throw ConfigError("unknown bounds preset '" + name + "' (expected widened or narrow)");
}

bool ParamBounds::contains(const ParamVector& x) const noexcept {
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!(x[d] >= lower[d] && x[d] <= upper[d])) {
            return false;
        }
    }
    return true;
}

void ParamBounds::validate() const {
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || lower[d] > upper[d]) {
            throw ConfigError("bounds: component " + std::to_string(d) +
                              " needs finite lower <= upper");
        }
    }
    if (!(lower[kAlpha1] > 0.0) || !(upper[kAlpha2] <= 2.0)) {
        throw ConfigError("bounds: orders must lie in (0, 2]");
    }
    if (!(lower[kAlpha1] < upper[kAlpha2])) {
        throw ConfigError("bounds: box contains no point with alpha1 < alpha2");
    }
    if (!(lower[2] >= 0.0) || !(lower[3] > 0.0) || !(lower[4] > 0.0)) {
        throw ConfigError("bounds: need a1 >= 0, a0 > 0, b0 > 0");
    }
}

ParamVector PsoConfig::effective_velocity_cap() const {
    if (velocity_cap) {
        return *velocity_cap;
    }
    ParamVector cap = width_of(bounds);
    for (double& c : cap) {
        c *= 0.5;
    }
    return cap;
}

void PsoConfig::validate() const {
    if (swarm_size < 2) {
        throw ConfigError("pso: swarm_size must be >= 2");
    }
    if (iterations < 1) {
        throw ConfigError("pso: iterations must be >= 1");
    }
    if (!(inertia > 0.0 && inertia <= 1.0)) {
        throw ConfigError("pso: inertia must lie in (0, 1]");
    }
    if (!(cognitive >= 0.0) || !(social >= 0.0) || !std::isfinite(cognitive) ||
        !std::isfinite(social)) {
        throw ConfigError("pso: c1 and c2 must be finite and >= 0");
    }
    bounds.validate();
    if (velocity_cap) {
        for (double c : *velocity_cap) {
            if (!(c > 0.0) || !std::isfinite(c)) {
                throw ConfigError("pso: velocity_cap must be positive");
            }
        }
    }
    if (!(response.gl_step > 0.0 && response.gl_step <= kMaxGlStep)) {
        throw ConfigError("pso: fitness gl_step must lie in (0, 0.05]");
    }
}

FitnessFunction::FitnessFunction(std::span<const Dataset> datasets, StepResponseOptions options)
    : options_(options) {
    if (datasets.empty()) {
        throw DataError("fitness: no datasets");
    }
    for (const Dataset& ds : datasets) {
        for (const StepTrace& tr : ds.traces()) {
            times_.insert(times_.end(), tr.times().begin(), tr.times().end());
        }
    }
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
    if (times_.empty() || times_.front() < 0.0) {
        throw DataError("fitness: sample times must be non-negative");
    }
    for (const Dataset& ds : datasets) {
        for (const StepTrace& raw : ds.traces()) {
            const StepTrace tr = raw.normalized() ? raw : normalize(raw);
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const auto it = std::lower_bound(times_.begin(), times_.end(), tr.times()[i]);
                samples_.push_back({static_cast<std::size_t>(it - times_.begin()), tr.values()[i]});
            }
            ++trace_count_;
        }
    }
}

double FitnessFunction::operator()(const ParamVector& position) const {
    const auto tf = FracTransferFunction::from_vector(position);
    if (!tf) {
        return kInf;
    }
    try {
        const StepResponse model = step_response(*tf, times_, options_);
        double sse = 0.0;
        for (const Sample& s : samples_) {
            const double d = model.values[s.time_index] - s.value;
            sse += d * d;
        }
        const double f = std::sqrt(sse / static_cast<double>(samples_.size()));
        return std::isfinite(f) ? f : kInf;
    } catch (const std::exception&) {
        return kInf;
    }
}

std::mt19937_64 particle_rng(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

void repair_order(ParamVector& x, const ParamBounds& bounds) {
    if (x[kAlpha1] >= x[kAlpha2]) {
        std::swap(x[kAlpha1], x[kAlpha2]);
        for (std::size_t d : {kAlpha2, kAlpha1}) {
            x[d] = std::clamp(x[d], bounds.lower[d], bounds.upper[d]);
        }
    }
}

Particle init_particle(const PsoConfig& config, std::mt19937_64& rng) {
    const ParamBounds& b = config.bounds;
    const ParamVector cap = config.effective_velocity_cap();
    Particle p;
    for (int attempt = 0; attempt < kOrderResampleAttempts; ++attempt) {
        for (std::size_t d = 0; d < p.position.size(); ++d) {
            p.position[d] = uniform(rng, b.lower[d], b.upper[d]);
        }
        if (p.position[kAlpha1] < p.position[kAlpha2]) {
            break;
        }
    }
    repair_order(p.position, b);
    for (std::size_t d = 0; d < p.velocity.size(); ++d) {
        p.velocity[d] = uniform(rng, -cap[d], cap[d]);
    }
    p.best_position = p.position;
    p.best_fitness = kInf;
    return p;
}

std::vector<Particle> init_swarm(const PsoConfig& config, const FitnessFunction& fitness) {
    config.validate();
    std::vector<std::mt19937_64> rngs = make_streams(config);
    return init_swarm_with(config, fitness, rngs);
}

void update_particle(Particle& p, const ParamVector& global_best, const PsoConfig& config,
                     std::mt19937_64& rng) {
    const ParamBounds& b = config.bounds;
    const ParamVector cap = config.effective_velocity_cap();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double r1 = unit(rng);
    double r2 = unit(rng);
    for (std::size_t d = 0; d < p.position.size(); ++d) {
        if (config.per_dimension_random && d > 0) {
            r1 = unit(rng);
            r2 = unit(rng);
        }
        double v = config.inertia * p.velocity[d] +
                   config.cognitive * r1 * (p.best_position[d] - p.position[d]) +
                   config.social * r2 * (global_best[d] - p.position[d]);
        v = std::clamp(v, -cap[d], cap[d]);
        double x = p.position[d] + v;
        if (x < b.lower[d]) {
            x = b.lower[d];
            v = 0.0;
        } else if (x > b.upper[d]) {
            x = b.upper[d];
            v = 0.0;
        }
        p.position[d] = x;
        p.velocity[d] = v;
    }
    repair_order(p.position, b);
}

std::vector<std::string> data_sufficiency_warnings(std::span<const Dataset> datasets) {
    std::size_t traces = 0;
    std::size_t points = 0;
    for (const Dataset& ds : datasets) {
        traces += ds.size();
        points += ds.total_points();
    }
    std::vector<std::string> out;
    if (traces < 4) {
        out.push_back("only " + std::to_string(traces) +
                      " step responses supplied; identification needs at least 4");
    }
    if (points < 200) {
        out.push_back("only " + std::to_string(points) +
                      " data points supplied; identification needs at least 200");
    }
    return out;
}

FitResult run_pso(const PsoConfig& config, std::span<const Dataset> datasets) {
    config.validate();
    if (datasets.empty()) {
        throw DataError("run_pso: no datasets");
    }
    FitResult result;
    result.warnings = data_sufficiency_warnings(datasets);
    for (const auto& w : result.warnings) {
        log_message(LogLevel::Warn, w);
    }

    const FitnessFunction fitness(datasets, config.response);
    std::vector<std::mt19937_64> rngs = make_streams(config);
    std::vector<Particle> swarm = init_swarm_with(config, fitness, rngs);
    result.evaluations = static_cast<std::int64_t>(swarm.size());

    std::size_t g = best_index(swarm);
    ParamVector global_best = swarm[g].best_position;
    double global_fitness = swarm[g].best_fitness;

    for (int it = 0; it < config.iterations; ++it) {
        if (config.synchronous) {
            for (std::size_t i = 0; i < swarm.size(); ++i) {
                update_particle(swarm[i], global_best, config, rngs[i]);
            }
            const std::vector<double> f = evaluate_positions(swarm, fitness, config.threads);
            for (std::size_t i = 0; i < swarm.size(); ++i) {
                if (f[i] < swarm[i].best_fitness) {
                    swarm[i].best_fitness = f[i];
                    swarm[i].best_position = swarm[i].position;
                }
            }
            g = best_index(swarm);
            if (swarm[g].best_fitness < global_fitness) {
                global_fitness = swarm[g].best_fitness;
                global_best = swarm[g].best_position;
            }
        } else {
            for (std::size_t i = 0; i < swarm.size(); ++i) {
                update_particle(swarm[i], global_best, config, rngs[i]);
                const double f = fitness(swarm[i].position);
                if (f < swarm[i].best_fitness) {
                    swarm[i].best_fitness = f;
                    swarm[i].best_position = swarm[i].position;
                    if (f < global_fitness) {
                        global_fitness = f;
                        global_best = swarm[i].position;
                    }
                }
            }
        }
        result.evaluations += static_cast<std::int64_t>(swarm.size());
        result.history.push_back(global_fitness);
        log_message(LogLevel::Debug, "pso iteration " + std::to_string(it + 1) +
                                         " best fitness " + std::to_string(global_fitness));
    }

    if (!std::isfinite(global_fitness)) {
        throw OptimizationError("every particle evaluated to the failure sentinel");
    }
    result.best_position = global_best;
    result.best_fitness = global_fitness;
    return result;
}

}  // namespace fracfit
