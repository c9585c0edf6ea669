#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fracfit/fode.hpp"
#include "fracfit/trace.hpp"

namespace fracfit {

using ParamVector = std::array<double, 5>;  // (alpha2, alpha1, a1, a0, b0)

inline constexpr std::size_t kAlpha2 = 0;
inline constexpr std::size_t kAlpha1 = 1;

struct ParamBounds {
    ParamVector lower{};
    ParamVector upper{};

    /// alpha2 [1.1, 1.9], alpha1 [1.0, 1.5], a1 [0.3, 1.2], a0 [0.8, 2.5], b0 [0.5, 2.0].
    static ParamBounds widened();
    /// alpha2 [1.1, 1.9], alpha1 [1.0, 1.5], a1 [0.5, 1.0], a0 [1.0, 2.0], b0 [1.0, 2.0].
    static ParamBounds narrow();
    /// "widened" or "narrow"; ConfigError otherwise.
    static ParamBounds preset(const std::string& name);

    bool contains(const ParamVector& x) const noexcept;
    /// Throws ConfigError. lower == upper is allowed (collapsed component).
    void validate() const;

    bool operator==(const ParamBounds&) const = default;
};

struct PsoConfig {
    int swarm_size = 200;
    int iterations = 10;
    double inertia = 0.729;
    double cognitive = 1.494;
    double social = 1.494;
    std::uint64_t seed = 0;
    ParamBounds bounds = ParamBounds::widened();
    /// Unset means 0.5 * (upper - lower).
    std::optional<ParamVector> velocity_cap;
    /// Draw r1, r2 per component instead of once per update.
    bool per_dimension_random = false;
    /// false: each particle sees the global best refreshed by the particles
    /// before it in the same iteration. true: all particles move against the
    /// previous iteration's global best, which lets evaluations run in parallel.
    bool synchronous = false;
    /// Worker threads for fitness evaluation in synchronous mode; 0 picks the
    /// hardware count.
    unsigned threads = 1;
    /// Model evaluation inside the fitness.
    StepResponseOptions response{};

    ParamVector effective_velocity_cap() const;
    /// Throws ConfigError.
    void validate() const;
};

struct Particle {
    ParamVector position{};
    ParamVector velocity{};
    ParamVector best_position{};
    double best_fitness = 0.0;

    bool operator==(const Particle&) const = default;
};

struct FitResult {
    ParamVector best_position{};
    double best_fitness = 0.0;
    std::vector<double> history;
    std::int64_t evaluations = 0;
    std::vector<std::string> warnings;

    bool operator==(const FitResult&) const = default;
};

/// Pooled RMSE of the model's unit-step response against normalized data.
/// All samples of all traces carry equal weight. Raw datasets are normalized
/// on construction. Responses are computed once on the union of sample times.
class FitnessFunction {
public:
    FitnessFunction(std::span<const Dataset> datasets, StepResponseOptions options = {});

    /// +infinity when the position is not a valid model or simulation fails.
    double operator()(const ParamVector& position) const;

    std::size_t sample_count() const noexcept { return samples_.size(); }
    std::size_t trace_count() const noexcept { return trace_count_; }

private:
    struct Sample {
        std::size_t time_index;
        double value;
    };
    std::vector<double> times_;
    std::vector<Sample> samples_;
    std::size_t trace_count_ = 0;
    StepResponseOptions options_;
};

/// Stream of particle `index` for a run seeded with `seed`.
std::mt19937_64 particle_rng(std::uint64_t seed, std::size_t index);

/// Uniform position inside bounds with alpha1 < alpha2 (up to 100 draws, then
/// the two orders are swapped), velocity uniform in [-cap, cap]. best_position
/// is the start; best_fitness is left at +infinity for the caller to evaluate.
Particle init_particle(const PsoConfig& config, std::mt19937_64& rng);

/// One particle per stream, fitness evaluated.
std::vector<Particle> init_swarm(const PsoConfig& config, const FitnessFunction& fitness);

/// Velocity and position update; velocity clamped to the cap, position clamped
/// to bounds with the violated velocity component zeroed, then alpha-order
/// repair. Personal best is not touched.
void update_particle(Particle& p, const ParamVector& global_best, const PsoConfig& config,
                     std::mt19937_64& rng);

/// Swaps the orders when alpha1 >= alpha2, then clamps back into bounds.
void repair_order(ParamVector& x, const ParamBounds& bounds);

/// Each iteration moves every particle, evaluates it and refreshes the personal
/// and global bests (see PsoConfig::synchronous for the update order). Ties go
/// to the lowest index. history holds the global best after each iteration.
/// Throws OptimizationError when no particle ever reaches a finite fitness.
FitResult run_pso(const PsoConfig& config, std::span<const Dataset> datasets);

/// Non-fatal notes on thin data: fewer than 4 traces or fewer than 200 points.
std::vector<std::string> data_sufficiency_warnings(std::span<const Dataset> datasets);

}  // namespace fracfit
